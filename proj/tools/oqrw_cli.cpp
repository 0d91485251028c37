// Command-line front end: validate, analyze, asymptotics, rate, simulate,
// oracle-check. Primary output is JSON on stdout; --out DIR also writes the
// JSON and CSV tables to files. Timing goes to stderr only.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oqrw/oqrw.hpp"

namespace {

using namespace oqrw;

enum Exit : int {
  ok = 0,
  failure = 1,
  parse_error = 2,
  validation_failure = 3,
  indeterminate = 4,
  multiplicity = 5,
  standardization = 6,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema:
    case ErrorKind::lookup: return parse_error;
    case ErrorKind::validation: return validation_failure;
    case ErrorKind::indeterminate: return indeterminate;
    case ErrorKind::multiplicity: return multiplicity;
    case ErrorKind::standardization:
    case ErrorKind::degeneracy: return standardization;
    default: return failure;
  }
}

struct Common {
  std::string model_path;
  std::string builtin_name;
  std::optional<double> p_plus;
  std::string initial_path;
  std::optional<std::uint64_t> random_initial;
  std::string out_dir;
  double tol_stochastic = 1e-10;
  double tol_positivity = 1e-10;
  double tol_residual = 1e-9;
};

struct Grids {
  double u_min = -3.0, u_max = 3.0;
  int u_points = 121;
  double x_min = -1.0, x_max = 1.0;
  int x_points = 41;
  int max_extensions = 64;
  double cap = 1e6;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* model = cmd->add_option("--model", c.model_path, "Model JSON file (or inline JSON text)");
  auto* builtin_opt = cmd->add_option("--builtin", c.builtin_name, "Built-in model name");
  model->excludes(builtin_opt);
  cmd->add_option("--p-plus", c.p_plus, "Probability of a +1 step for classical_dilation (also --p)")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--initial", c.initial_path, "Initial lattice state JSON (default delta_0 x Id/n)");
  cmd->add_option("--random-initial", c.random_initial,
                  "Random initial internal state X X^T / Tr, seeded");
  cmd->add_option("--out", c.out_dir, "Directory for JSON/CSV outputs");
  cmd->add_option("--tol-stochastic", c.tol_stochastic, "Tolerance on ||sum L*L - Id||_F");
  cmd->add_option("--tol-positivity", c.tol_positivity, "Tolerance for positivity checks");
  cmd->add_option("--tol-residual", c.tol_residual, "Relative eigen-residual tolerance");
}

void add_grids(CLI::App* cmd, Grids& g, bool with_x) {
  cmd->add_option("--u-min", g.u_min);
  cmd->add_option("--u-max", g.u_max);
  cmd->add_option("--u-points", g.u_points)->check(CLI::PositiveNumber);
  if (with_x) {
    cmd->add_option("--x-min", g.x_min);
    cmd->add_option("--x-max", g.x_max);
    cmd->add_option("--x-points", g.x_points)->check(CLI::PositiveNumber);
    cmd->add_option("--max-extensions", g.max_extensions, "Outward window doublings allowed");
    cmd->add_option("--cap", g.cap, "Objective value reported as +inf");
  }
}

KrausModel load(const Common& c) {
  if (c.model_path.empty() == c.builtin_name.empty())
    fail(ErrorKind::schema, "give exactly one of --model or --builtin");
  if (!c.model_path.empty()) return load_model(c.model_path, c.tol_stochastic);
  KrausModel model = builtin(c.builtin_name, c.p_plus);
  require_stochastic(model, c.tol_stochastic);
  return model;
}

LatticeState initial_state(const Common& c, const KrausModel& model) {
  if (!c.initial_path.empty() && c.random_initial)
    fail(ErrorKind::schema, "--initial and --random-initial are exclusive");
  if (!c.initial_path.empty()) return load_initial_state(c.initial_path, model);
  if (c.random_initial) return random_initial(model, *c.random_initial);
  return default_initial_state(model);
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const Common& c, const std::string& name, const std::string& text) {
  if (c.out_dir.empty()) return;
  std::filesystem::create_directories(c.out_dir);
  std::ofstream f(std::filesystem::path(c.out_dir) / name);
  if (!f) fail(ErrorKind::contract, "cannot write " + name + " in " + c.out_dir);
  f << text;
}

void emit(const Common& c, const std::string& name, const json& j) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  write_file(c, name, text);
}

std::vector<std::vector<double>> axis_grid(int d, double lo, double hi, int points) {
  return regular_grid(d, lo, hi, points);
}

std::string curve_csv(const LambdaCurve& curve) {
  std::string out = "u,log_lambda";
  if (curve.restricted_log_lambda) out += ",log_lambda_recurrent";
  out += "\n";
  for (std::size_t k = 0; k < curve.u.size(); ++k) {
    for (std::size_t i = 0; i < curve.u[k].size(); ++i) out += (i ? ";" : "") + fmt(curve.u[k][i]);
    out += "," + fmt(curve.log_lambda[k]);
    if (curve.restricted_log_lambda) out += "," + fmt((*curve.restricted_log_lambda)[k]);
    out += "\n";
  }
  return out;
}

std::string rate_csv(const RateFunctionTable& t) {
  std::string out = "x,rate\n";
  for (std::size_t k = 0; k < t.x_grid.size(); ++k) {
    for (std::size_t i = 0; i < t.x_grid[k].size(); ++i) out += (i ? ";" : "") + fmt(t.x_grid[k][i]);
    out += "," + fmt(t.rate[k]) + "\n";
  }
  return out;
}

json rate_summary(const RateFunctionTable& t) {
  json j;
  j["upper_bound_only"] = t.upper_bound_only;
  j["kinks"] = kinks_to_json(t.kinks);
  auto rows = json::array();
  for (std::size_t k = 0; k < t.x_grid.size(); ++k)
    rows.push_back({{"x", t.x_grid[k]}, {"rate", real_to_json(t.rate[k])},
                    {"maximizer", t.maximizer[k]}});
  j["rate"] = std::move(rows);
  return j;
}

RateFunctionTable compute_rate(const KrausModel& model, const Grids& g) {
  RateOptions opt;
  opt.u_min = g.u_min;
  opt.u_max = g.u_max;
  opt.u_points = g.u_points;
  opt.cap = g.cap;
  opt.max_extensions = g.max_extensions;
  return rate_function(model, axis_grid(model.lattice_dim(), g.x_min, g.x_max, g.x_points), opt);
}

/// Drift and covariance: the generic formulas when the invariant state is
/// unique, otherwise the explicit C^2 parameters for the given initial state.
std::pair<json, std::pair<RealVector, RealMatrix>> moments(const KrausModel& model,
                                                           const LatticeState& initial) {
  try {
    auto stats = asymptotic_stats(model);
    json j = to_json(stats);
    j["method"] = "invariant_state";
    return {j, {stats.m, stats.C}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::multiplicity || model.internal_dim() != 2) throw;
    auto p = c2_parameters(model, initial);
    json j = to_json(p);
    j["method"] = "c2_parameters";
    return {j, {p.m, p.C}};
  }
}

int cmd_validate(const Common& c) {
  KrausModel model = [&] {
    if (!c.model_path.empty()) {
      // Parse without the stochasticity gate so the residual can be reported.
      return model_from_json(detail::parse_document(c.model_path));
    }
    if (c.builtin_name.empty()) fail(ErrorKind::schema, "give exactly one of --model or --builtin");
    return builtin(c.builtin_name, c.p_plus);
  }();
  if (!c.model_path.empty() && !c.builtin_name.empty())
    fail(ErrorKind::schema, "give exactly one of --model or --builtin");
  const auto report = validate(model);
  const bool choi = is_completely_positive(auxiliary_map(model), c.tol_positivity);
  json j = to_json(report, choi, c.tol_stochastic);
  j["internal_dim"] = model.internal_dim();
  j["lattice_dim"] = model.lattice_dim();
  j["num_steps"] = model.num_steps();
  emit(c, "validate.json", j);
  if (!report.stochastic(c.tol_stochastic) || !choi) {
    std::cerr << "validation failed: stochasticity residual " << report.residual << "\n";
    return validation_failure;
  }
  return ok;
}

int cmd_analyze(const Common& c, std::optional<int> max_len) {
  const KrausModel model = load(c);
  const auto report = analyze_structure(model, max_len);
  json j = to_json(report);
  emit(c, "analyze.json", j);
  if (!report.l_irreducibility.method_agreement) {
    std::cerr << "irreducibility methods disagree (algebra dimension "
              << report.l_irreducibility.algebra_dimension << ", fixed space dimension "
              << report.l_irreducibility.fixed_space_dimension << ", min eigenvalue "
              << report.l_irreducibility.fixed_state_min_eigenvalue << ")\n";
    return indeterminate;
  }
  return ok;
}

int cmd_asymptotics(const Common& c, const Grids& g) {
  const KrausModel model = load(c);
  const LatticeState initial = initial_state(c, model);
  auto [stats, _] = moments(model, initial);
  const auto curve = lambda_curve(model, axis_grid(model.lattice_dim(), g.u_min, g.u_max, g.u_points));
  const auto table = compute_rate(model, g);
  json j;
  j["stats"] = stats;
  j["upper_bound_only"] = table.upper_bound_only;
  j["kinks"] = kinks_to_json(curve.kinks);
  j["rate"] = rate_summary(table)["rate"];
  emit(c, "asymptotics.json", j);
  write_file(c, "lambda_curve.csv", curve_csv(curve));
  write_file(c, "rate.csv", rate_csv(table));
  return ok;
}

int cmd_rate(const Common& c, const Grids& g) {
  const KrausModel model = load(c);
  const auto table = compute_rate(model, g);
  emit(c, "rate.json", rate_summary(table));
  write_file(c, "rate.csv", rate_csv(table));
  return ok;
}

int cmd_simulate(const Common& c, BatchOptions opt) {
  const KrausModel model = load(c);
  const LatticeState initial = initial_state(c, model);
  auto [theory, mc] = moments(model, initial);
  const auto stats = batch_statistics(model, initial, mc.first, mc.second, opt);
  const int d = model.lattice_dim();
  std::string csv = "index,seed";
  for (int i = 0; i < d; ++i) csv += ",x_final_" + std::to_string(i);
  for (int i = 0; i < d; ++i) csv += ",standardized_" + std::to_string(i);
  csv += "\n";
  for (std::size_t k = 0; k < stats.finals.size(); ++k) {
    csv += std::to_string(k) + "," + std::to_string(stats.seeds[k]);
    for (auto x : stats.finals[k]) csv += "," + std::to_string(x);
    for (int i = 0; i < d; ++i) csv += "," + fmt(stats.standardized(static_cast<Index>(k), i));
    csv += "\n";
  }
  write_file(c, "batch.csv", csv);
  json j;
  j["horizon"] = opt.horizon;
  j["count"] = opt.count;
  j["seed"] = opt.seed;
  j["empirical_mean"] = vector_to_json(stats.mean);
  j["empirical_variance"] = real_matrix_to_json(stats.variance);
  j["theoretical"] = theory;
  j["standardized_mean"] = vector_to_json(stats.standardized_mean);
  j["ks_distance"] = stats.ks_distance;
  auto finals = json::array();
  if (stats.finals.size() <= 20)
    for (const auto& f : stats.finals) finals.push_back(f);
  j["finals"] = finals;
  emit(c, "summary.json", j);
  return ok;
}

int cmd_oracle(const Common& c, long horizon, const std::vector<double>& us) {
  const KrausModel model = load(c);
  const LatticeState initial = initial_state(c, model);
  json j;
  j["horizon"] = horizon;
  bool agree = true;
  auto checks = json::array();
  for (double u : us) {
    const std::vector<double> uv(static_cast<std::size_t>(model.lattice_dim()), u);
    const auto r = mgf_check(model, initial, horizon, uv);
    agree = agree && r.relative_difference() <= 1e-10;
    checks.push_back({{"u", u},
                      {"path_sum", r.path_sum},
                      {"superop_value", r.superop_value},
                      {"relative_difference", r.relative_difference()}});
  }
  j["mgf"] = std::move(checks);
  const auto exact = exact_distribution(model, initial, horizon);
  j["exact_total_variation"] = exact.self_check_tv;
  auto masses = json::array();
  for (const auto& [site, mass] : exact.masses)
    masses.push_back({{"site", site}, {"probability", mass.probability}});
  j["masses"] = std::move(masses);
  j["agree"] = agree;
  emit(c, "oracle.json", j);
  return agree ? ok : failure;
}

/// `--p` is spelled `--p-plus` internally: CLI11 treats `-p` and `--p` as
/// the same name, and `-p` is the oracle horizon.
std::vector<std::string> normalize_args(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) {
    std::string a = argv[i];
    if (a == "--p") a = "--p-plus";
    else if (a.rfind("--p=", 0) == 0) a = "--p-plus=" + a.substr(4);
    args.push_back(a);
  }
  return args;  // reversed, as CLI::App::parse(vector) expects
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open quantum random walks: structure, asymptotics, simulation"};
  app.require_subcommand(1);

  Common common;
  Grids grids;
  std::optional<int> max_len;
  BatchOptions batch;
  long oracle_horizon = 6;
  std::vector<double> oracle_u{0.0};

  auto* validate_cmd = app.add_subcommand("validate", "Check stochasticity, H1, H2, Choi positivity");
  add_common(validate_cmd, common);
  auto* analyze_cmd = app.add_subcommand("analyze", "Irreducibility, period, decomposition, classifiers");
  add_common(analyze_cmd, common);
  analyze_cmd->add_option("--max-len", max_len, "Longest return path for the lattice-map test");
  auto* asym_cmd = app.add_subcommand("asymptotics", "Drift, covariance, log-lambda curve and rate");
  add_common(asym_cmd, common);
  add_grids(asym_cmd, grids, true);
  auto* rate_cmd = app.add_subcommand("rate", "Rate function table");
  add_common(rate_cmd, common);
  add_grids(rate_cmd, grids, true);
  auto* sim_cmd = app.add_subcommand("simulate", "Batch of seeded trajectories");
  add_common(sim_cmd, common);
  sim_cmd->add_option("-P,--horizon", batch.horizon, "Steps per trajectory")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("-N,--count", batch.count, "Number of trajectories")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", batch.seed, "Master seed");
  sim_cmd->add_option("--threads", batch.threads, "Worker threads (0: all cores)");
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Exact distribution and MGF identity");
  add_common(oracle_cmd, common);
  oracle_cmd->add_option("-p,--horizon", oracle_horizon, "Horizon")->check(CLI::NonNegativeNumber);
  oracle_cmd->add_option("-u", oracle_u, "Tilt parameter(s)");

  try {
    app.parse(normalize_args(argc, argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return parse_error;
  }

  const auto start = std::chrono::steady_clock::now();
  int code = ok;
  try {
    if (*validate_cmd) code = cmd_validate(common);
    else if (*analyze_cmd) code = cmd_analyze(common, max_len);
    else if (*asym_cmd) code = cmd_asymptotics(common, grids);
    else if (*rate_cmd) code = cmd_rate(common, grids);
    else if (*sim_cmd) code = cmd_simulate(common, batch);
    else if (*oracle_cmd) code = cmd_oracle(common, oracle_horizon, oracle_u);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    code = exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    code = parse_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = failure;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "elapsed " << elapsed << " s\n";
  return code;
}
