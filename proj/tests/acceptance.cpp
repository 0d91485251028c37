// Acceptance runner: one PASS/FAIL line per criterion. With an argument N
// only criterion N runs; the exit status is nonzero iff a criterion failed.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

namespace {

using namespace oqrw;
using namespace oqrw::testing;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1. Standard example.
void criterion1(Outcome& o) {
  const auto model = builtin("std_example");
  const auto stats = asymptotic_stats(model);
  ComplexMatrix eta(2, 2);
  eta << 5, 2, 2, -5;
  eta /= 12.0;
  const double eta_err = (stats.eta_basis[0] - eta).cwiseAbs().maxCoeff();
  double lambda_err = 0.0;
  for (double u : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0})
    lambda_err = std::max(lambda_err, rel(lambda(model, std::vector<double>{u}), std_example_lambda(u)));
  o.check(std::abs(stats.m(0)) <= 1e-10, "m");
  o.check(std::abs(stats.C(0, 0) - 8.0 / 9.0) <= 1e-9, "C");
  o.check(eta_err <= 1e-9, "eta");
  o.check(lambda_err <= 1e-9, "lambda_u");
  o.detail << " m=" << stats.m(0) << " C-8/9=" << stats.C(0, 0) - 8.0 / 9.0
           << " eta_err=" << eta_err << " lambda_rel_err=" << lambda_err;
}

// 2. Periodic example.
void criterion2(Outcome& o) {
  const auto model = builtin("periodic_example");
  const auto per = period(model);
  o.check(per.d == 2, "period");
  if (per.d == 2) {
    ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    o.check((per.projections[0] - p0).norm() <= 1e-9 && (per.projections[1] - p1).norm() <= 1e-9,
            "projections");
  }
  const auto stats = asymptotic_stats(model);
  o.check(std::abs(stats.m(0) - 0.25) <= 1e-9, "m");
  o.check(std::abs(stats.C(0, 0) - 0.875) <= 1e-9, "C");
  const auto table = rate_function(model, {{0.0}, {0.25}, {0.5}});
  double rate_err = 0.0;
  const double ts[] = {0.0, 0.25, 0.5};
  for (int k = 0; k < 3; ++k) rate_err = std::max(rate_err, std::abs(table.rate[static_cast<std::size_t>(k)] - periodic_rate(ts[k])));
  o.check(rate_err <= 1e-6, "rate");
  o.detail << " d=" << per.d << " m=" << stats.m(0) << " C=" << stats.C(0, 0)
           << " rate_err=" << rate_err;
}

// 3. Breakdown example.
void criterion3(Outcome& o) {
  const auto model = builtin("breakdown_example");
  const auto cls = classify_c2(model);
  o.check(cls.situation == 2, "situation");
  const auto bn = bn_decomposition(model);
  const bool r_is_e1 = bn.r_basis.cols() == 1 && std::abs(std::abs(bn.r_basis(0, 0)) - 1.0) <= 1e-9;
  o.check(r_is_e1, "R = C e1");

  const auto grid = regular_grid(1, -2.0, 2.0, 41);
  double lambda_err = 0.0;
  for (const auto& u : grid)
    lambda_err = std::max(lambda_err, rel(lambda(model, u), breakdown_lambda(u[0])));
  o.check(lambda_err <= 1e-9, "lambda_u");

  const auto curve = lambda_curve(model, grid);
  const double u0 = 0.5 * std::log(2.0);
  bool kink_ok = false;
  for (const auto& k : curve.kinks)
    kink_ok = kink_ok || (std::abs(k.u - u0) <= 1e-4 &&
                          std::abs(k.lambda_left_slope - std::sqrt(2.0) / 4) <= 1e-3 &&
                          std::abs(k.lambda_right_slope - 3 * std::sqrt(2.0) / 4) <= 1e-3);
  o.check(kink_ok, "kink");

  const auto start = localized_pure(model, 1);
  double printed_err = 0.0, corrected_err = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const auto ex = exact_distribution(model, start, n);
    const auto it = ex.masses.find(LatticePoint{n});
    const double mass = it == ex.masses.end() ? 0.0 : it->second.probability;
    printed_err = std::max(printed_err, std::abs(mass - breakdown_top_mass_printed(n)));
    corrected_err = std::max(corrected_err, std::abs(mass - breakdown_top_mass_corrected(n)));
  }
  o.check(printed_err <= 1e-10, "P(X_n=n) printed closed form");
  o.detail << " lambda_rel_err=" << lambda_err;
  if (!curve.kinks.empty())
    o.detail << " kink_u=" << curve.kinks[0].u << " slopes=" << curve.kinks[0].lambda_left_slope
             << "," << curve.kinks[0].lambda_right_slope;
  o.detail << " P(X_n=n) max_err_vs_printed=" << printed_err
           << " max_err_vs_squared_form=" << corrected_err;
}

/// Exact E[X_P - X_0] from the auxiliary map (one-dimensional lattice).
double exact_mean_displacement(const KrausModel& model, const LatticeState& initial, long horizon) {
  ComplexMatrix rho = ComplexMatrix::Zero(model.internal_dim(), model.internal_dim());
  for (const auto& [_, block] : initial.sites) rho += block;
  double total = 0.0;
  for (long p = 0; p < horizon; ++p) {
    for (std::size_t k = 0; k < model.num_steps(); ++k)
      total += static_cast<double>(model.step(k)[0]) *
               (model.op(k) * rho * model.op(k).adjoint()).trace().real();
    rho = apply_L(model, rho);
  }
  return total;
}

// 4. CLT at desk scale.
void criterion4(Outcome& o) {
  const long horizon = 1000;
  const std::size_t count = 10000;
  const double mean_tol = 4.0 / std::sqrt(static_cast<double>(count));
  for (const char* name : {"std_example", "periodic_example", "breakdown_example"}) {
    const auto model = builtin(name);
    const auto initial = default_initial_state(model);
    const auto params = c2_parameters(model, initial);
    const auto stats =
        batch_statistics(model, initial, params.m, params.C, {horizon, count, 20240611ULL, 0});
    const double zmean = stats.standardized_mean(0);
    const double bias = (exact_mean_displacement(model, initial, horizon) -
                         static_cast<double>(horizon) * params.m(0)) /
                        std::sqrt(static_cast<double>(horizon) * params.C(0, 0));
    o.check(std::abs(zmean) <= mean_tol, std::string(name) + " mean");
    o.check(stats.ks_distance <= 0.05, std::string(name) + " KS");
    o.detail << " " << name << ": mean=" << zmean << " (exact " << bias << ", tol " << mean_tol
             << ") KS=" << stats.ks_distance;
  }
}

// 5. Oracles.
void criterion5(Outcome& o) {
  double mgf_err = 0.0, tv = 0.0;
  const auto models = all_builtins();
  for (const auto& model : models) {
    const auto initial = default_initial_state(model);
    for (long p = 0; p <= 8; ++p)
      for (double u : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const std::vector<double> uv(static_cast<std::size_t>(model.lattice_dim()), u);
        mgf_err = std::max(mgf_err, mgf_check(model, initial, p, uv).relative_difference());
      }
    for (long p = 0; p <= 10; ++p) {
      try {
        tv = std::max(tv, exact_distribution(model, initial, p).self_check_tv);
      } catch (const Error& e) {
        o.check(false, e.what());
      }
    }
  }
  o.check(mgf_err <= 1e-10, "mgf");
  o.check(tv <= 1e-10, "exact tv");
  o.detail << " models=" << models.size() << " mgf_max_rel_diff=" << mgf_err
           << " exact_max_tv=" << tv;
}

// 6. Structure cross-validation on random C^2 models.
void criterion6(Outcome& o) {
  int contradictions = 0, disagreements = 0, even_period_violations = 0, inconclusive = 0;
  int reducible = 0, periodic = 0, errors = 0;
  const C2Family families[] = {C2Family::generic, C2Family::upper_triangular, C2Family::diagonal,
                               C2Family::antidiagonal};
  for (int k = 0; k < 100; ++k) {
    const auto model = random_c2_model(families[k % 4], 0xc2c2ULL + static_cast<std::uint64_t>(k));
    try {
      const auto classifier = c2_m_classifier(model);
      const auto paths = is_irreducible_M(model, 10);
      if (paths.verdict == MVerdict::inconclusive) ++inconclusive;
      if (paths.verdict != MVerdict::inconclusive &&
          (paths.verdict == MVerdict::irreducible) != classifier.m_irreducible)
        ++contradictions;
      if (!classifier.m_irreducible) ++reducible;
      const auto irr = is_irreducible_L(model);
      if (!irr.method_agreement) ++disagreements;
      if (irr.verdict && irr.method_agreement) {
        const auto per = period(model);
        if (per.d % 2 == 0) {
          ++periodic;
          if (classifier.m_irreducible || paths.verdict == MVerdict::irreducible)
            ++even_period_violations;
        }
      }
    } catch (const Error& e) {
      ++errors;
      o.detail << " [model " << k << ": " << e.what() << "]";
    }
  }
  o.check(contradictions == 0, "classifier vs return paths");
  o.check(disagreements == 0, "methods A/B");
  o.check(even_period_violations == 0, "even period implies M reducible");
  o.check(errors == 0, "errors");
  o.detail << " contradictions=" << contradictions << " A/B_disagreements=" << disagreements
           << " even_period_violations=" << even_period_violations << " (M-reducible=" << reducible
           << ", even-period=" << periodic << ", inconclusive=" << inconclusive << ")";
}

// 7. Dual covariance formulas.
void criterion7(Outcome& o) {
  double worst = 0.0;
  auto models = all_builtins();
  for (int k = 0; k < 20; ++k)
    models.push_back(random_c2_model(C2Family::generic, 0x7007ULL + static_cast<std::uint64_t>(k)));
  for (const auto& model : models) {
    const auto rho = invariant_state(model);
    worst = std::max(worst, (covariance(model, rho) - covariance_dual(model, rho)).cwiseAbs().maxCoeff());
  }
  o.check(worst <= 1e-9, "dual covariance");
  o.detail << " models=" << models.size() << " max_entry_diff=" << worst;
}

// 8. Property suite on every builtin.
void criterion8(Outcome& o) {
  const auto models = all_builtins();
  const auto labels = all_builtin_labels();
  CounterRng rng(0x8888ULL);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& model = models[i];
    const std::string& name = labels[i];
    const Index n = model.internal_dim();
    ComplexMatrix x = gaussian_matrix(n, n, rng);
    x = x * x.adjoint();
    x /= x.trace().real();
    o.check(std::abs(apply_L(model, x).trace().real() - 1.0) <= 1e-12, name + " trace");
    o.check(is_completely_positive(auxiliary_map(model)), name + " Choi");
    const std::vector<double> zero{0.0};
    o.check(std::abs(lambda(model, zero) - 1.0) <= 1e-10, name + " lambda_0");

    const auto grid = regular_grid(1, -3.0, 3.0, 61);
    const auto curve = lambda_curve(model, grid);
    double worst_second_diff = 0.0;
    for (std::size_t k = 1; k + 1 < grid.size(); ++k)
      worst_second_diff = std::min(worst_second_diff, curve.log_lambda[k - 1] - 2 * curve.log_lambda[k] +
                                                          curve.log_lambda[k + 1]);
    o.check(worst_second_diff >= -1e-8, name + " convexity");

    const auto rho = invariant_state(model);
    const double m = drift(model, rho)(0);
    const auto table = rate_function(model, {{m}});
    o.check(table.rate[0] <= 1e-6, name + " I(m)");

    const std::vector<double> unit{1.0};
    const auto der = lambda_derivatives(model, rho, unit);
    const double h = 1e-4;
    const double fp = lambda(model, std::vector<double>{h}), fm = lambda(model, std::vector<double>{-h});
    const double f0 = lambda(model, zero);
    const double d1 = (fp - fm) / (2 * h), d2 = (fp - 2 * f0 + fm) / (h * h);
    const double e1 = std::abs(d1 - der.first) / std::max(1.0, std::abs(der.first));
    const double e2 = std::abs(d2 - der.second) / std::max(1.0, std::abs(der.second));
    o.check(e1 <= 1e-5 && e2 <= 1e-5, name + " finite differences");
    o.detail << " " << name << ":I(m)=" << table.rate[0] << ",fd=" << std::max(e1, e2);
  }
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* title;
    std::function<void(Outcome&)> run;
    double seconds;  // runtime limit
  };
  const std::vector<Criterion> criteria{
      {"standard example: m, C, eta, lambda_u", criterion1, 1.0},
      {"periodic example: period, projections, m, C, rate", criterion2, 1.0},
      {"breakdown example: situation, R, lambda_u, kink, P(X_n=n)", criterion3, 1.0},
      {"CLT reproduction, N=1e4, P=1e3", criterion4, 60.0},
      {"oracle suite: MGF identity and exact distribution", criterion5, 30.0},
      {"structure cross-validation on 100 random C^2 models", criterion6, 60.0},
      {"dual covariance formulas", criterion7, 10.0},
      {"property suite on builtins", criterion8, 60.0},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].seconds) {
      o.pass = false;
      o.detail << " [fail: runtime above " << criteria[i].seconds << " s]";
    }
    std::printf("criterion %zu: %s (%.2f s) %s |%s\n", i + 1, o.pass ? "PASS" : "FAIL", secs,
                criteria[i].title, o.detail.str().c_str());
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
