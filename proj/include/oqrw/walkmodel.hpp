#pragma once

// Homogeneous open quantum random walk models on Z^d: one Kraus operator per
// lattice displacement, plus density matrices and finitely supported lattice
// states.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oqrw/numerics.hpp"

namespace oqrw {

using LatticePoint = std::vector<std::int64_t>;

inline LatticePoint operator+(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

inline double dot(std::span<const double> u, const LatticePoint& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += u[i] * static_cast<double>(s[i]);
  return acc;
}

inline std::string to_string(const LatticePoint& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(p[i]);
  }
  return out + ")";
}

/// Finite set of distinct displacements in Z^d, at least one nonzero.
class StepSet {
 public:
  StepSet(int lattice_dim, std::vector<LatticePoint> steps)
      : lattice_dim_(lattice_dim), steps_(std::move(steps)) {
    if (lattice_dim_ < 1) fail(ErrorKind::schema, "lattice dimension must be positive");
    if (steps_.empty()) fail(ErrorKind::schema, "step set is empty");
    bool nonzero = false;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      if (steps_[i].size() != static_cast<std::size_t>(lattice_dim_))
        fail(ErrorKind::schema, "step " + std::to_string(i) + " has " +
                                    std::to_string(steps_[i].size()) +
                                    " coordinates, expected " + std::to_string(lattice_dim_));
      for (auto c : steps_[i]) nonzero = nonzero || c != 0;
      for (std::size_t j = 0; j < i; ++j)
        if (steps_[j] == steps_[i])
          fail(ErrorKind::schema, "duplicate displacement " + oqrw::to_string(steps_[i]));
    }
    if (!nonzero) fail(ErrorKind::schema, "step set must contain a nonzero displacement");
  }

  int lattice_dim() const { return lattice_dim_; }
  std::size_t size() const { return steps_.size(); }
  const LatticePoint& operator[](std::size_t i) const { return steps_[i]; }
  const std::vector<LatticePoint>& steps() const { return steps_; }

  std::optional<std::size_t> find(const LatticePoint& s) const {
    for (std::size_t i = 0; i < steps_.size(); ++i)
      if (steps_[i] == s) return i;
    return std::nullopt;
  }

 private:
  int lattice_dim_;
  std::vector<LatticePoint> steps_;
};

/// Step set plus one n x n operator L_s per step. Shapes are checked on
/// construction; stochasticity is checked by `validate`.
class KrausModel {
 public:
  KrausModel(StepSet steps, std::vector<ComplexMatrix> operators)
      : steps_(std::move(steps)), operators_(std::move(operators)) {
    if (operators_.size() != steps_.size())
      fail(ErrorKind::schema, std::to_string(operators_.size()) + " operators for " +
                                  std::to_string(steps_.size()) + " steps");
    internal_dim_ = operators_.front().rows();
    for (std::size_t i = 0; i < operators_.size(); ++i) {
      const auto& op = operators_[i];
      if (op.rows() != internal_dim_ || op.cols() != internal_dim_ || internal_dim_ == 0)
        fail(ErrorKind::schema, "operator for step " + oqrw::to_string(steps_[i]) + " is " +
                                    describe_shape(op) + ", expected " +
                                    std::to_string(internal_dim_) + "x" +
                                    std::to_string(internal_dim_));
      require_finite(op, "operator for step " + oqrw::to_string(steps_[i]));
    }
  }

  const StepSet& steps() const { return steps_; }
  std::size_t num_steps() const { return steps_.size(); }
  int lattice_dim() const { return steps_.lattice_dim(); }
  Index internal_dim() const { return internal_dim_; }
  const std::vector<ComplexMatrix>& operators() const { return operators_; }
  const ComplexMatrix& op(std::size_t i) const { return operators_[i]; }
  const LatticePoint& step(std::size_t i) const { return steps_[i]; }

 private:
  StepSet steps_;
  std::vector<ComplexMatrix> operators_;
  Index internal_dim_ = 0;
};

/// Unit-trace positive semidefinite matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    require_square(matrix_, "density matrix");
    require_finite(matrix_, "density matrix");
    const double scale = std::max(1.0, matrix_.norm());
    if ((matrix_ - matrix_.adjoint()).norm() > 1e-12 * scale)
      fail(ErrorKind::contract, "density matrix is not Hermitian");
    matrix_ = hermitian_part(matrix_);
    const double lowest = min_hermitian_eigenvalue(matrix_);
    if (lowest < -1e-10) {
      std::ostringstream os;
      os << "density matrix has negative eigenvalue " << lowest;
      fail(ErrorKind::contract, os.str());
    }
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "density matrix has trace " << tr;
      fail(ErrorKind::contract, os.str());
    }
  }

  static DensityMatrix maximally_mixed(Index n) {
    return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(n));
  }

  static DensityMatrix pure(const ComplexVector& psi) {
    const ComplexVector v = psi.normalized();
    return DensityMatrix(v * v.adjoint());
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
};

/// Finitely supported block-diagonal lattice state sum_i rho(i) (x) |i><i|.
/// Blocks are unnormalized; a valid state has total trace one (see
/// `validate_lattice_state`). An empty support is representable.
struct LatticeState {
  Index internal_dim = 0;
  std::map<LatticePoint, ComplexMatrix> sites;

  static LatticeState localized(const LatticePoint& at, const DensityMatrix& rho) {
    LatticeState s;
    s.internal_dim = rho.dim();
    s.sites.emplace(at, rho.matrix());
    return s;
  }

  double total_trace() const {
    double acc = 0.0;
    for (const auto& [_, block] : sites) acc += block.trace().real();
    return acc;
  }
};

inline void validate_lattice_state(const LatticeState& state, Index internal_dim,
                                   int lattice_dim) {
  if (state.internal_dim != internal_dim)
    fail(ErrorKind::dimension, "lattice state internal dimension " +
                                   std::to_string(state.internal_dim) + " does not match " +
                                   std::to_string(internal_dim));
  for (const auto& [site, block] : state.sites) {
    if (site.size() != static_cast<std::size_t>(lattice_dim))
      fail(ErrorKind::dimension, "site " + to_string(site) + " has wrong lattice dimension");
    if (block.rows() != internal_dim || block.cols() != internal_dim)
      fail(ErrorKind::dimension, "block at " + to_string(site) + " is " + describe_shape(block));
    const double lowest = min_hermitian_eigenvalue(block);
    if ((block - block.adjoint()).norm() > 1e-10 || lowest < -1e-10)
      fail(ErrorKind::contract, "block at " + to_string(site) + " is not positive semidefinite");
  }
  const double total = state.total_trace();
  if (std::abs(total - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "lattice state has total trace " << total;
    fail(ErrorKind::contract, os.str());
  }
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  double residual = 0.0;
  bool h1_holds = false;
  bool h2_holds = false;

  bool stochastic(double tol = 1e-10) const { return residual <= tol; }
};

inline ValidationReport validate(const KrausModel& model) {
  const Index n = model.internal_dim();
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  ComplexMatrix ranges(n, n * static_cast<Index>(model.num_steps()));
  bool non_scalar = false;
  for (std::size_t i = 0; i < model.num_steps(); ++i) {
    const auto& l = model.op(i);
    sum += l.adjoint() * l;
    ranges.middleCols(static_cast<Index>(i) * n, n) = l;
    const Complex mean = l.trace() / static_cast<double>(n);
    if ((l - mean * ComplexMatrix::Identity(n, n)).norm() > 1e-10) non_scalar = true;
  }
  ValidationReport report;
  report.residual = (sum - ComplexMatrix::Identity(n, n)).norm();
  report.h1_holds = numerical_rank(ranges, 1e-10) == n;
  report.h2_holds = non_scalar;
  return report;
}

inline void require_stochastic(const KrausModel& model, double tol = 1e-10) {
  const auto report = validate(model);
  if (!report.stochastic(tol)) {
    std::ostringstream os;
    os << "stochasticity residual ||sum L*L - Id||_F = " << report.residual << " exceeds " << tol;
    fail(ErrorKind::validation, os.str());
  }
}

// ---------------------------------------------------------------------------
// Built-in models

inline std::vector<std::string> builtin_names() {
  return {"std_example", "periodic_example", "breakdown_example", "antidiag_example",
          "classical_dilation"};
}

namespace detail {

inline KrausModel one_dim_pm(ComplexMatrix plus, ComplexMatrix minus) {
  return KrausModel(StepSet(1, {{1}, {-1}}), {std::move(plus), std::move(minus)});
}

inline ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace detail

/// Built-in models by name. `classical_dilation` takes the probability of a
/// +1 step, either as `p_plus` or written inline as `classical_dilation(0.3)`.
inline KrausModel builtin(std::string_view name, std::optional<double> p_plus = std::nullopt) {
  std::string key(name);
  if (auto open = key.find('('); open != std::string::npos && key.back() == ')') {
    p_plus = std::stod(key.substr(open + 1, key.size() - open - 2));
    key = key.substr(0, open);
  }
  const double r2 = std::sqrt(2.0);
  const double r3 = std::sqrt(3.0);
  if (key == "std_example") {
    return detail::one_dim_pm(detail::mat2(1, 1, 0, 1) / r3, detail::mat2(1, 0, -1, 1) / r3);
  }
  if (key == "periodic_example") {
    return detail::one_dim_pm(detail::mat2(0, r3 / 2, 1 / r2, 0), detail::mat2(0, 0.5, 1 / r2, 0));
  }
  if (key == "breakdown_example") {
    return detail::one_dim_pm(detail::mat2(1 / r2, 1 / (2 * r2), 0, r3 / 2),
                              detail::mat2(1 / r2, -1 / (2 * r2), 0, 0));
  }
  if (key == "antidiag_example") {
    return detail::one_dim_pm(detail::mat2(0, 0.6, 0.8, 0), detail::mat2(0, 0.8, 0.6, 0));
  }
  if (key == "classical_dilation") {
    const double p = p_plus.value_or(0.5);
    if (!(p >= 0.0 && p <= 1.0))
      fail(ErrorKind::lookup, "classical_dilation probability must lie in [0, 1]");
    ComplexMatrix plus(1, 1), minus(1, 1);
    plus(0, 0) = std::sqrt(p);
    minus(0, 0) = std::sqrt(1.0 - p);
    return detail::one_dim_pm(plus, minus);
  }
  std::string valid;
  for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  fail(ErrorKind::lookup, "unknown builtin model '" + std::string(name) + "'; valid names: " + valid);
}

// ---------------------------------------------------------------------------
// JSON documents

namespace detail {

inline ComplexMatrix matrix_from_json(const nlohmann::json& rows, Index n, const std::string& where) {
  if (!rows.is_array())
    fail(ErrorKind::schema, where + ": matrix must be an array of rows");
  if (static_cast<Index>(rows.size()) != n)
    fail(ErrorKind::schema, where + ": matrix has " + std::to_string(rows.size()) +
                                " rows, expected " + std::to_string(n));
  ComplexMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      fail(ErrorKind::schema, where + ": row " + std::to_string(i) + " has " +
                                  std::to_string(row.is_array() ? row.size() : 0) +
                                  " entries, expected " + std::to_string(n));
    for (Index j = 0; j < n; ++j) {
      const auto& e = row[static_cast<std::size_t>(j)];
      const std::string at = where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      if (!e.is_object() || !e.contains("re") || !e.contains("im") || !e["re"].is_number() ||
          !e["im"].is_number())
        fail(ErrorKind::schema, at + ": entry must be {\"re\": number, \"im\": number}");
      m(i, j) = Complex(e["re"].get<double>(), e["im"].get<double>());
    }
  }
  return m;
}

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back({{"re", m(i, j).real()}, {"im", m(i, j).imag()}});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline LatticePoint point_from_json(const nlohmann::json& j, int d, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    fail(ErrorKind::schema, where + ": expected an integer array of length " + std::to_string(d));
  LatticePoint p;
  for (const auto& c : j) {
    if (!c.is_number_integer()) fail(ErrorKind::schema, where + ": coordinates must be integers");
    p.push_back(c.get<std::int64_t>());
  }
  return p;
}

inline nlohmann::json parse_document(std::string_view path_or_text) {
  std::string text;
  const auto first = path_or_text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && path_or_text[first] == '{') {
    text = std::string(path_or_text);
  } else {
    std::ifstream in{std::string(path_or_text)};
    if (!in) fail(ErrorKind::schema, "cannot open document '" + std::string(path_or_text) + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::schema, std::string("malformed JSON: ") + e.what());
  }
}

inline int require_positive_int(const nlohmann::json& doc, const char* field) {
  if (!doc.contains(field) || !doc[field].is_number_integer() || doc[field].get<int>() < 1)
    fail(ErrorKind::schema, std::string("field '") + field + "' must be a positive integer");
  return doc[field].get<int>();
}

}  // namespace detail

inline nlohmann::json model_to_json(const KrausModel& model) {
  nlohmann::json doc;
  doc["lattice_dim"] = model.lattice_dim();
  doc["internal_dim"] = model.internal_dim();
  auto steps = nlohmann::json::array();
  for (std::size_t i = 0; i < model.num_steps(); ++i)
    steps.push_back({{"displacement", model.step(i)}, {"matrix", detail::matrix_to_json(model.op(i))}});
  doc["steps"] = std::move(steps);
  return doc;
}

/// Parses a model document without checking stochasticity.
inline KrausModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorKind::schema, "model document must be a JSON object");
  const int d = detail::require_positive_int(doc, "lattice_dim");
  const int n = detail::require_positive_int(doc, "internal_dim");
  if (!doc.contains("steps") || !doc["steps"].is_array() || doc["steps"].empty())
    fail(ErrorKind::schema, "field 'steps' must be a nonempty array");
  std::vector<LatticePoint> displacements;
  std::vector<ComplexMatrix> ops;
  for (std::size_t k = 0; k < doc["steps"].size(); ++k) {
    const auto& step = doc["steps"][k];
    const std::string where = "steps[" + std::to_string(k) + "]";
    if (!step.is_object() || !step.contains("displacement") || !step.contains("matrix"))
      fail(ErrorKind::schema, where + ": needs 'displacement' and 'matrix'");
    displacements.push_back(detail::point_from_json(step["displacement"], d, where + ".displacement"));
    ops.push_back(detail::matrix_from_json(step["matrix"], n,
                                           where + " (displacement " +
                                               to_string(displacements.back()) + ").matrix"));
  }
  return KrausModel(StepSet(d, std::move(displacements)), std::move(ops));
}

/// Loads a model from a path or inline JSON text and validates stochasticity.
inline KrausModel load_model(std::string_view path_or_text, double tol = 1e-10) {
  KrausModel model = model_from_json(detail::parse_document(path_or_text));
  require_stochastic(model, tol);
  return model;
}

inline nlohmann::json lattice_state_to_json(const LatticeState& state) {
  auto sites = nlohmann::json::array();
  for (const auto& [pos, block] : state.sites)
    sites.push_back({{"position", pos}, {"block", detail::matrix_to_json(block)}});
  return {{"sites", sites}};
}

inline LatticeState lattice_state_from_json(const nlohmann::json& doc, Index internal_dim,
                                            int lattice_dim) {
  if (!doc.is_object() || !doc.contains("sites") || !doc["sites"].is_array())
    fail(ErrorKind::schema, "initial-state document needs a 'sites' array");
  LatticeState state;
  state.internal_dim = internal_dim;
  for (std::size_t k = 0; k < doc["sites"].size(); ++k) {
    const auto& site = doc["sites"][k];
    const std::string where = "sites[" + std::to_string(k) + "]";
    if (!site.is_object() || !site.contains("position") || !site.contains("block"))
      fail(ErrorKind::schema, where + ": needs 'position' and 'block'");
    auto pos = detail::point_from_json(site["position"], lattice_dim, where + ".position");
    auto block = detail::matrix_from_json(site["block"], internal_dim, where + ".block");
    auto [it, inserted] = state.sites.emplace(pos, block);
    if (!inserted) it->second += block;
  }
  validate_lattice_state(state, internal_dim, lattice_dim);
  return state;
}

inline LatticeState load_initial_state(std::string_view path_or_text, const KrausModel& model) {
  return lattice_state_from_json(detail::parse_document(path_or_text), model.internal_dim(),
                                 model.lattice_dim());
}

/// delta_0 (x) Id/n.
inline LatticeState default_initial_state(const KrausModel& model) {
  return LatticeState::localized(LatticePoint(static_cast<std::size_t>(model.lattice_dim()), 0),
                                 DensityMatrix::maximally_mixed(model.internal_dim()));
}

}  // namespace oqrw
