#pragma once

// Structural analysis of the auxiliary map and of the lattice map:
// irreducibility (two independent methods), period and cyclic projections,
// regularity, the recurrent/decaying split of the internal space, the C^2
// classification, and irreducibility of the walk itself via return paths.

#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oqrw/algebra.hpp"
#include "oqrw/rng.hpp"
#include "oqrw/superops.hpp"

namespace oqrw {

// ---------------------------------------------------------------------------
// Irreducibility of the auxiliary map

struct IrreducibilityResult {
  bool verdict = false;
  bool method_agreement = true;
  bool algebra_full = false;      // method A
  bool unique_faithful = false;   // method B
  Index algebra_dimension = 0;
  std::size_t fixed_space_dimension = 0;
  double fixed_state_min_eigenvalue = 0.0;
};

namespace detail {

/// Counts eigenvalues equal to one; eigenvalues in the ambiguous band
/// (1e-10, 1e-8) around one are an error.
inline std::size_t count_unit_eigenvalues(const std::vector<Complex>& spectrum) {
  std::size_t count = 0;
  for (const auto& z : spectrum) {
    const double dist = std::abs(z - 1.0);
    if (dist <= 1e-10) {
      ++count;
    } else if (dist < 1e-8) {
      std::ostringstream os;
      os << "eigenvalue " << z << " lies " << dist
         << " from 1 (gap below 1e-8); review the model in exact arithmetic";
      fail(ErrorKind::indeterminate, os.str());
    }
  }
  return count;
}

}  // namespace detail

inline IrreducibilityResult is_irreducible_L(const KrausModel& model) {
  IrreducibilityResult out;
  const Index n = model.internal_dim();
  const auto closure = algebra_closure(model.operators(), true);
  out.algebra_dimension = closure.dimension();
  out.algebra_full = closure.is_full();

  const auto sys = eigendecompose(auxiliary_map(model).matrix());
  out.fixed_space_dimension = detail::count_unit_eigenvalues(sys.eigenvalues);
  if (out.fixed_space_dimension == 1) {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < sys.eigenvalues.size(); ++i)
      if (std::abs(sys.eigenvalues[i] - 1.0) < std::abs(sys.eigenvalues[idx] - 1.0)) idx = i;
    const ComplexMatrix state =
        detail::positive_representative(sys.right_eigenvectors[idx], n, "invariant state");
    out.fixed_state_min_eigenvalue = min_hermitian_eigenvalue(state);
    out.unique_faithful = out.fixed_state_min_eigenvalue > 1e-8;
  }
  out.method_agreement = out.algebra_full == out.unique_faithful;
  out.verdict = out.algebra_full;
  return out;
}

// ---------------------------------------------------------------------------
// Period

struct PeriodResult {
  int d = 1;
  std::vector<ComplexMatrix> projections;
};

/// Largest deviation from p_j L_s = L_s p_{j-1} over all j and s.
inline double cyclicity_residual(const KrausModel& model, const std::vector<ComplexMatrix>& p) {
  const std::size_t d = p.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    for (const auto& l : model.operators())
      worst = std::max(worst, (p[j] * l - l * p[(j + d - 1) % d]).norm());
  return worst;
}

inline PeriodResult period(const KrausModel& model) {
  const auto irr = is_irreducible_L(model);
  if (!irr.verdict || !irr.method_agreement)
    fail(ErrorKind::precondition, "period requires an irreducible auxiliary map");
  const Index n = model.internal_dim();
  const Superoperator aux = auxiliary_map(model);
  const auto spectrum = eigenvalues(aux.matrix());

  std::vector<Complex> peripheral;
  for (const auto& z : spectrum)
    if (std::abs(std::abs(z) - 1.0) <= 1e-8) peripheral.push_back(z);
  const int d = static_cast<int>(peripheral.size());
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (const auto& z : peripheral) {
    const double turns = std::arg(z) * d / (2 * std::numbers::pi);
    const long j = ((std::lround(turns) % d) + d) % d;
    if (std::abs(z - std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(j) / d)) > 1e-8 ||
        seen[static_cast<std::size_t>(j)]) {
      std::ostringstream os;
      os << "peripheral eigenvalue " << z << " does not fit the pattern of " << d
         << "-th roots of unity";
      fail(ErrorKind::spectral_pattern, os.str());
    }
    seen[static_cast<std::size_t>(j)] = true;
  }

  PeriodResult out;
  out.d = d;
  if (d == 1) {
    out.projections.push_back(ComplexMatrix::Identity(n, n));
    return out;
  }

  // The adjoint has an eigenvector at e^{2 pi i/d} that is a multiple of
  // sum_j e^{2 pi i j/d} p_j; its spectral projections are the p_j.
  const Complex omega = std::polar(1.0, 2 * std::numbers::pi / d);
  const auto adj = eigendecompose(aux.matrix().adjoint());
  std::size_t pick = 0;
  for (std::size_t i = 1; i < adj.eigenvalues.size(); ++i)
    if (std::abs(adj.eigenvalues[i] - omega) < std::abs(adj.eigenvalues[pick] - omega)) pick = i;
  const ComplexMatrix u = unvec(adj.right_eigenvectors[pick], n);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(u);
  const Complex ref = es.eigenvalues()(0);
  std::vector<ComplexMatrix> cluster(static_cast<std::size_t>(d), ComplexMatrix(n, 0));
  for (Index k = 0; k < n; ++k) {
    const double turns = std::arg(es.eigenvalues()(k) / ref) * d / (2 * std::numbers::pi);
    const auto j = static_cast<std::size_t>(((std::lround(turns) % d) + d) % d);
    auto& c = cluster[j];
    c.conservativeResize(Eigen::NoChange, c.cols() + 1);
    c.col(c.cols() - 1) = es.eigenvectors().col(k);
  }
  std::vector<ComplexMatrix> proj;
  for (const auto& c : cluster) {
    if (c.cols() == 0)
      fail(ErrorKind::spectral_pattern, "cyclic decomposition has an empty block");
    proj.push_back(projector(orthonormal_range(c, 1e-10)));
  }
  // Start the cycle at the block carrying most weight on the first basis vector.
  std::size_t start = 0;
  for (std::size_t j = 1; j < proj.size(); ++j)
    if (proj[j](0, 0).real() > proj[start](0, 0).real() + 1e-12) start = j;
  for (std::size_t j = 0; j < proj.size(); ++j)
    out.projections.push_back(proj[(start + j) % proj.size()]);

  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (const auto& p : out.projections) {
    if ((p * p - p).norm() > 1e-10)
      fail(ErrorKind::spectral_pattern, "cyclic projection is not idempotent");
    sum += p;
  }
  if ((sum - ComplexMatrix::Identity(n, n)).norm() > 1e-10)
    fail(ErrorKind::spectral_pattern, "cyclic projections do not sum to the identity");
  const double residual = cyclicity_residual(model, out.projections);
  if (residual > 1e-9) {
    std::ostringstream os;
    os << "cyclic projections violate p_j L_s = L_s p_{j-1} by " << residual;
    fail(ErrorKind::spectral_pattern, os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regularity

struct RegularityResult {
  bool regular = false;
  std::optional<int> n_estimate;
};

/// Regular means irreducible and aperiodic. The N estimate is a heuristic:
/// the smallest N <= 4 n^2 such that L^N maps 200 seeded random pure states,
/// plus the canonical basis states, to states with minimal eigenvalue above 1e-8.
inline RegularityResult is_regular(const KrausModel& model, std::uint64_t seed = 0x0a11ce5eedULL) {
  RegularityResult out;
  const auto irr = is_irreducible_L(model);
  out.regular = irr.verdict && irr.method_agreement && period(model).d == 1;

  const Index n = model.internal_dim();
  CounterRng rng(seed);
  std::vector<ComplexVector> probes;
  for (int k = 0; k < 200; ++k) {
    ComplexVector x(n);
    for (Index i = 0; i < n; ++i) {
      // Box-Muller pair for a complex Gaussian entry.
      const double r = std::sqrt(-2.0 * std::log1p(-rng.uniform()));
      const double t = 2 * std::numbers::pi * rng.uniform();
      x(i) = Complex(r * std::cos(t), r * std::sin(t));
    }
    probes.push_back(x.normalized());
  }
  for (Index i = 0; i < n; ++i) probes.push_back(ComplexVector::Unit(n, i));
  const ComplexMatrix aux = auxiliary_map(model).matrix();
  ComplexMatrix power = aux;
  for (int step = 1; step <= 4 * n * n; ++step) {
    bool all_faithful = true;
    for (const auto& x : probes) {
      const ComplexMatrix image = unvec(power * vec(x * x.adjoint()), n);
      if (min_hermitian_eigenvalue(image) <= 1e-8) {
        all_faithful = false;
        break;
      }
    }
    if (all_faithful) {
      out.n_estimate = step;
      break;
    }
    power = aux * power;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recurrent / decaying decomposition

struct BnDecomposition {
  ComplexMatrix r_basis;
  ComplexMatrix d_basis;
  ComplexMatrix limit_state;
};

/// The recurrent subspace is the support of the Cesaro limit of L^k(Id/n),
/// obtained as the spectral projection of Id/n onto the fixed space of L.
inline BnDecomposition bn_decomposition(const KrausModel& model) {
  const Index n = model.internal_dim();
  const ComplexMatrix aux = auxiliary_map(model).matrix();
  const ComplexMatrix eye = ComplexMatrix::Identity(n * n, n * n);
  const ComplexMatrix right = null_space(aux - eye, 1e-9);
  const ComplexMatrix left = null_space(aux.adjoint() - eye, 1e-9);
  if (right.cols() == 0 || right.cols() != left.cols())
    fail(ErrorKind::convergence, "fixed space of the auxiliary map could not be resolved");
  const ComplexMatrix pairing = left.adjoint() * right;
  const ComplexVector start = vec(ComplexMatrix::Identity(n, n) / static_cast<double>(n));
  const ComplexVector limit = right * pairing.fullPivLu().solve(left.adjoint() * start);

  BnDecomposition out;
  out.limit_state = hermitian_part(unvec(limit, n));
  out.limit_state /= out.limit_state.trace().real();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(out.limit_state);
  std::vector<Index> support, rest;
  for (Index k = n - 1; k >= 0; --k)
    (es.eigenvalues()(k) > 1e-9 ? support : rest).push_back(k);
  out.r_basis.resize(n, static_cast<Index>(support.size()));
  out.d_basis.resize(n, static_cast<Index>(rest.size()));
  for (std::size_t i = 0; i < support.size(); ++i)
    out.r_basis.col(static_cast<Index>(i)) = es.eigenvectors().col(support[i]);
  for (std::size_t i = 0; i < rest.size(); ++i)
    out.d_basis.col(static_cast<Index>(i)) = es.eigenvectors().col(rest[i]);

  const ComplexMatrix p = projector(out.r_basis);
  const ComplexMatrix q = ComplexMatrix::Identity(n, n) - p;
  for (const auto& l : model.operators()) {
    const double leak = (q * l * p).norm();
    if (leak > 1e-8) {
      std::ostringstream os;
      os << "recurrent subspace is not invariant: leak " << leak;
      fail(ErrorKind::convergence, os.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// C^2 helpers

namespace detail {

inline ComplexVector phase_fixed(ComplexVector v) {
  v.normalize();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  return v;
}

inline bool is_scalar(const ComplexMatrix& l, double tol = 1e-10) {
  const Complex mean = l.trace() / static_cast<double>(l.rows());
  return (l - mean * ComplexMatrix::Identity(l.rows(), l.cols())).norm() <=
         tol * std::max(1.0, l.norm());
}

inline bool is_eigenvector(const ComplexMatrix& l, const ComplexVector& v, double tol = 1e-9) {
  const ComplexVector image = l * v;
  const Complex rayleigh = v.dot(image);  // v^H l v for unit v
  return (image - rayleigh * v).norm() <= tol * std::max(1.0, l.norm());
}

inline bool in_ray(const ComplexVector& x, const ComplexVector& e, double tol = 1e-9) {
  const ComplexVector unit = e.normalized();
  return (x - unit * unit.dot(x)).norm() <= tol * std::max(1.0, x.norm());
}

/// Eigenvector rays of a non-scalar 2x2 matrix (one ray when defective).
inline std::vector<ComplexVector> eigen_rays(const ComplexMatrix& l) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(l);
  const Complex a = es.eigenvalues()(0), b = es.eigenvalues()(1);
  const double scale = std::max(1.0, l.norm());
  if (std::abs(a - b) <= 1e-7 * scale) {
    const Complex mean = l.trace() / 2.0;
    const ComplexMatrix ker = null_space(l - mean * ComplexMatrix::Identity(2, 2), 1e-6 * scale);
    return {phase_fixed(ker.col(0))};
  }
  return {phase_fixed(es.eigenvectors().col(0)), phase_fixed(es.eigenvectors().col(1))};
}

struct RaySet {
  bool everything = false;
  std::vector<ComplexVector> rays;
};

inline RaySet common_eigen_rays(const std::vector<ComplexMatrix>& mats) {
  RaySet out;
  const ComplexMatrix* pivot = nullptr;
  for (const auto& m : mats)
    if (!is_scalar(m)) {
      pivot = &m;
      break;
    }
  if (!pivot) {
    out.everything = true;
    return out;
  }
  for (const auto& v : eigen_rays(*pivot)) {
    bool common = true;
    for (const auto& m : mats) common = common && is_eigenvector(m, v);
    bool duplicate = false;
    for (const auto& w : out.rays) duplicate = duplicate || in_ray(v, w);
    if (common && !duplicate) out.rays.push_back(v);
  }
  std::stable_sort(out.rays.begin(), out.rays.end(), [](const auto& x, const auto& y) {
    return std::abs(x(0)) > std::abs(y(0)) + 1e-12;
  });
  return out;
}

inline void require_c2(const KrausModel& model, const char* what) {
  if (model.internal_dim() != 2)
    fail(ErrorKind::scope, std::string(what) + " applies to internal dimension 2 only");
  const auto v = validate(model);
  if (!v.h1_holds || !v.h2_holds)
    fail(ErrorKind::precondition, std::string(what) + " requires assumptions H1 and H2");
}

}  // namespace detail

struct C2Classification {
  int situation = 1;
  /// Orthonormal pair (columns) for situation 2; the common eigenvectors for
  /// situation 3; empty for situation 1.
  std::optional<ComplexMatrix> basis;
};

inline C2Classification classify_c2(const KrausModel& model) {
  detail::require_c2(model, "classify_c2");
  const auto common = detail::common_eigen_rays(model.operators());
  C2Classification out;
  if (common.everything)
    fail(ErrorKind::precondition, "all operators are proportional to the identity");
  if (common.rays.empty()) {
    out.situation = 1;
    return out;
  }
  ComplexMatrix basis(2, 2);
  if (common.rays.size() == 1) {
    out.situation = 2;
    const ComplexVector e1 = common.rays[0];
    ComplexVector e2(2);
    e2 << -std::conj(e1(1)), std::conj(e1(0));
    basis << e1, detail::phase_fixed(e2);
    // Canonical form: upper triangular with ||alpha|| = 1 and <alpha, gamma> = 0.
    double alpha_norm = 0.0;
    Complex alpha_gamma = 0.0;
    for (const auto& l : model.operators()) {
      const ComplexMatrix t = basis.adjoint() * l * basis;
      alpha_norm += std::norm(t(0, 0));
      alpha_gamma += std::conj(t(0, 0)) * t(0, 1);
    }
    if (std::abs(alpha_norm - 1.0) > 1e-8 || std::abs(alpha_gamma) > 1e-8)
      fail(ErrorKind::contract, "situation-2 canonical form constraints are violated");
  } else {
    out.situation = 3;
    basis << common.rays[0], common.rays[1];
  }
  out.basis = basis;
  return out;
}

// ---------------------------------------------------------------------------
// Irreducibility of the lattice map

enum class MVerdict { irreducible, reducible, inconclusive };

inline std::string_view to_string(MVerdict v) {
  switch (v) {
    case MVerdict::irreducible: return "irreducible";
    case MVerdict::reducible: return "reducible";
    case MVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct MIrreducibilityResult {
  MVerdict verdict = MVerdict::inconclusive;
  std::optional<ComplexMatrix> witness;
  /// Closure dimension after including return paths of length <= l, l = 1..
  std::vector<Index> dimension_by_length;
};

namespace detail {

/// Smallest proper subspace of the form A v over a few candidate vectors v,
/// taken from eigenvectors of a random element of the algebra.
inline std::optional<ComplexMatrix> invariant_subspace_witness(const AlgebraClosure& algebra,
                                                               std::uint64_t seed) {
  const Index n = algebra.n();
  const auto elements = algebra.basis();
  CounterRng rng(seed);
  std::optional<ComplexMatrix> best;
  for (int attempt = 0; attempt < 3; ++attempt) {
    ComplexMatrix mix = ComplexMatrix::Zero(n, n);
    for (const auto& b : elements) mix += Complex(rng.uniform() - 0.5, rng.uniform() - 0.5) * b;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(mix);
    std::vector<ComplexVector> candidates;
    for (Index k = 0; k < n; ++k) candidates.push_back(es.eigenvectors().col(k));
    for (Index k = 0; k < n; ++k) candidates.push_back(ComplexVector::Unit(n, k));
    for (const auto& v : candidates) {
      ComplexMatrix images(n, static_cast<Index>(elements.size()));
      for (std::size_t j = 0; j < elements.size(); ++j)
        images.col(static_cast<Index>(j)) = elements[j] * v.normalized();
      const ComplexMatrix span = orthonormal_range(images, 1e-9);
      if (span.cols() == 0 || span.cols() >= n) continue;
      const ComplexMatrix p = projector(span);
      bool invariant = true;
      for (const auto& b : elements)
        invariant = invariant && ((ComplexMatrix::Identity(n, n) - p) * b * p).norm() <= 1e-9;
      if (invariant && (!best || span.cols() < best->cols())) {
        ComplexMatrix fixed(n, span.cols());
        for (Index c = 0; c < span.cols(); ++c) fixed.col(c) = phase_fixed(span.col(c));
        best = fixed;
      }
    }
    if (best) return best;
  }
  return best;
}

}  // namespace detail

/// Decides irreducibility of the lattice map from the algebra generated by
/// products along return paths of length <= max_len.
inline MIrreducibilityResult is_irreducible_M(const KrausModel& model, int max_len) {
  if (max_len < 2) fail(ErrorKind::precondition, "max_len must be at least 2");
  const Index n = model.internal_dim();
  const Index full = n * n;
  MIrreducibilityResult out;
  if (n == 1) {
    out.verdict = MVerdict::irreducible;
    return out;
  }
  const LatticePoint origin(static_cast<std::size_t>(model.lattice_dim()), 0);
  // span{L_pi : pi of length l ending at v}, kept as orthonormal columns.
  std::map<LatticePoint, ComplexMatrix> spans;
  spans.emplace(origin, vec(ComplexMatrix::Identity(n, n)));
  AlgebraClosure algebra(n, true);
  for (int len = 1; len <= max_len; ++len) {
    std::map<LatticePoint, ComplexMatrix> next;
    for (const auto& [site, cols] : spans) {
      for (std::size_t k = 0; k < model.num_steps(); ++k) {
        const ComplexMatrix left = kron(ComplexMatrix::Identity(n, n), model.op(k));
        const ComplexMatrix moved = left * cols;  // vec(L_s X) = (I kron L_s) vec(X)
        auto& target = next.try_emplace(site + model.step(k), full, 0).first->second;
        ComplexMatrix joined(full, target.cols() + moved.cols());
        joined << target, moved;
        target = joined;
      }
    }
    for (auto& [_, cols] : next) cols = orthonormal_range(cols, 1e-10);
    spans = std::move(next);
    if (auto it = spans.find(origin); it != spans.end()) {
      for (Index c = 0; c < it->second.cols(); ++c) algebra.add_generator(unvec(it->second.col(c), n));
      algebra.close();
    }
    out.dimension_by_length.push_back(algebra.dimension());
    if (algebra.is_full()) {
      out.verdict = MVerdict::irreducible;
      return out;
    }
  }
  const auto& dims = out.dimension_by_length;
  const bool stable = dims.size() >= 3 && dims[dims.size() - 1] == dims[dims.size() - 2] &&
                      dims[dims.size() - 2] == dims[dims.size() - 3];
  if (stable && !algebra.generators().empty()) {
    if (auto witness = detail::invariant_subspace_witness(algebra, 0x5eedULL)) {
      out.verdict = MVerdict::reducible;
      out.witness = std::move(witness);
      return out;
    }
  }
  out.verdict = MVerdict::inconclusive;
  return out;
}

struct C2MClassification {
  bool m_irreducible = false;
  std::optional<int> m_period;
};

/// Reducibility and period of the walk for n = 2 and steps {+1, -1}, from
/// the common eigenvectors of L+L- and L-L+.
inline C2MClassification c2_m_classifier(const KrausModel& model) {
  if (model.internal_dim() != 2 || model.lattice_dim() != 1 || model.num_steps() != 2)
    fail(ErrorKind::scope, "c2_m_classifier needs n = 2, d = 1 and steps {+1, -1}");
  const auto plus_idx = model.steps().find({1});
  const auto minus_idx = model.steps().find({-1});
  if (!plus_idx || !minus_idx)
    fail(ErrorKind::scope, "c2_m_classifier needs n = 2, d = 1 and steps {+1, -1}");
  const ComplexMatrix& lp = model.op(*plus_idx);
  const ComplexMatrix& lm = model.op(*minus_idx);

  const auto w = detail::common_eigen_rays({lp * lm, lm * lp});
  bool reducible = false;
  if (w.everything) {
    reducible = true;  // every 2x2 matrix has an eigenvector
  } else {
    for (const auto& v : w.rays)
      reducible = reducible || detail::is_eigenvector(lp, v) || detail::is_eigenvector(lm, v);
    if (!reducible && w.rays.size() == 2) {
      const auto& e0 = w.rays[0];
      const auto& e1 = w.rays[1];
      reducible = detail::in_ray(lp * e0, e1) && detail::in_ray(lm * e0, e1) &&
                  detail::in_ray(lp * e1, e0) && detail::in_ray(lm * e1, e0);
    }
  }
  C2MClassification out;
  out.m_irreducible = !reducible;
  if (!out.m_irreducible) return out;

  // Period 4 iff some orthonormal basis makes one operator diagonal and the
  // other antidiagonal, with all four entries nonzero.
  auto diagonal_antidiagonal = [](const ComplexMatrix& diag, const ComplexMatrix& anti) {
    const double tiny = 1e-9;
    if (detail::is_scalar(diag)) {
      const bool traceless = std::abs(anti.trace()) <= tiny * std::max(1.0, anti.norm());
      return traceless && std::abs(diag(0, 0)) > tiny && std::abs(anti.determinant()) > tiny;
    }
    if ((diag * diag.adjoint() - diag.adjoint() * diag).norm() > tiny) return false;
    const auto rays = detail::eigen_rays(diag);
    if (rays.size() != 2) return false;
    ComplexMatrix basis(2, 2);
    basis << rays[0], rays[1];
    const ComplexMatrix a = basis.adjoint() * diag * basis;
    const ComplexMatrix b = basis.adjoint() * anti * basis;
    return std::abs(b(0, 0)) <= tiny && std::abs(b(1, 1)) <= tiny && std::abs(b(0, 1)) > tiny &&
           std::abs(b(1, 0)) > tiny && std::abs(a(0, 0)) > tiny && std::abs(a(1, 1)) > tiny;
  };
  out.m_period = (diagonal_antidiagonal(lp, lm) || diagonal_antidiagonal(lm, lp)) ? 4 : 2;
  return out;
}

// ---------------------------------------------------------------------------
// Full report

struct StructureReport {
  double stochasticity_residual = 0.0;
  bool h1 = false;
  bool h2 = false;
  IrreducibilityResult l_irreducibility;
  std::optional<PeriodResult> period;
  RegularityResult regularity;
  BnDecomposition bn;
  bool decomposition_supported = true;
  std::optional<C2Classification> c2;
  MIrreducibilityResult m_paths;
  std::optional<C2MClassification> m_c2;
  MVerdict m_verdict = MVerdict::inconclusive;
  std::string m_verdict_source;
};

inline int default_return_path_length(const KrausModel& model) {
  return static_cast<int>(2 * model.internal_dim() * model.internal_dim() + 2);
}

inline StructureReport analyze_structure(const KrausModel& model, std::optional<int> max_len = {}) {
  StructureReport r;
  const auto v = validate(model);
  r.stochasticity_residual = v.residual;
  r.h1 = v.h1_holds;
  r.h2 = v.h2_holds;
  r.l_irreducibility = is_irreducible_L(model);
  if (r.l_irreducibility.verdict && r.l_irreducibility.method_agreement) r.period = period(model);
  r.regularity = is_regular(model);
  r.bn = bn_decomposition(model);
  const Index n = model.internal_dim();
  if (n == 2 && r.h1 && r.h2) r.c2 = classify_c2(model);
  r.decomposition_supported = !(n > 2 && !r.l_irreducibility.verdict && r.bn.r_basis.cols() < n);
  r.m_paths = is_irreducible_M(model, max_len.value_or(default_return_path_length(model)));
  r.m_verdict = r.m_paths.verdict;
  r.m_verdict_source = "return_paths";
  const bool pm_steps = model.lattice_dim() == 1 && model.num_steps() == 2 &&
                        model.steps().find({1}) && model.steps().find({-1});
  if (n == 2 && pm_steps) {
    r.m_c2 = c2_m_classifier(model);
    r.m_verdict = r.m_c2->m_irreducible ? MVerdict::irreducible : MVerdict::reducible;
    r.m_verdict_source = "c2_classifier";
  }
  return r;
}

}  // namespace oqrw
