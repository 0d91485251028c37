#pragma once

// Linear maps on operators of the internal space: the auxiliary map, its
// exponential tilts and derivative maps, the lattice map, and Perron data.

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "oqrw/numerics.hpp"
#include "oqrw/walkmodel.hpp"

namespace oqrw {

/// n^2 x n^2 matrix acting on column-stacked n x n operators.
class Superoperator {
 public:
  Superoperator(Index dim, ComplexMatrix matrix) : dim_(dim), matrix_(std::move(matrix)) {
    if (matrix_.rows() != dim_ * dim_ || matrix_.cols() != dim_ * dim_)
      fail(ErrorKind::dimension, "superoperator on " + std::to_string(dim_) + "x" +
                                     std::to_string(dim_) + " operators needs a " +
                                     std::to_string(dim_ * dim_) + "-square matrix, got " +
                                     describe_shape(matrix_));
  }

  static Superoperator identity(Index dim) {
    return Superoperator(dim, ComplexMatrix::Identity(dim * dim, dim * dim));
  }

  Index dim() const { return dim_; }
  const ComplexMatrix& matrix() const { return matrix_; }

  ComplexMatrix apply(const ComplexMatrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_)
      fail(ErrorKind::dimension, "cannot apply superoperator on " + std::to_string(dim_) +
                                     "x" + std::to_string(dim_) + " operators to " +
                                     describe_shape(x));
    return unvec(matrix_ * vec(x), dim_);
  }

  /// Hilbert-Schmidt adjoint: Tr(S(x) y^*) = Tr(x S^*(y)^*).
  Superoperator adjoint() const { return Superoperator(dim_, matrix_.adjoint()); }

  Superoperator operator-(const Superoperator& other) const {
    return Superoperator(dim_, matrix_ - other.matrix_);
  }

 private:
  Index dim_;
  ComplexMatrix matrix_;
};

/// Superoperator of X -> sum_k w_k A_k X A_k^*.
inline Superoperator weighted_kraus_map(std::span<const ComplexMatrix> ops,
                                        std::span<const double> weights) {
  const Index n = ops.front().rows();
  ComplexMatrix m = ComplexMatrix::Zero(n * n, n * n);
  for (std::size_t k = 0; k < ops.size(); ++k) m += weights[k] * sandwich_matrix(ops[k], ops[k]);
  return Superoperator(n, std::move(m));
}

/// Choi matrix sum_{ij} E_ij (x) S(E_ij).
inline ComplexMatrix choi_matrix(const Superoperator& s) {
  const Index n = s.dim();
  ComplexMatrix choi(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      choi.block(i * n, j * n, n, n) = unvec(s.matrix().col(j * n + i), n);
  return choi;
}

inline bool is_completely_positive(const Superoperator& s, double tol = 1e-10) {
  const ComplexMatrix choi = choi_matrix(s);
  if ((choi - choi.adjoint()).norm() > tol * std::max(1.0, choi.norm())) return false;
  return min_hermitian_eigenvalue(choi) >= -tol;
}

// ---------------------------------------------------------------------------
// Maps built from a model

/// rho -> sum_s e^{t phi(s)} L_s rho L_s^*.
inline Superoperator deform_weighted(const KrausModel& model, std::span<const double> phi,
                                     double t) {
  if (phi.size() != model.num_steps())
    fail(ErrorKind::dimension, "expected " + std::to_string(model.num_steps()) +
                                   " step weights, got " + std::to_string(phi.size()));
  std::vector<double> w(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) w[k] = std::exp(t * phi[k]);
  return weighted_kraus_map(model.operators(), w);
}

inline std::vector<double> step_projections(const KrausModel& model, std::span<const double> u) {
  if (u.size() != static_cast<std::size_t>(model.lattice_dim()))
    fail(ErrorKind::dimension, "u has length " + std::to_string(u.size()) +
                                   ", lattice dimension is " +
                                   std::to_string(model.lattice_dim()));
  std::vector<double> phi(model.num_steps());
  for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = dot(u, model.step(k));
  return phi;
}

/// The tilted map rho -> sum_s e^{<u,s>} L_s rho L_s^*.
inline Superoperator deform(const KrausModel& model, std::span<const double> u) {
  for (double x : u)
    if (!std::isfinite(x)) fail(ErrorKind::contract, "u must be finite");
  return deform_weighted(model, step_projections(model, u), 1.0);
}

/// The auxiliary map rho -> sum_s L_s rho L_s^*.
inline Superoperator auxiliary_map(const KrausModel& model) {
  const std::vector<double> zero(static_cast<std::size_t>(model.lattice_dim()), 0.0);
  return deform(model, zero);
}

/// First and second derivative maps of t -> deform(model, t u) at t = 0.
inline std::pair<Superoperator, Superoperator> derivative_maps(const KrausModel& model,
                                                               std::span<const double> u) {
  const auto phi = step_projections(model, u);
  std::vector<double> sq(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) sq[k] = phi[k] * phi[k];
  return {weighted_kraus_map(model.operators(), phi), weighted_kraus_map(model.operators(), sq)};
}

inline ComplexMatrix apply_L(const KrausModel& model, const ComplexMatrix& rho) {
  if (rho.rows() != model.internal_dim() || rho.cols() != model.internal_dim())
    fail(ErrorKind::dimension, "state is " + describe_shape(rho) + ", model acts on " +
                                   std::to_string(model.internal_dim()) + "x" +
                                   std::to_string(model.internal_dim()));
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& l : model.operators()) out += l * rho * l.adjoint();
  return out;
}

inline DensityMatrix apply_L(const KrausModel& model, const DensityMatrix& rho) {
  return DensityMatrix(apply_L(model, rho.matrix()));
}

/// One step of the lattice map: block at i becomes sum_s L_s rho(i-s) L_s^*.
/// Blocks that come out exactly zero are dropped.
inline LatticeState apply_M(const KrausModel& model, const LatticeState& state) {
  LatticeState out;
  out.internal_dim = model.internal_dim();
  if (!state.sites.empty() && state.internal_dim != model.internal_dim())
    fail(ErrorKind::dimension, "lattice state blocks are " + std::to_string(state.internal_dim) +
                                   "-dimensional, model acts on " +
                                   std::to_string(model.internal_dim()));
  for (const auto& [site, block] : state.sites) {
    if (site.size() != static_cast<std::size_t>(model.lattice_dim()))
      fail(ErrorKind::dimension, "site " + to_string(site) + " has wrong lattice dimension");
    for (std::size_t k = 0; k < model.num_steps(); ++k) {
      const auto& l = model.op(k);
      ComplexMatrix next = l * block * l.adjoint();
      if (next.isZero(0.0)) continue;
      auto [it, inserted] = out.sites.try_emplace(site + model.step(k), next);
      if (!inserted) it->second += next;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perron data

struct SpectralData {
  double lambda = 0.0;
  ComplexMatrix rho;
  ComplexMatrix m;
  bool degenerate = false;
  double gap = 0.0;
  std::vector<Complex> spectrum;
};

/// Which eigenvalues sit on the spectral circle and whether they form a
/// simple group of rotations of the Perron root.
struct PeripheralSpectrum {
  double radius = 0.0;
  std::size_t perron_index = 0;
  std::vector<std::size_t> peripheral;
  bool rotation_group = false;
  std::size_t root_multiplicity = 0;
  double gap = 0.0;
};

inline PeripheralSpectrum analyze_peripheral(const std::vector<Complex>& spectrum,
                                             double modulus_tol = 1e-9) {
  PeripheralSpectrum out;
  out.radius = std::abs(spectrum.front());
  const double r = out.radius;
  double best = -1.0;
  double below = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double mod = std::abs(spectrum[i]);
    if (r - mod <= modulus_tol * r) {
      out.peripheral.push_back(i);
      const double dist = std::abs(spectrum[i] - r);
      if (best < 0 || dist < best) {
        best = dist;
        out.perron_index = i;
      }
    } else {
      below = std::max(below, mod);
    }
  }
  out.gap = r - below;
  const Complex root = spectrum[out.perron_index];
  for (auto i : out.peripheral)
    if (std::abs(spectrum[i] - root) <= modulus_tol * r) ++out.root_multiplicity;
  const std::size_t k = out.peripheral.size();
  std::vector<bool> seen(k, false);
  bool group = out.root_multiplicity == 1;
  for (auto i : out.peripheral) {
    if (!group) break;
    const double turns = std::arg(spectrum[i] / r) * static_cast<double>(k) / (2 * std::numbers::pi);
    long j = std::lround(turns);
    const Complex expected = r * std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(j) /
                                                     static_cast<double>(k));
    j = ((j % static_cast<long>(k)) + static_cast<long>(k)) % static_cast<long>(k);
    if (std::abs(spectrum[i] - expected) > 1e-8 * r || seen[static_cast<std::size_t>(j)]) {
      group = false;
      break;
    }
    seen[static_cast<std::size_t>(j)] = true;
  }
  out.rotation_group = group;
  return out;
}

namespace detail {

/// Turns a raw eigenvector of a positive map into a positive semidefinite
/// operator of unit trace. Negative parts down to -1e-8 are clipped.
inline ComplexMatrix positive_representative(const ComplexVector& v, Index n, const char* what) {
  ComplexMatrix x = unvec(v, n);
  Complex tr = x.trace();
  if (std::abs(tr) < 1e-12 * x.norm()) {
    Index k = 0;
    x.diagonal().cwiseAbs().maxCoeff(&k);
    tr = x(k, k);
  }
  x *= std::conj(tr) / std::abs(tr);
  x = hermitian_part(x);
  x /= x.trace().real();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x);
  const double lowest = es.eigenvalues()(0);
  if (lowest < -1e-8) {
    std::ostringstream os;
    os << what << " has negative eigenvalue " << lowest << " after Hermitization";
    fail(ErrorKind::positivity, os.str());
  }
  const RealVector clipped = es.eigenvalues().cwiseMax(0.0);
  x = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return x / x.trace().real();
}

}  // namespace detail

/// Spectral radius with positive right and left eigenvectors.
inline SpectralData perron(const Superoperator& s, Tolerances tol = {}) {
  if (!is_completely_positive(s, tol.positivity))
    fail(ErrorKind::contract, "perron requires a completely positive map (Choi matrix not PSD)");
  const Index n = s.dim();
  const auto sys = eigendecompose(s.matrix(), tol.residual);
  const auto info = analyze_peripheral(sys.eigenvalues);
  if (info.radius <= 0.0) fail(ErrorKind::positivity, "map has spectral radius zero");

  SpectralData out;
  out.lambda = info.radius;
  out.spectrum = sys.eigenvalues;
  out.degenerate = !info.rotation_group;
  out.gap = info.gap;
  out.rho = detail::positive_representative(sys.right_eigenvectors[info.perron_index], n,
                                            "right Perron eigenvector");

  const auto left = eigendecompose(s.matrix().adjoint(), tol.residual);
  std::size_t best = 0;
  for (std::size_t i = 1; i < left.eigenvalues.size(); ++i)
    if (std::abs(left.eigenvalues[i] - info.radius) < std::abs(left.eigenvalues[best] - info.radius))
      best = i;
  out.m = detail::positive_representative(left.right_eigenvectors[best], n, "left Perron eigenvector");
  const double pairing = (out.m * out.rho).trace().real();
  if (pairing <= 1e-14)
    fail(ErrorKind::positivity, "left and right Perron eigenvectors are orthogonal");
  out.m /= pairing;
  return out;
}

inline double spectral_radius(const Superoperator& s) {
  return std::abs(eigenvalues(s.matrix()).front());
}

}  // namespace oqrw
