#pragma once

// Seeded random models and closed-form reference values shared by the unit
// tests and the acceptance runner.

#include <cmath>
#include <numbers>
#include <vector>

#include "oqrw/oqrw.hpp"

namespace oqrw::testing {

inline double gaussian(CounterRng& rng) {
  const double r = std::sqrt(-2.0 * std::log1p(-rng.uniform()));
  return r * std::cos(2 * std::numbers::pi * rng.uniform());
}

inline ComplexMatrix gaussian_matrix(Index rows, Index cols, CounterRng& rng) {
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(gaussian(rng), gaussian(rng));
  return m;
}

inline ComplexMatrix random_unitary(Index n, CounterRng& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(gaussian_matrix(n, n, rng));
  return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

inline ComplexVector random_unit_vector(Index n, CounterRng& rng) {
  return gaussian_matrix(n, 1, rng).col(0).normalized();
}

/// Kraus operators cut from a random isometry C^n -> C^{kn}.
inline KrausModel random_isometry_model(Index n, const std::vector<LatticePoint>& steps,
                                        std::uint64_t seed) {
  CounterRng rng(seed);
  const auto k = static_cast<Index>(steps.size());
  Eigen::HouseholderQR<ComplexMatrix> qr(gaussian_matrix(k * n, n, rng));
  const ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(k * n, n);
  std::vector<ComplexMatrix> ops;
  for (Index s = 0; s < k; ++s) ops.push_back(v.middleRows(s * n, n));
  const int d = static_cast<int>(steps.front().size());
  return KrausModel(StepSet(d, steps), std::move(ops));
}

enum class C2Family { generic, upper_triangular, diagonal, antidiagonal };

/// Random stochastic C^2 model with steps {+1, -1} from one structural
/// family, conjugated by a random unitary.
inline KrausModel random_c2_model(C2Family family, std::uint64_t seed) {
  const std::vector<LatticePoint> steps{{1}, {-1}};
  if (family == C2Family::generic) return random_isometry_model(2, steps, seed);
  CounterRng rng(seed);
  std::vector<ComplexMatrix> ops(2, ComplexMatrix::Zero(2, 2));
  const ComplexVector a = random_unit_vector(2, rng);
  const ComplexVector b = random_unit_vector(2, rng);
  switch (family) {
    case C2Family::diagonal:
      for (int s = 0; s < 2; ++s) {
        ops[static_cast<std::size_t>(s)](0, 0) = a(s);
        ops[static_cast<std::size_t>(s)](1, 1) = b(s);
      }
      break;
    case C2Family::antidiagonal:
      for (int s = 0; s < 2; ++s) {
        ops[static_cast<std::size_t>(s)](1, 0) = a(s);  // nu_s
        ops[static_cast<std::size_t>(s)](0, 1) = b(s);  // gamma_s
      }
      break;
    case C2Family::upper_triangular: {
      // alpha unit, gamma orthogonal to alpha, |gamma|^2 + |beta|^2 = 1.
      ComplexVector perp(2);
      perp << -std::conj(a(1)), std::conj(a(0));
      const double t = 0.2 + 0.6 * rng.uniform();
      const ComplexVector gamma = std::sqrt(t) * perp;
      const ComplexVector beta = std::sqrt(1 - t) * b;
      for (int s = 0; s < 2; ++s) {
        ops[static_cast<std::size_t>(s)](0, 0) = a(s);
        ops[static_cast<std::size_t>(s)](0, 1) = gamma(s);
        ops[static_cast<std::size_t>(s)](1, 1) = beta(s);
      }
      break;
    }
    case C2Family::generic: break;
  }
  const ComplexMatrix u = random_unitary(2, rng);
  for (auto& l : ops) l = u * l * u.adjoint();
  return KrausModel(StepSet(1, steps), std::move(ops));
}

inline std::vector<KrausModel> all_builtins() {
  std::vector<KrausModel> out;
  for (const auto& name : builtin_names())
    out.push_back(name == "classical_dilation" ? builtin(name, 0.3) : builtin(name));
  out.push_back(builtin("classical_dilation", 0.5));
  return out;
}

inline std::vector<std::string> all_builtin_labels() {
  std::vector<std::string> out;
  for (const auto& name : builtin_names())
    out.push_back(name == "classical_dilation" ? "classical_dilation(0.3)" : name);
  out.push_back("classical_dilation(0.5)");
  return out;
}

/// Largest eigenvalue of the tilted standard example in closed form.
inline double std_example_lambda(double u) {
  const double c = std::exp(u) + std::exp(-u);
  const double w = c + std::sqrt(std::exp(2 * u) + std::exp(-2 * u) + 3);
  return (c + std::cbrt(w) - 1.0 / std::cbrt(w)) / 3.0;
}

inline double periodic_log_lambda(double u) {
  return 0.5 * (std::log(std::exp(u) + std::exp(-u)) + std::log(3 * std::exp(u) + std::exp(-u))) -
         1.5 * std::log(2.0);
}

inline double periodic_rate(double t) {
  const double ut = 0.5 * std::log((2 * t + std::sqrt(t * t + 3)) / (3 * (1 - t)));
  return t * ut - periodic_log_lambda(ut);
}

inline double breakdown_lambda(double u) {
  return std::max((std::exp(u) + std::exp(-u)) / 2, 0.75 * std::exp(u));
}

/// P(X_n = n) from |e2><e2| at the origin, as printed.
inline double breakdown_top_mass_printed(int n) {
  const double r3 = std::sqrt(3.0), r2 = std::sqrt(2.0);
  return std::pow(0.75, n) +
         0.125 * std::pow(2.0, 1 - n) * (std::pow(r3, n) - std::pow(r2, n)) / (r3 - r2);
}

/// Same quantity with the square that the printed form omits.
inline double breakdown_top_mass_corrected(int n) {
  const double r3 = std::sqrt(3.0), r2 = std::sqrt(2.0);
  const double q = (std::pow(r3, n) - std::pow(r2, n)) / (r3 - r2);
  return std::pow(0.75, n) + 0.125 * std::pow(2.0, 2 - 2 * n) * q * q;
}

inline LatticeState localized_pure(const KrausModel& model, Index k) {
  ComplexMatrix rho = ComplexMatrix::Zero(model.internal_dim(), model.internal_dim());
  rho(k, k) = 1.0;
  return LatticeState::localized(LatticePoint(static_cast<std::size_t>(model.lattice_dim()), 0),
                                 DensityMatrix(rho));
}

}  // namespace oqrw::testing
