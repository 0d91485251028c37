#pragma once

// Invariant state, drift, CLT covariance (two formulas), the curve
// u -> log lambda_u with kink detection, and its Legendre transform.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "oqrw/structure.hpp"

namespace oqrw {

// ---------------------------------------------------------------------------
// Invariant state and first two moments

inline DensityMatrix invariant_state(const KrausModel& model) {
  const Index n = model.internal_dim();
  const ComplexMatrix aux = auxiliary_map(model).matrix();
  const auto sys = eigendecompose(aux);
  const std::size_t fixed = detail::count_unit_eigenvalues(sys.eigenvalues);
  if (fixed != 1) {
    std::ostringstream os;
    os << "fixed space of the auxiliary map has dimension " << fixed
       << "; the invariant state is not unique";
    if (n == 2) os << " (use c2_parameters with an initial state)";
    fail(ErrorKind::multiplicity, os.str());
  }
  std::size_t idx = 0;
  for (std::size_t i = 1; i < sys.eigenvalues.size(); ++i)
    if (std::abs(sys.eigenvalues[i] - 1.0) < std::abs(sys.eigenvalues[idx] - 1.0)) idx = i;
  const ComplexMatrix rho =
      detail::positive_representative(sys.right_eigenvectors[idx], n, "invariant state");
  const double residual = (unvec(aux * vec(rho), n) - rho).norm();
  if (residual > 1e-10) {
    std::ostringstream os;
    os << "invariant state residual " << residual << " exceeds 1e-10";
    fail(ErrorKind::convergence, os.str());
  }
  return DensityMatrix(rho);
}

/// m = sum_s Tr(L_s rho L_s^*) s.
inline RealVector drift(const KrausModel& model, const DensityMatrix& rho) {
  RealVector m = RealVector::Zero(model.lattice_dim());
  for (std::size_t k = 0; k < model.num_steps(); ++k) {
    const auto& l = model.op(k);
    const double w = (l * rho.matrix() * l.adjoint()).trace().real();
    for (int i = 0; i < model.lattice_dim(); ++i)
      m(i) += w * static_cast<double>(model.step(k)[static_cast<std::size_t>(i)]);
  }
  return m;
}

inline RealVector drift(const KrausModel& model) { return drift(model, invariant_state(model)); }

/// log of the spectral radius of the tilted map, evaluated with the largest
/// weight factored out so that large |u| does not overflow.
inline double log_lambda(const KrausModel& model, std::span<const double> u) {
  auto phi = step_projections(model, u);
  const double shift = *std::max_element(phi.begin(), phi.end());
  for (auto& p : phi) p -= shift;
  const double r = spectral_radius(deform_weighted(model, phi, 1.0));
  return shift + std::log(r);
}

inline double lambda(const KrausModel& model, std::span<const double> u) {
  return std::exp(log_lambda(model, u));
}

struct LambdaDerivatives {
  double first = 0.0;   // d/dt lambda_{tu} at t = 0
  double second = 0.0;  // d^2/dt^2 lambda_{tu} at t = 0
  ComplexMatrix eta;    // traceless first-order correction of the Perron state
};

/// Derivatives along u at u = 0 from perturbation theory around the
/// invariant state.
inline LambdaDerivatives lambda_derivatives(const KrausModel& model, const DensityMatrix& rho,
                                            std::span<const double> u) {
  const Index n = model.internal_dim();
  const auto [d1, d2] = derivative_maps(model, u);
  const ComplexMatrix first_image = d1.apply(rho.matrix());
  LambdaDerivatives out;
  out.first = first_image.trace().real();
  const ComplexMatrix rhs = first_image - out.first * rho.matrix();
  const ComplexMatrix gap = ComplexMatrix::Identity(n * n, n * n) - auxiliary_map(model).matrix();
  try {
    out.eta = solve_on_traceless(gap, rhs);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::rank_deficiency)
      fail(ErrorKind::multiplicity, std::string("Id - L is singular on traceless operators: ") +
                                        e.what());
    throw;
  }
  out.second = d2.apply(rho.matrix()).trace().real() + 2.0 * d1.apply(out.eta).trace().real();
  return out;
}

struct AsymptoticStats {
  RealVector m;
  RealMatrix C;
  std::vector<ComplexMatrix> eta_basis;
  std::map<std::string, double> method_residuals;
};

namespace detail {

inline std::vector<double> unit(int d, int i) {
  std::vector<double> u(static_cast<std::size_t>(d), 0.0);
  u[static_cast<std::size_t>(i)] = 1.0;
  return u;
}

}  // namespace detail

/// Covariance from the quadratic form u -> lambda''_u - (lambda'_u)^2,
/// polarized along e_i and e_i + e_j.
inline RealMatrix covariance(const KrausModel& model, const DensityMatrix& rho,
                             std::vector<ComplexMatrix>* etas = nullptr) {
  const int d = model.lattice_dim();
  auto q = [&](std::span<const double> u, ComplexMatrix* eta) {
    const auto der = lambda_derivatives(model, rho, u);
    if (eta) *eta = der.eta;
    return der.second - der.first * der.first;
  };
  RealVector diag(d);
  if (etas) etas->assign(static_cast<std::size_t>(d), ComplexMatrix());
  for (int i = 0; i < d; ++i) {
    const auto e = detail::unit(d, i);
    diag(i) = q(e, etas ? &(*etas)[static_cast<std::size_t>(i)] : nullptr);
  }
  RealMatrix c(d, d);
  for (int i = 0; i < d; ++i) {
    c(i, i) = diag(i);
    for (int j = i + 1; j < d; ++j) {
      std::vector<double> u(static_cast<std::size_t>(d), 0.0);
      u[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(j)] = 1.0;
      c(i, j) = c(j, i) = (q(u, nullptr) - diag(i) - diag(j)) / 2.0;
    }
  }
  return c;
}

inline RealMatrix covariance(const KrausModel& model) {
  return covariance(model, invariant_state(model));
}

/// Covariance from the dual formulation: Y_j solves (Id - L^*) Y_j =
/// sum_s s_j L_s^* L_s - m_j Id with Tr(rho Y_j) = 0.
inline RealMatrix covariance_dual(const KrausModel& model, const DensityMatrix& rho) {
  const int d = model.lattice_dim();
  const Index n = model.internal_dim();
  const ComplexMatrix& r = rho.matrix();
  const RealVector m = drift(model, rho);
  const ComplexMatrix gap =
      ComplexMatrix::Identity(n * n, n * n) - auxiliary_map(model).matrix().adjoint();
  auto s = [&](std::size_t k, int i) {
    return static_cast<double>(model.step(k)[static_cast<std::size_t>(i)]);
  };

  std::vector<ComplexMatrix> y;
  for (int j = 0; j < d; ++j) {
    ComplexMatrix rhs = -m(j) * ComplexMatrix::Identity(n, n);
    for (std::size_t k = 0; k < model.num_steps(); ++k)
      rhs += s(k, j) * model.op(k).adjoint() * model.op(k);
    try {
      y.push_back(unvec(solve_on_complement(gap, vec(rhs), vec(r)), n));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::rank_deficiency)
        fail(ErrorKind::multiplicity, std::string("Id - L^* is singular: ") + e.what());
      throw;
    }
  }
  std::vector<ComplexMatrix> images;
  for (const auto& l : model.operators()) images.push_back(l * r * l.adjoint());

  RealMatrix c(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = -m(i) * m(j);
      acc -= m(i) * (r * y[static_cast<std::size_t>(j)]).trace().real() +
             m(j) * (r * y[static_cast<std::size_t>(i)]).trace().real();
      for (std::size_t k = 0; k < model.num_steps(); ++k) {
        const auto& img = images[k];
        acc += s(k, i) * s(k, j) * img.trace().real();
        acc += s(k, i) * (img * y[static_cast<std::size_t>(j)]).trace().real() +
               s(k, j) * (img * y[static_cast<std::size_t>(i)]).trace().real();
      }
      c(i, j) = acc;
    }
  }
  return c;
}

inline RealMatrix covariance_dual(const KrausModel& model) {
  return covariance_dual(model, invariant_state(model));
}

/// Drift, covariance and cross-checks for a model with a unique invariant
/// state.
inline AsymptoticStats asymptotic_stats(const KrausModel& model) {
  AsymptoticStats out;
  const auto rho = invariant_state(model);
  out.m = drift(model, rho);
  out.C = covariance(model, rho, &out.eta_basis);
  const RealMatrix dual = covariance_dual(model, rho);
  out.method_residuals["covariance_dual_max_diff"] = (out.C - dual).cwiseAbs().maxCoeff();
  out.method_residuals["invariant_state_residual"] =
      (apply_L(model, rho.matrix()) - rho.matrix()).norm();

  const int d = model.lattice_dim();
  const double h = 1e-5;
  double fd = 0.0;
  for (int i = 0; i < d; ++i) {
    auto plus = detail::unit(d, i), minus = detail::unit(d, i);
    plus[static_cast<std::size_t>(i)] = h;
    minus[static_cast<std::size_t>(i)] = -h;
    const double grad = (log_lambda(model, plus) - log_lambda(model, minus)) / (2 * h);
    fd = std::max(fd, std::abs(grad - out.m(i)));
  }
  out.method_residuals["drift_finite_difference"] = fd;
  double trace_eta = 0.0;
  for (const auto& e : out.eta_basis) trace_eta = std::max(trace_eta, std::abs(e.trace()));
  out.method_residuals["eta_trace"] = trace_eta;
  out.method_residuals["covariance_asymmetry"] = (out.C - out.C.transpose()).cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// The curve u -> log lambda_u

struct Kink {
  double u = 0.0;
  double lambda_left_slope = 0.0;
  double lambda_right_slope = 0.0;
  double log_left_slope = 0.0;
  double log_right_slope = 0.0;
  /// Distance between the two colliding eigenvalues at u, relative to lambda_u.
  double crossing_gap = 0.0;
};

struct LambdaCurve {
  std::vector<std::vector<double>> u;
  std::vector<double> log_lambda;
  std::vector<Kink> kinks;
  bool irreducible = true;
  /// Curve of the map restricted to the recurrent subspace, when that
  /// subspace is proper.
  std::optional<std::vector<double>> restricted_log_lambda;
};

namespace detail {

inline double golden_section_min(const std::function<double(double)>& f, double a, double b,
                                 double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

/// Distance from the leading eigenvalue of the tilted map to its nearest
/// neighbour in the complex plane, relative to the leading modulus.
inline double leading_separation(const KrausModel& model, double u) {
  const double shift = std::max(0.0, std::abs(u));
  auto phi = step_projections(model, std::vector<double>{u});
  for (auto& p : phi) p -= shift;
  const auto spec = eigenvalues(deform_weighted(model, phi, 1.0).matrix());
  if (spec.size() < 2) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < spec.size(); ++k) best = std::min(best, std::abs(spec[k] - spec[0]));
  return best / std::abs(spec[0]);
}

inline KrausModel restrict_to(const KrausModel& model, const ComplexMatrix& basis) {
  std::vector<ComplexMatrix> ops;
  for (const auto& l : model.operators()) ops.push_back(basis.adjoint() * l * basis);
  return KrausModel(model.steps(), std::move(ops));
}

}  // namespace detail

/// Kinks of a one-dimensional curve: collisions of the leading eigenvalue
/// with another one, located by minimizing their separation, and kept when
/// one-sided slopes differ by more than 1e-6 (relative).
inline std::vector<Kink> detect_kinks(const KrausModel& model, const std::vector<double>& grid) {
  std::vector<Kink> kinks;
  if (model.lattice_dim() != 1 || grid.size() < 2) return kinks;
  std::vector<double> sep(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) sep[k] = detail::leading_separation(model, grid[k]);
  auto f = [&](double u) { return lambda(model, std::vector<double>{u}); };
  auto g = [&](double u) { return log_lambda(model, std::vector<double>{u}); };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const bool left_ok = k == 0 || sep[k] <= sep[k - 1];
    const bool right_ok = k + 1 == grid.size() || sep[k] < sep[k + 1];
    if (!left_ok || !right_ok) continue;
    const double a = grid[k == 0 ? 0 : k - 1];
    const double b = grid[k + 1 == grid.size() ? k : k + 1];
    const double u = detail::golden_section_min(
        [&](double x) { return detail::leading_separation(model, x); }, a, b, 1e-13);
    const double gap = detail::leading_separation(model, u);
    if (gap > 1e-7) continue;
    // One-sided derivatives: central differences at u -/+ h, extrapolated to u.
    const double h = 1e-4;
    auto slope = [&](const std::function<double(double)>& fn, double side) {
      auto central = [&](double x) { return (fn(x + h / 2) - fn(x - h / 2)) / h; };
      return 2.0 * central(u + side * h) - central(u + 2.0 * side * h);
    };
    Kink kink;
    kink.u = u;
    kink.crossing_gap = gap;
    kink.lambda_left_slope = slope(f, -1.0);
    kink.lambda_right_slope = slope(f, 1.0);
    kink.log_left_slope = slope(g, -1.0);
    kink.log_right_slope = slope(g, 1.0);
    const double scale = std::max(1.0, std::abs(kink.lambda_left_slope));
    if (std::abs(kink.lambda_right_slope - kink.lambda_left_slope) <= 1e-6 * scale) continue;
    const bool duplicate = !kinks.empty() && std::abs(kinks.back().u - u) < 1e-8;
    if (!duplicate) kinks.push_back(kink);
  }
  return kinks;
}

inline LambdaCurve lambda_curve(const KrausModel& model,
                                const std::vector<std::vector<double>>& u_grid) {
  LambdaCurve out;
  out.u = u_grid;
  for (const auto& u : u_grid) out.log_lambda.push_back(log_lambda(model, u));
  const auto irr = is_irreducible_L(model);
  out.irreducible = irr.verdict;
  if (model.lattice_dim() == 1) {
    std::vector<double> line;
    for (const auto& u : u_grid) line.push_back(u.front());
    out.kinks = detect_kinks(model, line);
  }
  if (!out.irreducible) {
    const auto bn = bn_decomposition(model);
    if (bn.r_basis.cols() < model.internal_dim()) {
      const KrausModel restricted = detail::restrict_to(model, bn.r_basis);
      std::vector<double> values;
      for (const auto& u : u_grid) values.push_back(log_lambda(restricted, u));
      out.restricted_log_lambda = std::move(values);
    }
  }
  return out;
}

/// Regular grid of points^d vectors on [lo, hi]^d.
inline std::vector<std::vector<double>> regular_grid(int d, double lo, double hi, int points) {
  if (points < 1) fail(ErrorKind::contract, "grid needs at least one point");
  if (!(hi >= lo)) fail(ErrorKind::contract, "grid upper bound is below the lower bound");
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    axis[static_cast<std::size_t>(k)] = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
  std::vector<std::vector<double>> out{{}};
  for (int i = 0; i < d; ++i) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double a : axis) {
        auto p = prefix;
        p.push_back(a);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate function

struct RateOptions {
  double u_min = -10.0;
  double u_max = 10.0;
  int u_points = 201;
  double cap = 1e6;
  double u_tol = 1e-8;
  /// Outward doublings of the window allowed when the supremum sits on its
  /// edge; zero turns any such case into a window error.
  int max_extensions = 64;
};

struct RateFunctionTable {
  std::vector<std::vector<double>> u_grid;
  std::vector<double> log_lambda;
  std::vector<std::vector<double>> x_grid;
  std::vector<double> rate;
  std::vector<std::vector<double>> maximizer;
  std::vector<Kink> kinks;
  bool upper_bound_only = false;
  std::optional<std::vector<double>> restricted_log_lambda;
};

namespace detail {

struct SupResult {
  double value = 0.0;
  std::vector<double> argmax;
};

inline SupResult legendre_1d(const std::function<double(double)>& c, double x,
                             const std::vector<double>& axis, const std::vector<double>& c_axis,
                             const RateOptions& opt) {
  auto f = [&](double u) { return u * x - c(u); };
  std::size_t best = 0;
  std::vector<double> vals(axis.size());
  for (std::size_t k = 0; k < axis.size(); ++k) {
    vals[k] = axis[k] * x - c_axis[k];
    if (vals[k] > vals[best]) best = k;
  }
  const double inf = std::numeric_limits<double>::infinity();
  // The supremum sits on the window edge: walk outward with doubling steps
  // until the objective stops growing or exceeds the cap.
  auto edge_case = [&](double edge, double inner) -> SupResult {
    const double dir = edge > inner ? 1.0 : -1.0;
    double step = std::max(std::abs(edge - inner), opt.u_max - opt.u_min);
    double before = inner, prev_u = edge, prev = f(edge);
    for (int k = 0; k < opt.max_extensions; ++k) {
      const double u = prev_u + dir * step;
      const double val = f(u);
      if (val > opt.cap) return SupResult{inf, {u}};
      if (val <= prev + 1e-13 * std::max(1.0, std::abs(prev))) {
        const double arg = golden_section_min([&](double t) { return -f(t); },
                                              std::min(before, u), std::max(before, u), opt.u_tol);
        return f(arg) >= prev ? SupResult{f(arg), {arg}} : SupResult{prev, {prev_u}};
      }
      before = prev_u;
      prev_u = u;
      prev = val;
      step *= 2;
    }
    std::ostringstream os;
    os << "supremum for x = " << x << " still grows at u = " << prev_u
       << " (objective " << prev << "); enlarge the u window";
    fail(ErrorKind::window, os.str());
  };
  if (axis.size() >= 2) {
    if (best + 1 == axis.size() && vals[best] > vals[best - 1])
      return edge_case(axis[best], axis[best - 1]);
    if (best == 0 && vals[0] > vals[1]) return edge_case(axis[0], axis[1]);
  }
  const double lo = axis[best == 0 ? 0 : best - 1];
  const double hi = axis[best + 1 == axis.size() ? best : best + 1];
  if (hi <= lo) return SupResult{vals[best], {axis[best]}};
  const double arg = golden_section_min([&](double t) { return -f(t); }, lo, hi, opt.u_tol);
  const double val = f(arg);
  return val >= vals[best] ? SupResult{val, {arg}} : SupResult{vals[best], {axis[best]}};
}

}  // namespace detail

/// I(x) = sup_u (<u, x> - log lambda_u). For d = 1 the grid maximum is
/// refined by golden section; for d > 1 by cyclic coordinate ascent.
inline RateFunctionTable rate_function(const KrausModel& model,
                                       const std::vector<std::vector<double>>& x_grid,
                                       const RateOptions& opt = {}) {
  const int d = model.lattice_dim();
  RateFunctionTable t;
  t.u_grid = regular_grid(d, opt.u_min, opt.u_max, opt.u_points);
  const auto curve = lambda_curve(model, t.u_grid);
  t.log_lambda = curve.log_lambda;
  t.kinks = curve.kinks;
  t.upper_bound_only = !curve.irreducible;
  t.restricted_log_lambda = curve.restricted_log_lambda;
  t.x_grid = x_grid;
  const double inf = std::numeric_limits<double>::infinity();

  for (const auto& x : x_grid) {
    if (x.size() != static_cast<std::size_t>(d))
      fail(ErrorKind::dimension, "x has length " + std::to_string(x.size()) +
                                     ", lattice dimension is " + std::to_string(d));
    if (d == 1) {
      std::vector<double> axis;
      for (const auto& u : t.u_grid) axis.push_back(u.front());
      const auto r = detail::legendre_1d(
          [&](double u) { return log_lambda(model, std::vector<double>{u}); }, x.front(), axis,
          t.log_lambda, opt);
      t.rate.push_back(std::max(0.0, r.value));
      t.maximizer.push_back(r.argmax);
      continue;
    }
    auto objective = [&](const std::vector<double>& u) {
      double acc = -log_lambda(model, u);
      for (int i = 0; i < d; ++i) acc += u[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      return acc;
    };
    std::size_t best = 0;
    std::vector<double> vals(t.u_grid.size());
    for (std::size_t k = 0; k < t.u_grid.size(); ++k) {
      vals[k] = 0.0;
      for (int i = 0; i < d; ++i)
        vals[k] += t.u_grid[k][static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      vals[k] -= t.log_lambda[k];
      if (vals[k] > vals[best]) best = k;
    }
    std::vector<double> u = t.u_grid[best];
    double value = vals[best];
    const double spacing = opt.u_points > 1 ? (opt.u_max - opt.u_min) / (opt.u_points - 1) : 0.0;
    for (int sweep = 0; sweep < 200 && spacing > 0; ++sweep) {
      const auto before = u;
      for (int i = 0; i < d; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double lo = std::max(opt.u_min, u[idx] - spacing);
        const double hi = std::min(opt.u_max, u[idx] + spacing);
        auto line = [&](double a) {
          auto v = u;
          v[idx] = a;
          return -objective(v);
        };
        u[idx] = detail::golden_section_min(line, lo, hi, opt.u_tol);
      }
      value = std::max(value, objective(u));
      double moved = 0.0;
      for (int i = 0; i < d; ++i)
        moved = std::max(moved, std::abs(u[static_cast<std::size_t>(i)] - before[static_cast<std::size_t>(i)]));
      if (moved <= opt.u_tol) break;
    }
    bool on_edge = false;
    for (double a : u) on_edge = on_edge || a <= opt.u_min + 1e-6 || a >= opt.u_max - 1e-6;
    if (on_edge) {
      if (value > opt.cap) {
        value = inf;
      } else {
        std::ostringstream os;
        os << "supremum for x lies on the edge of the u window; enlarge the window";
        fail(ErrorKind::window, os.str());
      }
    }
    t.rate.push_back(std::max(0.0, value));
    t.maximizer.push_back(u);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Explicit C^2 parameters

struct C2Parameters {
  RealVector m;
  RealMatrix C;
  int situation = 1;
  std::optional<int> period;
  /// Weight of the first diagonal law (situation 3 only).
  std::optional<double> mixture_weight;
};

namespace detail {

struct Moments {
  RealVector mean;
  RealMatrix covariance;
};

inline Moments step_law_moments(const KrausModel& model, const std::vector<double>& probs) {
  const int d = model.lattice_dim();
  Moments out{RealVector::Zero(d), RealMatrix::Zero(d, d)};
  for (std::size_t k = 0; k < probs.size(); ++k) {
    RealVector s(d);
    for (int i = 0; i < d; ++i) s(i) = static_cast<double>(model.step(k)[static_cast<std::size_t>(i)]);
    out.mean += probs[k] * s;
    out.covariance += probs[k] * s * s.transpose();
  }
  out.covariance -= out.mean * out.mean.transpose();
  return out;
}

}  // namespace detail

inline C2Parameters c2_parameters(const KrausModel& model, const LatticeState& initial) {
  if (model.internal_dim() != 2)
    fail(ErrorKind::scope, "c2_parameters applies to internal dimension 2 only");
  const auto cls = classify_c2(model);
  C2Parameters out;
  out.situation = cls.situation;
  auto entries = [&](const ComplexMatrix& basis, Index row, Index col) {
    std::vector<double> probs;
    for (const auto& l : model.operators())
      probs.push_back(std::norm((basis.adjoint() * l * basis)(row, col)));
    return probs;
  };

  if (cls.situation == 1) {
    const auto per = period(model);
    out.period = per.d;
    if (per.d == 1) {
      const auto rho = invariant_state(model);
      out.m = drift(model, rho);
      out.C = covariance(model, rho);
      return out;
    }
    ComplexMatrix basis(2, 2);
    basis << orthonormal_range(per.projections[0], 1e-8).col(0),
        orthonormal_range(per.projections[1], 1e-8).col(0);
    const auto a = detail::step_law_moments(model, entries(basis, 1, 0));  // nu_s
    const auto b = detail::step_law_moments(model, entries(basis, 0, 1));  // gamma_s
    out.m = (a.mean + b.mean) / 2.0;
    out.C = (a.covariance + b.covariance) / 2.0;
    return out;
  }
  const ComplexMatrix& basis = *cls.basis;
  const auto a = detail::step_law_moments(model, entries(basis, 0, 0));  // alpha_s
  if (cls.situation == 2) {
    out.m = a.mean;
    out.C = a.covariance;
    return out;
  }
  validate_lattice_state(initial, 2, model.lattice_dim());
  const auto b = detail::step_law_moments(model, entries(basis, 1, 1));  // beta_s
  double p = 0.0;
  for (const auto& [_, block] : initial.sites)
    p += (basis.col(0).adjoint() * block * basis.col(0))(0, 0).real();
  out.mixture_weight = p;
  out.m = p * a.mean + (1.0 - p) * b.mean;
  out.C = p * a.covariance + (1.0 - p) * b.covariance;
  return out;
}

}  // namespace oqrw
