#pragma once

// Quantum trajectories (X_p, rho_p): seeded sampling, an exact small-horizon
// distribution oracle, the moment generating function identity, and batch
// statistics for the law of large numbers and the CLT.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <span>
#include <thread>
#include <exception>
#include <vector>

#include "oqrw/rng.hpp"
#include "oqrw/superops.hpp"

namespace oqrw {

struct TrajectorySample {
  std::vector<LatticePoint> positions;
  std::vector<DensityMatrix> states;
  std::vector<std::size_t> steps;
  std::uint64_t seed = 0;
};

namespace detail {

/// Precomputed pieces of a model used on the sampling hot path.
struct SamplerKernel {
  explicit SamplerKernel(const KrausModel& model) : model(&model) {
    for (const auto& l : model.operators()) {
      ops.push_back(l);
      ops_adj.push_back(l.adjoint());
      // Tr(L rho L^*) = sum_ij (L^* L)_ji rho_ij.
      weights_t.push_back((l.adjoint() * l).transpose());
    }
  }
  const KrausModel* model;
  std::vector<ComplexMatrix> ops, ops_adj, weights_t;
};

inline std::pair<LatticePoint, ComplexMatrix> draw_start(const LatticeState& initial,
                                                         CounterRng& rng) {
  const double total = initial.total_trace();
  const double target = rng.uniform() * total;
  double acc = 0.0;
  const std::pair<const LatticePoint, ComplexMatrix>* chosen = nullptr;
  for (const auto& entry : initial.sites) {
    const double w = entry.second.trace().real();
    if (w <= 0.0) continue;
    chosen = &entry;
    acc += w;
    if (target < acc) break;
  }
  if (!chosen) fail(ErrorKind::degeneracy, "initial state has no mass");
  return {chosen->first, chosen->second / chosen->second.trace().real()};
}

/// Runs one trajectory of P steps. Calls record(position, state, step) after
/// the start (step = npos) and after every step when record is set.
template <class Record>
LatticePoint run_trajectory(const SamplerKernel& kernel, const LatticeState& initial,
                            long horizon, CounterRng& rng, LatticePoint* start_out,
                            Record&& record) {
  auto [position, rho] = draw_start(initial, rng);
  if (start_out) *start_out = position;
  record(position, rho, static_cast<std::size_t>(-1));
  const std::size_t k = kernel.ops.size();
  std::vector<double> probs(k);
  ComplexMatrix tmp(rho.rows(), rho.cols()), next(rho.rows(), rho.cols());
  for (long p = 0; p < horizon; ++p) {
    double sum = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      probs[s] = std::max(0.0, kernel.weights_t[s].cwiseProduct(rho).sum().real());
      sum += probs[s];
    }
    if (std::all_of(probs.begin(), probs.end(), [](double q) { return q <= 1e-15; }))
      fail(ErrorKind::degeneracy, "all step probabilities vanish at step " + std::to_string(p));
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "step probabilities sum to " << sum << " at step " << p;
      fail(ErrorKind::numerical_drift, os.str());
    }
    const double u = rng.uniform() * sum;
    std::size_t chosen = k;
    double acc = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      acc += probs[s];
      if (probs[s] > 0.0 && u < acc) {
        chosen = s;
        break;
      }
    }
    if (chosen == k)  // u landed on the rounding tail
      for (std::size_t s = k; s-- > 0;)
        if (probs[s] > 0.0) {
          chosen = s;
          break;
        }
    tmp.noalias() = kernel.ops[chosen] * rho;
    next.noalias() = tmp * kernel.ops_adj[chosen];
    rho = next / probs[chosen];
    const auto& step = kernel.model->step(chosen);
    for (std::size_t i = 0; i < position.size(); ++i) position[i] += step[i];
    if ((p + 1) % 64 == 0) {
      const double trace = rho.trace().real();
      if (std::abs(trace - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "conditional state trace drifted to " << trace << " at step " << p + 1;
        fail(ErrorKind::numerical_drift, os.str());
      }
      rho = hermitian_part(rho) / trace;
    }
    record(position, rho, chosen);
  }
  return position;
}

}  // namespace detail

inline TrajectorySample sample_trajectory(const KrausModel& model, const LatticeState& initial,
                                          long horizon, std::uint64_t seed) {
  if (horizon < 0) fail(ErrorKind::contract, "horizon must be nonnegative");
  validate_lattice_state(initial, model.internal_dim(), model.lattice_dim());
  const detail::SamplerKernel kernel(model);
  CounterRng rng(seed);
  TrajectorySample out;
  out.seed = seed;
  detail::run_trajectory(kernel, initial, horizon, rng, nullptr,
                         [&](const LatticePoint& x, const ComplexMatrix& rho, std::size_t s) {
                           out.positions.push_back(x);
                           out.states.emplace_back(hermitian_part(rho));
                           if (s != static_cast<std::size_t>(-1)) out.steps.push_back(s);
                         });
  return out;
}

// ---------------------------------------------------------------------------
// Exact distribution

struct SiteMass {
  double probability = 0.0;
  ComplexMatrix block;
};

struct ExactDistribution {
  long horizon = 0;
  std::map<LatticePoint, SiteMass> masses;
  /// Total variation between path enumeration and iterated lattice map.
  double self_check_tv = 0.0;
};

struct OracleLimits {
  long max_horizon_binary = 14;       // when |S| = 2
  std::uint64_t max_paths = 1u << 20;  // |S|^p in general
};

namespace detail {

inline void require_oracle_scope(const KrausModel& model, long p, const OracleLimits& lim) {
  if (p < 0) fail(ErrorKind::contract, "horizon must be nonnegative");
  const std::size_t k = model.num_steps();
  if (k == 2 && p > lim.max_horizon_binary)
    fail(ErrorKind::scope, "horizon " + std::to_string(p) + " exceeds the oracle cap " +
                               std::to_string(lim.max_horizon_binary) + " for two steps");
  double paths = 1.0;
  for (long i = 0; i < p; ++i) paths *= static_cast<double>(k);
  if (paths > static_cast<double>(lim.max_paths))
    fail(ErrorKind::scope, "|S|^p = " + std::to_string(paths) + " exceeds the oracle cap " +
                               std::to_string(lim.max_paths));
}

/// Visits every step sequence of length p from every initial site, passing
/// the start site, displacement and unnormalized block L_pi rho(i) L_pi^*.
inline void enumerate_paths(
    const KrausModel& model, const LatticeState& initial, long p,
    const std::function<void(const LatticePoint&, const LatticePoint&, const ComplexMatrix&)>& visit) {
  const LatticePoint zero(static_cast<std::size_t>(model.lattice_dim()), 0);
  std::function<void(const LatticePoint&, const LatticePoint&, const ComplexMatrix&, long)> walk =
      [&](const LatticePoint& start, const LatticePoint& disp, const ComplexMatrix& block,
          long depth) {
        if (depth == p) {
          visit(start, disp, block);
          return;
        }
        for (std::size_t k = 0; k < model.num_steps(); ++k) {
          const auto& l = model.op(k);
          walk(start, disp + model.step(k), l * block * l.adjoint(), depth + 1);
        }
      };
  for (const auto& [site, block] : initial.sites) walk(site, zero, block, 0);
}

}  // namespace detail

inline ExactDistribution exact_distribution(const KrausModel& model, const LatticeState& initial,
                                            long p, const OracleLimits& lim = {}) {
  detail::require_oracle_scope(model, p, lim);
  validate_lattice_state(initial, model.internal_dim(), model.lattice_dim());
  const Index n = model.internal_dim();
  ExactDistribution out;
  out.horizon = p;
  detail::enumerate_paths(model, initial, p,
                          [&](const LatticePoint& start, const LatticePoint& disp,
                              const ComplexMatrix& block) {
                            auto [it, inserted] = out.masses.try_emplace(
                                start + disp, SiteMass{0.0, ComplexMatrix::Zero(n, n)});
                            it->second.block += block;
                          });
  for (auto& [_, mass] : out.masses) mass.probability = mass.block.trace().real();

  LatticeState iterated = initial;
  for (long k = 0; k < p; ++k) iterated = apply_M(model, iterated);
  std::map<LatticePoint, double> other;
  for (const auto& [site, block] : iterated.sites) other[site] = block.trace().real();
  double tv = 0.0;
  for (const auto& [site, mass] : out.masses) {
    auto it = other.find(site);
    tv += std::abs(mass.probability - (it == other.end() ? 0.0 : it->second));
  }
  for (const auto& [site, q] : other)
    if (!out.masses.count(site)) tv += std::abs(q);
  out.self_check_tv = tv / 2.0;
  if (out.self_check_tv > 1e-10) {
    std::ostringstream os;
    os << "path enumeration and iterated lattice map disagree: total variation "
       << out.self_check_tv;
    fail(ErrorKind::contract, os.str());
  }
  return out;
}

struct MgfCheck {
  double path_sum = 0.0;
  double superop_value = 0.0;
  double relative_difference() const {
    return std::abs(path_sum - superop_value) / std::max(std::abs(superop_value), 1e-300);
  }
};

/// E exp<u, X_p - X_0> two ways: a sum over paths, and traces of powers of
/// the tilted map.
inline MgfCheck mgf_check(const KrausModel& model, const LatticeState& initial, long p,
                          std::span<const double> u, const OracleLimits& lim = {}) {
  detail::require_oracle_scope(model, p, lim);
  validate_lattice_state(initial, model.internal_dim(), model.lattice_dim());
  MgfCheck out;
  std::vector<double> ud(u.begin(), u.end());
  detail::enumerate_paths(model, initial, p,
                          [&](const LatticePoint&, const LatticePoint& disp,
                              const ComplexMatrix& block) {
                            out.path_sum += block.trace().real() * std::exp(dot(ud, disp));
                          });
  const Superoperator tilted = deform(model, ud);
  for (const auto& [_, block] : initial.sites) {
    ComplexVector v = vec(block);
    for (long k = 0; k < p; ++k) v = tilted.matrix() * v;
    out.superop_value += unvec(v, model.internal_dim()).trace().real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch statistics

struct BatchOptions {
  long horizon = 1000;
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct BatchStatistics {
  RealVector mean;                      // sample mean of (X_P - X_0) / P
  RealMatrix variance;                  // sample covariance of (X_P - X_0) / sqrt(P)
  std::vector<LatticePoint> finals;     // X_P per trajectory
  std::vector<LatticePoint> displacements;  // X_P - X_0
  std::vector<std::uint64_t> seeds;
  RealMatrix standardized;              // count x d
  RealVector standardized_mean;
  double ks_distance = 0.0;
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// the standard normal.
inline double ks_distance_normal(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = standard_normal_cdf(samples[i]);
    worst = std::max({worst, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return worst;
}

/// Runs `count` trajectories with seeds mix64(seed ^ index). Each worker
/// writes only its own indices, so results do not depend on thread count.
inline std::vector<std::pair<LatticePoint, LatticePoint>> run_batch(const KrausModel& model,
                                                                    const LatticeState& initial,
                                                                    const BatchOptions& opt) {
  validate_lattice_state(initial, model.internal_dim(), model.lattice_dim());
  if (opt.horizon < 0) fail(ErrorKind::contract, "horizon must be nonnegative");
  const detail::SamplerKernel kernel(model);
  std::vector<std::pair<LatticePoint, LatticePoint>> out(opt.count);
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(opt.count, 1)));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned t) {
    try {
      for (std::size_t i = t; i < opt.count; i += threads) {
        CounterRng rng(derive_seed(opt.seed, i));
        LatticePoint start;
        const LatticePoint end = detail::run_trajectory(
            kernel, initial, opt.horizon, rng, &start,
            [](const LatticePoint&, const ComplexMatrix&, std::size_t) {});
        out[i] = {start, end};
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Pseudo-inverse square root of a symmetric PSD matrix, with the basis of
/// its kernel.
inline std::pair<RealMatrix, RealMatrix> inverse_sqrt_psd(const RealMatrix& c) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es((c + c.transpose()) / 2.0);
  const double top = std::max(0.0, es.eigenvalues().cwiseAbs().maxCoeff());
  RealVector inv = RealVector::Zero(c.rows());
  std::vector<Index> kernel;
  for (Index i = 0; i < c.rows(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > 1e-12 * std::max(top, 1e-300) && ev > 0.0)
      inv(i) = 1.0 / std::sqrt(ev);
    else
      kernel.push_back(i);
  }
  RealMatrix ker(c.rows(), static_cast<Index>(kernel.size()));
  for (std::size_t k = 0; k < kernel.size(); ++k)
    ker.col(static_cast<Index>(k)) = es.eigenvectors().col(kernel[k]);
  return {es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose(), ker};
}

inline BatchStatistics batch_statistics(const KrausModel& model, const LatticeState& initial,
                                        const RealVector& m, const RealMatrix& c,
                                        const BatchOptions& opt) {
  const int d = model.lattice_dim();
  if (m.size() != d || c.rows() != d || c.cols() != d)
    fail(ErrorKind::dimension, "drift and covariance must match the lattice dimension");
  const auto runs = run_batch(model, initial, opt);
  BatchStatistics out;
  const double count = static_cast<double>(opt.count);
  const double horizon = static_cast<double>(std::max(opt.horizon, 1L));
  RealMatrix disp(static_cast<Index>(opt.count), d);
  for (std::size_t i = 0; i < opt.count; ++i) {
    out.seeds.push_back(derive_seed(opt.seed, i));
    out.finals.push_back(runs[i].second);
    out.displacements.push_back(runs[i].second - runs[i].first);
    for (int j = 0; j < d; ++j)
      disp(static_cast<Index>(i), j) = static_cast<double>(out.displacements.back()[static_cast<std::size_t>(j)]);
  }
  out.mean = disp.colwise().mean().transpose() / horizon;
  const RealMatrix centered = (disp.rowwise() - disp.colwise().mean()) / std::sqrt(horizon);
  out.variance = centered.transpose() * centered / std::max(count - 1.0, 1.0);

  const auto [inv_sqrt, ker] = inverse_sqrt_psd(c);
  const RealMatrix shifted =
      (disp.rowwise() - (static_cast<double>(opt.horizon) * m).transpose()) / std::sqrt(horizon);
  if (ker.cols() > 0) {
    const double outside = (shifted * ker).cwiseAbs().maxCoeff();
    if (outside > 1e-6) {
      std::ostringstream os;
      os << "covariance is singular and centred displacements leave its support by " << outside;
      fail(ErrorKind::standardization, os.str());
    }
  }
  out.standardized = shifted * inv_sqrt;
  out.standardized_mean = out.standardized.colwise().mean().transpose();
  std::vector<double> first(out.standardized.col(0).data(),
                            out.standardized.col(0).data() + out.standardized.rows());
  out.ks_distance = first.empty() ? 0.0 : ks_distance_normal(std::move(first));
  return out;
}

// ---------------------------------------------------------------------------
// Initial states

/// delta_0 (x) X X^T / Tr(X X^T), X with independent uniform [0, 1) entries.
inline LatticeState random_initial(const KrausModel& model, std::uint64_t seed) {
  const Index n = model.internal_dim();
  CounterRng rng(seed);
  RealMatrix x(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) = rng.uniform();
  RealMatrix rho = x * x.transpose();
  rho /= rho.trace();
  return LatticeState::localized(LatticePoint(static_cast<std::size_t>(model.lattice_dim()), 0),
                                 DensityMatrix(rho.cast<Complex>()));
}

}  // namespace oqrw
