#include <gtest/gtest.h>

#include "support.hpp"

using namespace oqrw;
using namespace oqrw::testing;

namespace {

double binomial_mass(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
         std::pow(p, k) * std::pow(1 - p, n - k);
}

std::vector<std::vector<double>> points(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> out;
  for (double x : xs) out.push_back({x});
  return out;
}

}  // namespace

// moments -------------------------------------------------------------------

TEST(Asymptotics, StdExampleMoments) {
  const auto s = asymptotic_stats(builtin("std_example"));
  EXPECT_NEAR(s.m(0), 0.0, 1e-12);
  EXPECT_NEAR(s.C(0, 0), 8.0 / 9.0, 1e-10);
  ComplexMatrix eta(2, 2);
  eta << 5, 2, 2, -5;
  eta /= 12.0;
  EXPECT_LT((s.eta_basis[0] - eta).norm(), 1e-10);
  EXPECT_LT(s.method_residuals.at("covariance_dual_max_diff"), 1e-10);
}

TEST(Asymptotics, ClassicalDilationMoments) {
  for (double p : {0.2, 0.5, 0.9}) {
    const auto s = asymptotic_stats(builtin("classical_dilation", p));
    EXPECT_NEAR(s.m(0), 2 * p - 1, 1e-12);
    EXPECT_NEAR(s.C(0, 0), 4 * p * (1 - p), 1e-10);
  }
}

TEST(Asymptotics, PeriodicMoments) {
  const auto s = asymptotic_stats(builtin("periodic_example"));
  EXPECT_NEAR(s.m(0), 0.25, 1e-12);
  EXPECT_NEAR(s.C(0, 0), 0.875, 1e-10);
}

TEST(Asymptotics, TwoDimensionalCovarianceIsSymmetricPsd) {
  const auto model = random_isometry_model(2, {{1, 0}, {0, 1}, {-1, -1}}, 17);
  const auto s = asymptotic_stats(model);
  EXPECT_LT((s.C - s.C.transpose()).norm(), 1e-10);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s.C);
  EXPECT_GT(es.eigenvalues()(0), -1e-12);
  EXPECT_LT(s.method_residuals.at("covariance_dual_max_diff"), 1e-8);
}

TEST(Asymptotics, InvariantStateRequiresUniqueness) {
  try {
    invariant_state(builtin("breakdown_example"));
    SUCCEED();
  } catch (const Error& e) {
    ADD_FAILURE() << e.what();
  }
  std::vector<ComplexMatrix> ops{ComplexMatrix::Identity(2, 2) * std::sqrt(0.5),
                                 ComplexMatrix::Identity(2, 2) * std::sqrt(0.5)};
  const KrausModel scalar(StepSet(1, {{1}, {-1}}), ops);
  try {
    invariant_state(scalar);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::multiplicity);
  }
}

// lambda and rate -----------------------------------------------------------

TEST(Lambda, StdExampleClosedForm) {
  const auto model = builtin("std_example");
  for (double u : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    const std::vector<double> uu{u};
    EXPECT_NEAR(lambda(model, uu) / std_example_lambda(u), 1.0, 1e-12) << "u=" << u;
  }
}

TEST(Lambda, PeriodicClosedForm) {
  const auto model = builtin("periodic_example");
  for (double u : {-1.0, 0.0, 0.8}) {
    const std::vector<double> uu{u};
    EXPECT_NEAR(log_lambda(model, uu), periodic_log_lambda(u), 1e-12);
  }
}

TEST(Lambda, LogLambdaAvoidsOverflow) {
  const std::vector<double> u{800.0};
  EXPECT_NEAR(log_lambda(builtin("classical_dilation", 0.5), u), 800 + std::log(0.5), 1e-9);
}

TEST(Lambda, BreakdownKinkLocation) {
  const auto curve = lambda_curve(builtin("breakdown_example"), regular_grid(1, -2, 2, 81));
  ASSERT_EQ(curve.kinks.size(), 1u);
  const auto& k = curve.kinks[0];
  EXPECT_NEAR(k.u, 0.5 * std::log(2.0), 1e-6);
  EXPECT_NEAR(k.log_left_slope, 1.0 / 3.0, 1e-4);
  EXPECT_NEAR(k.log_right_slope, 1.0, 1e-4);
  EXPECT_FALSE(curve.irreducible);
  ASSERT_TRUE(curve.restricted_log_lambda);
  for (std::size_t i = 0; i < curve.u.size(); ++i)
    EXPECT_NEAR(curve.log_lambda[i], std::log(breakdown_lambda(curve.u[i][0])), 1e-10);
}

TEST(Lambda, SmoothModelsHaveNoKinks) {
  EXPECT_TRUE(lambda_curve(builtin("std_example"), regular_grid(1, -2, 2, 41)).kinks.empty());
}

TEST(Rate, PeriodicClosedForm) {
  const auto t = rate_function(builtin("periodic_example"), points({0.0, 0.25, 0.5, -0.5}));
  EXPECT_NEAR(t.rate[1], 0.0, 1e-10);
  for (std::size_t i = 0; i < t.rate.size(); ++i)
    EXPECT_NEAR(t.rate[i], periodic_rate(t.x_grid[i][0]), 1e-8);
}

TEST(Rate, ClassicalDilationMatchesBernoulliEntropy) {
  const double p = 0.3;
  const auto t = rate_function(builtin("classical_dilation", p), points({-0.6, 0.0, 0.5}));
  for (std::size_t i = 0; i < t.rate.size(); ++i) {
    const double q = (1 + t.x_grid[i][0]) / 2;
    const double expected = q * std::log(q / p) + (1 - q) * std::log((1 - q) / (1 - p));
    EXPECT_NEAR(t.rate[i], expected, 1e-8);
  }
}

TEST(Rate, OutsideSupportHitsCap) {
  const auto t = rate_function(builtin("std_example"), points({1.5}));
  EXPECT_TRUE(std::isinf(t.rate[0]));
}

TEST(Rate, WindowErrorWithoutExtensions) {
  RateOptions opt;
  opt.u_min = -1;
  opt.u_max = 1;
  opt.u_points = 21;
  opt.max_extensions = 0;
  try {
    rate_function(builtin("std_example"), points({0.95}), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::window);
  }
}

TEST(Rate, ReducibleModelIsUpperBoundOnly) {
  const auto t = rate_function(builtin("breakdown_example"), points({0.0}));
  EXPECT_TRUE(t.upper_bound_only);
  EXPECT_EQ(t.kinks.size(), 1u);
}

// C^2 parameters ------------------------------------------------------------

TEST(C2Parameters, SituationOneMatchesGenericFormulas) {
  const auto model = builtin("std_example");
  const auto c2 = c2_parameters(model, default_initial_state(model));
  EXPECT_EQ(c2.situation, 1);
  EXPECT_NEAR(c2.m(0), 0.0, 1e-12);
  EXPECT_NEAR(c2.C(0, 0), 8.0 / 9.0, 1e-10);
}

TEST(C2Parameters, SituationTwoUsesRecurrentLaw) {
  const auto model = builtin("breakdown_example");
  const auto c2 = c2_parameters(model, default_initial_state(model));
  EXPECT_EQ(c2.situation, 2);
  EXPECT_NEAR(c2.m(0), 0.0, 1e-12);
  EXPECT_NEAR(c2.C(0, 0), 1.0, 1e-12);
}

TEST(C2Parameters, SituationThreeIsMixture) {
  const auto model = random_c2_model(C2Family::diagonal, 4);
  const auto c2 = c2_parameters(model, random_initial(model, 8));
  EXPECT_EQ(c2.situation, 3);
  ASSERT_TRUE(c2.mixture_weight);
  EXPECT_GE(*c2.mixture_weight, 0.0);
  EXPECT_LE(*c2.mixture_weight, 1.0);
}

// exact oracle --------------------------------------------------------------

TEST(Oracle, ClassicalDilationIsBinomial) {
  const double p = 0.3;
  const auto model = builtin("classical_dilation", p);
  const int n = 10;
  const auto dist = exact_distribution(model, default_initial_state(model), n);
  EXPECT_LT(dist.self_check_tv, 1e-12);
  for (int k = 0; k <= n; ++k) {
    const LatticePoint x{2 * k - n};
    ASSERT_TRUE(dist.masses.count(x));
    EXPECT_NEAR(dist.masses.at(x).probability, binomial_mass(n, k, p), 1e-14);
  }
}

TEST(Oracle, ClassicalDilationMgf) {
  const double p = 0.3, u = 0.4;
  const auto model = builtin("classical_dilation", p);
  const std::vector<double> uu{u};
  const auto r = mgf_check(model, default_initial_state(model), 12, uu);
  EXPECT_NEAR(r.path_sum, std::pow(p * std::exp(u) + (1 - p) * std::exp(-u), 12), 1e-10);
  EXPECT_LT(r.relative_difference(), 1e-12);
}

TEST(Oracle, BreakdownTopMassCorrectedForm) {
  const auto model = builtin("breakdown_example");
  for (int n = 1; n <= 12; ++n) {
    const auto dist = exact_distribution(model, localized_pure(model, 1), n);
    EXPECT_NEAR(dist.masses.at(LatticePoint{n}).probability, breakdown_top_mass_corrected(n), 1e-13)
        << "n=" << n;
  }
}

TEST(Oracle, ScopeLimits) {
  const auto model = builtin("std_example");
  try {
    exact_distribution(model, default_initial_state(model), 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::scope);
  }
}

// trajectories --------------------------------------------------------------

TEST(Trajectories, DeterministicWalk) {
  const auto model = builtin("classical_dilation", 1.0);
  const auto t = sample_trajectory(model, default_initial_state(model), 10, 5);
  ASSERT_EQ(t.positions.size(), 11u);
  EXPECT_EQ(t.positions.back(), LatticePoint{10});
  EXPECT_EQ(t.steps.size(), 10u);
}

TEST(Trajectories, StatesStayNormalized) {
  const auto model = builtin("std_example");
  const auto t = sample_trajectory(model, default_initial_state(model), 200, 3);
  for (const auto& s : t.states) EXPECT_NEAR(s.matrix().trace().real(), 1.0, 1e-10);
}

TEST(Trajectories, SameSeedSameTrajectory) {
  const auto model = builtin("periodic_example");
  const auto a = sample_trajectory(model, default_initial_state(model), 100, 77);
  const auto b = sample_trajectory(model, default_initial_state(model), 100, 77);
  EXPECT_EQ(a.positions, b.positions);
}

TEST(Trajectories, BatchIndependentOfThreadCount) {
  const auto model = builtin("std_example");
  BatchOptions opt;
  opt.horizon = 50;
  opt.count = 64;
  opt.seed = 123;
  opt.threads = 1;
  const auto one = run_batch(model, default_initial_state(model), opt);
  opt.threads = 4;
  const auto four = run_batch(model, default_initial_state(model), opt);
  EXPECT_EQ(one, four);
}

TEST(Trajectories, BatchStatisticsOfStdExample) {
  const auto model = builtin("std_example");
  const auto s = asymptotic_stats(model);
  BatchOptions opt;
  opt.horizon = 400;
  opt.count = 2000;
  opt.seed = 9;
  const auto b = batch_statistics(model, default_initial_state(model), s.m, s.C, opt);
  EXPECT_NEAR(b.variance(0, 0), 8.0 / 9.0, 0.1);
  EXPECT_LT(std::abs(b.standardized_mean(0)), 0.1);
  EXPECT_LT(b.ks_distance, 0.06);
  EXPECT_EQ(b.seeds.size(), opt.count);
}

TEST(Trajectories, KsDistanceOfExactQuantiles) {
  std::vector<double> z;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    // Inverse normal cdf by bisection on the library cdf.
    double lo = -10, hi = 10, q = (i + 0.5) / n;
    for (int it = 0; it < 100; ++it) {
      const double mid = (lo + hi) / 2;
      (standard_normal_cdf(mid) < q ? lo : hi) = mid;
    }
    z.push_back(lo);
  }
  EXPECT_NEAR(ks_distance_normal(z), 0.5 / n, 1e-9);
}
