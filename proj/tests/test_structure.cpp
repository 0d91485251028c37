#include <gtest/gtest.h>

#include "support.hpp"

using namespace oqrw;
using namespace oqrw::testing;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

// algebra closure -----------------------------------------------------------

TEST(Algebra, DiagonalGeneratorsSpanDiagonal) {
  const std::vector<ComplexMatrix> gens{diag2(1, 2)};
  EXPECT_EQ(algebra_closure(gens, true).dimension(), 2);
}

TEST(Algebra, GenericPairIsFull) {
  CounterRng rng(11);
  const std::vector<ComplexMatrix> gens{gaussian_matrix(3, 3, rng), gaussian_matrix(3, 3, rng)};
  const auto a = algebra_closure(gens, true);
  EXPECT_TRUE(a.is_full());
  EXPECT_LT(a.closure_residual(), 1e-9);
}

TEST(Algebra, UpperTriangularStaysTriangular) {
  ComplexMatrix u(2, 2);
  u << 1, 1, 0, 2;
  const std::vector<ComplexMatrix> gens{u};
  EXPECT_EQ(algebra_closure(gens, true).dimension(), 2);
  ComplexMatrix v(2, 2);
  v << 0, 1, 0, 0;
  const std::vector<ComplexMatrix> pair{u, v};
  EXPECT_EQ(algebra_closure(pair, true).dimension(), 3);
}

TEST(Algebra, MismatchedDimensionsRejected) {
  const std::vector<ComplexMatrix> gens{ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)};
  EXPECT_THROW(algebra_closure(gens, true), Error);
}

// irreducibility of the auxiliary map ---------------------------------------

TEST(Structure, StdExampleIsIrreducibleAndRegular) {
  const auto model = builtin("std_example");
  const auto irr = is_irreducible_L(model);
  EXPECT_TRUE(irr.verdict);
  EXPECT_TRUE(irr.method_agreement);
  EXPECT_EQ(irr.fixed_space_dimension, 1u);
  EXPECT_EQ(period(model).d, 1);
  const auto reg = is_regular(model);
  EXPECT_TRUE(reg.regular);
  ASSERT_TRUE(reg.n_estimate);
  EXPECT_EQ(*reg.n_estimate, 1);
}

TEST(Structure, PeriodicExampleHasTwoCyclicBlocks) {
  const auto model = builtin("periodic_example");
  const auto per = period(model);
  ASSERT_EQ(per.d, 2);
  EXPECT_LT((per.projections[0] - diag2(1, 0)).norm(), 1e-10);
  EXPECT_LT((per.projections[1] - diag2(0, 1)).norm(), 1e-10);
  EXPECT_LT(cyclicity_residual(model, per.projections), 1e-12);
  const auto reg = is_regular(model);
  EXPECT_FALSE(reg.regular);
  EXPECT_FALSE(reg.n_estimate);
}

TEST(Structure, BreakdownExampleRecurrentSubspace) {
  const auto model = builtin("breakdown_example");
  EXPECT_FALSE(is_irreducible_L(model).verdict);
  EXPECT_THROW(period(model), Error);
}

TEST(Structure, BreakdownDecomposition) {
  const auto bn = bn_decomposition(builtin("breakdown_example"));
  ASSERT_EQ(bn.r_basis.cols(), 1);
  ASSERT_EQ(bn.d_basis.cols(), 1);
  EXPECT_NEAR(std::abs(bn.r_basis(0, 0)), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(bn.d_basis(1, 0)), 1.0, 1e-10);
  EXPECT_LT((bn.limit_state - diag2(1, 0)).norm(), 1e-10);
}

TEST(Structure, IrreducibleModelHasTrivialTransientPart) {
  const auto bn = bn_decomposition(builtin("std_example"));
  EXPECT_EQ(bn.r_basis.cols(), 2);
  EXPECT_EQ(bn.d_basis.cols(), 0);
}

TEST(Structure, RandomIsometryIsIrreducible) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto model = random_isometry_model(3, {{1}, {-1}, {2}}, seed);
    const auto irr = is_irreducible_L(model);
    EXPECT_TRUE(irr.verdict);
    EXPECT_TRUE(irr.method_agreement);
    EXPECT_TRUE(irr.algebra_full);
  }
}

TEST(Structure, DirectSumIsReducible) {
  std::vector<ComplexMatrix> ops{diag2(std::sqrt(0.5), std::sqrt(0.3)),
                                 diag2(std::sqrt(0.5), std::sqrt(0.7))};
  const KrausModel model(StepSet(1, {{1}, {-1}}), ops);
  const auto irr = is_irreducible_L(model);
  EXPECT_FALSE(irr.verdict);
  EXPECT_TRUE(irr.method_agreement);
  EXPECT_EQ(irr.fixed_space_dimension, 2u);
}

// C^2 classification --------------------------------------------------------

TEST(C2, SituationsOfBuiltins) {
  EXPECT_EQ(classify_c2(builtin("std_example")).situation, 1);
  EXPECT_EQ(classify_c2(builtin("breakdown_example")).situation, 2);
  EXPECT_EQ(classify_c2(builtin("antidiag_example")).situation, 1);
}

TEST(C2, SituationThreeForDiagonalModels) {
  const auto c = classify_c2(random_c2_model(C2Family::diagonal, 4));
  EXPECT_EQ(c.situation, 3);
  ASSERT_TRUE(c.basis);
  EXPECT_EQ(c.basis->cols(), 2);
}

TEST(C2, SituationTwoForTriangularModels) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = classify_c2(random_c2_model(C2Family::upper_triangular, seed));
    EXPECT_EQ(c.situation, 2) << "seed " << seed;
  }
}

TEST(C2, RejectsOtherShapes) {
  EXPECT_THROW(classify_c2(builtin("classical_dilation", 0.3)), Error);
  EXPECT_THROW(classify_c2(random_isometry_model(3, {{1}, {-1}}, 1)), Error);
}

// irreducibility of the lattice map -----------------------------------------

TEST(MIrreducibility, Builtins) {
  EXPECT_EQ(analyze_structure(builtin("std_example")).m_verdict, MVerdict::irreducible);
  EXPECT_EQ(analyze_structure(builtin("antidiag_example")).m_verdict, MVerdict::reducible);
  EXPECT_EQ(analyze_structure(builtin("breakdown_example")).m_verdict, MVerdict::reducible);
}

TEST(MIrreducibility, PathMethodFindsWitnessForDiagonalModel) {
  const auto r = is_irreducible_M(random_c2_model(C2Family::diagonal, 9), 10);
  EXPECT_EQ(r.verdict, MVerdict::reducible);
  ASSERT_TRUE(r.witness);
  EXPECT_GT(r.witness->cols(), 0);
  EXPECT_LT(r.witness->cols(), 2);
}

TEST(MIrreducibility, ClassifierAndPathsAgreeOnGenericModels) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = random_c2_model(C2Family::generic, seed);
    const auto c2 = c2_m_classifier(model);
    const auto paths = is_irreducible_M(model, default_return_path_length(model));
    EXPECT_TRUE(c2.m_irreducible);
    EXPECT_EQ(paths.verdict, MVerdict::irreducible) << "seed " << seed;
  }
}

TEST(MIrreducibility, StdExampleHasEvenPeriod) {
  const auto c2 = c2_m_classifier(builtin("std_example"));
  ASSERT_TRUE(c2.m_period);
  EXPECT_EQ(*c2.m_period, 2);
}

TEST(MIrreducibility, ClosureDimensionsAreMonotone) {
  const auto r = is_irreducible_M(builtin("std_example"), 8);
  for (std::size_t i = 1; i < r.dimension_by_length.size(); ++i)
    EXPECT_GE(r.dimension_by_length[i], r.dimension_by_length[i - 1]);
  EXPECT_EQ(r.dimension_by_length.back(), 4);
}

TEST(StructureReport, CarriesValidationFlags) {
  const auto r = analyze_structure(builtin("periodic_example"));
  EXPECT_LT(r.stochasticity_residual, 1e-12);
  EXPECT_TRUE(r.h1);
  EXPECT_TRUE(r.h2);
  ASSERT_TRUE(r.period);
  EXPECT_EQ(r.period->d, 2);
}
