#include <gtest/gtest.h>

#include <cmath>

#include "scare/errors.hpp"
#include "scare/generators.hpp"
#include "scare/oracles.hpp"
#include "scare/problem.hpp"
#include "scare/radi.hpp"
#include "support.hpp"

namespace scare {
namespace {

using testing::rel_diff;

SparseMatrix scalar(double v) {
  SparseMatrix s(1, 1);
  s.insert(0, 0) = v;
  return s;
}

OriginalProblem scalar_original(double r) {
  OriginalProblem o;
  o.A_list = {scalar(-1.0)};
  o.B_list = {Matrix::Ones(1, 1)};
  o.C0 = Matrix::Ones(1, 1);
  o.L = Matrix::Zero(1, 1);
  o.R = Matrix::Constant(1, 1, r);
  return o;
}

TEST(Standardize, ScalarWeight) {
  const StandardProblem p = standardize(scalar_original(4.0));
  EXPECT_DOUBLE_EQ(p.B(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(Matrix(p.A)(0, 0), -1.0);
  EXPECT_FALSE(p.kron_flip);
  EXPECT_EQ(p.Kpi0, Matrix::Identity(1, 1));
}

TEST(Standardize, TrivialWeightsKeepCoefficients) {
  OriginalProblem o = gen_random_original(8, 2, 2, 3, 4);
  o.L.setZero();
  o.R = Matrix::Identity(2, 2);
  const StandardProblem p = standardize(o);
  EXPECT_EQ(Matrix(p.A), Matrix(o.A_list[0]));
  EXPECT_EQ(p.B, o.B_list[0]);
  EXPECT_EQ(Matrix(p.Ahat.block(1)), Matrix(o.A_list[2]));
}

TEST(Standardize, RejectsIndefiniteR) {
  OriginalProblem o = scalar_original(-1.0);
  EXPECT_THROW(standardize(o), AssumptionViolation);
  EXPECT_THROW(adapt_in_place(o), AssumptionViolation);
}

TEST(Adapter, ScalarWeight) {
  const StandardProblem p = adapt_in_place(scalar_original(4.0));
  EXPECT_DOUBLE_EQ(p.Kpi0(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(p.F0(0, 0), 0.0);
  EXPECT_TRUE(p.kron_flip);
}

TEST(Adapter, TrivialWeightsGiveIdentitySetup) {
  OriginalProblem o = gen_random_original(6, 2, 1, 2, 5);
  o.L.setZero();
  o.R = Matrix::Identity(2, 2);
  const StandardProblem p = adapt_in_place(o);
  EXPECT_EQ(p.F0, Matrix::Zero(2, 6));
  EXPECT_EQ(p.Kpi0, Matrix::Identity(2, 2));
  EXPECT_EQ(Matrix(p.Ahat.block(0)), Matrix(o.A_list[1]));
}

TEST(Residual, AtZeroIsConstantTerm) {
  const StandardProblem p = gen_random_problem(10, 2, 3, 3, 6);
  EXPECT_EQ(residual_dense(p, Matrix::Zero(10, 10)), p.C.transpose() * p.C);
  EXPECT_EQ(feedback_dense(p, Matrix::Zero(10, 10)), Matrix::Zero(2, 10));
}

TEST(Residual, ScalarCareRoot) {
  const StandardProblem p = StandardProblem::make(scalar(-1.0), Matrix::Ones(1, 1),
                                                  Matrix::Ones(1, 1));
  const Matrix x = Matrix::Constant(1, 1, std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(residual_dense(p, x)(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(feedback_dense(p, x)(0, 0), 1.0 - std::sqrt(2.0), 1e-15);
}

TEST(Residual, SymmetricOutput) {
  Rng rng(7);
  const StandardProblem p = gen_random_problem(12, 2, 2, 3, 7);
  const Matrix x = 0.1 * testing::random_spd(12, rng);
  const Matrix res = residual_dense(p, x);
  EXPECT_LT((res - res.transpose()).norm(), 1e-14 * res.norm());
}

TEST(Residual, StandardFormMatchesOriginal) {
  // Any X: the standardized residual equals the original one.
  Rng rng(8);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const OriginalProblem o = gen_random_original(10, 2, 2, 3, seed);
    const Matrix x = 0.2 * testing::random_spd(10, rng);
    EXPECT_LT(rel_diff(residual_dense(standardize(o), x), residual_original_dense(o, x)), 1e-12);
    EXPECT_LT(rel_diff(residual_dense(adapt_in_place(o), x), residual_original_dense(o, x)),
              1e-12);
  }
}

TEST(Residual, OracleSolutionZeroInBothForms) {
  const OriginalProblem o = gen_random_original(20, 2, 2, 3, 9);
  const DenseSolution s = newton_ref_solve(standardize(o));
  const Matrix q = o.C0.transpose() * o.C0;
  EXPECT_LT(residual_original_dense(o, s.X).norm(), 1e-10 * q.norm());
  EXPECT_LT(residual_dense(adapt_in_place(o), s.X).norm(), 1e-10 * q.norm());
}

TEST(Feedback, OriginalFeedbackRelation) {
  Rng rng(10);
  const OriginalProblem o = gen_random_original(9, 2, 2, 2, 10);
  const Matrix x = 0.3 * testing::random_spd(9, rng);
  const Matrix p = chol_spd(o.R);
  const Matrix rinv_lt = Eigen::LLT<Matrix>(o.R).solve(Matrix(o.L.transpose()));
  const Matrix expect =
      -rinv_lt + p.triangularView<Eigen::Upper>().solve(feedback_dense(standardize(o), x));
  EXPECT_LT(rel_diff(original_feedback(o, x), expect), 1e-12);
}

TEST(Residual, DenseGuard) {
  const StandardProblem p = gen_heat_problem(2001, 1, 1, 1);
  EXPECT_THROW(effective_dense(p), Error);
}

TEST(Incorporation, TrivialCases) {
  Rng rng(11);
  const StandardProblem p = gen_random_problem(10, 2, 2, 2, 11);
  const Matrix x = 0.1 * testing::random_spd(10, rng);
  const Matrix d = 0.1 * testing::random_symmetric(10, rng);
  const Matrix zero = Matrix::Zero(10, 10);
  EXPECT_LT(rel_diff(incorporation_residual_dense(p, x, zero), residual_dense(p, x)), 1e-13);
  EXPECT_LT(rel_diff(incorporation_residual_dense(p, zero, d), residual_dense(p, d)), 1e-14);
}

TEST(Incorporation, MatchesShiftedResidualOnRandomPairs) {
  Rng rng(12);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Index n = 5 + static_cast<Index>(seed % 36);
    const Index r = 1 + static_cast<Index>(seed % 4);
    RandomOptions opts;
    opts.mass = seed % 5 == 0;
    const StandardProblem p = gen_random_problem(n, 2, 2, r, seed, opts);
    const Matrix x = 0.1 * testing::random_spd(n, rng);
    const Matrix d = 0.05 * testing::random_symmetric(n, rng);
    EXPECT_LT(rel_diff(incorporation_residual_dense(p, x, d), residual_dense(p, x + d)), 1e-9)
        << "seed " << seed;
  }
}

TEST(Incorporation, IndefiniteMiddleMatrix) {
  const StandardProblem p = gen_random_problem(6, 1, 1, 2, 13);
  const Matrix x = -1e6 * Matrix::Identity(6, 6);
  EXPECT_THROW(incorporation_residual_dense(p, x, Matrix::Zero(6, 6)), DefinitenessError);
}

TEST(Routes, AdapterAndStandardIteratesAgree) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const OriginalProblem o = gen_random_original(15 + 5 * seed, 2, 2, 2 + seed % 2, seed);
    const StandardProblem ps = standardize(o);
    const StandardProblem pa = adapt_in_place(o);
    SolverState ss = init_state(ps);
    SolverState sa = init_state(pa);
    for (int k = 0; k < 10; ++k) {
      const double g = 0.5 + 0.3 * k;
      step_once(ps, ss, g);
      step_once(pa, sa, g);
      EXPECT_LT(rel_diff(ss.x_dense(), sa.x_dense()), 1e-9) << "seed " << seed << " k " << k;
    }
  }
}

TEST(Validate, ShapeErrors) {
  EXPECT_THROW(StandardProblem::make(scalar(1.0), Matrix::Ones(2, 1), Matrix::Ones(1, 1)),
               DimensionError);
  OriginalProblem o = scalar_original(1.0);
  o.B_list.push_back(Matrix::Ones(1, 1));
  EXPECT_THROW(o.validate(), DimensionError);
}

}  // namespace
}  // namespace scare
