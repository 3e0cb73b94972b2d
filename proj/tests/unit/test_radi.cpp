#include <gtest/gtest.h>

#include <cmath>
#include <ostream>

#include "scare/errors.hpp"
#include "scare/oracles.hpp"
#include "scare/radi.hpp"
#include "support.hpp"

namespace scare {
namespace {

using testing::rel_diff;

StandardProblem scalar_problem() {
  SparseMatrix a(1, 1);
  a.insert(0, 0) = -1.0;
  return StandardProblem::make(a, Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

SolveOptions exact_options() {
  SolveOptions o;
  o.trunc_rel = 0.0;
  o.cap_cols = 100000;
  return o;
}

TEST(RadiStep, ScalarOptimalShiftSolvesInOneStep) {
  const StandardProblem p = scalar_problem();
  SolverState st = init_state(p);
  step_once(p, st, std::sqrt(2.0));
  EXPECT_NEAR(st.x_dense()(0, 0), std::sqrt(2.0) - 1.0, 1e-15);
  EXPECT_LT(nres_trace(st), 1e-28);
}

TEST(RadiStep, FirstStepIsPlainShiftedSolve) {
  const StandardProblem p = gen_random_problem(12, 2, 3, 2, 5);
  SolverState st = init_state(p);
  const double g = 1.3;
  const IterationScratch sc = step_once(p, st, g);
  const Matrix dense_a = Matrix(p.A) - g * Matrix::Identity(12, 12);
  const Matrix expect = std::sqrt(2 * g) * p.C * dense_a.inverse();
  EXPECT_LT(rel_diff(sc.C_gamma, expect), 1e-13);
}

TEST(RadiStep, KeepsStateOnRejectedShift) {
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, -2.0}};
  SparseMatrix a(2, 2);
  a.setFromTriplets(t.begin(), t.end());
  const StandardProblem p = StandardProblem::make(a, Matrix::Ones(2, 1), Matrix::Identity(2, 2));
  SolverState st = init_state(p);
  EXPECT_THROW(step_once(p, st, 1.0), ShiftRejected);
  EXPECT_EQ(st.k, 0);
  EXPECT_EQ(st.xi_cols, 0);
  EXPECT_EQ(st.C, p.C);
}

TEST(RadiStep, NonPositiveShiftIsRejected) {
  const StandardProblem p = scalar_problem();
  SolverState st = init_state(p);
  EXPECT_THROW(step_once(p, st, 0.0), ShiftRejected);
  EXPECT_THROW(step_once(p, st, -1.0), ShiftRejected);
}

struct BookkeepingCase {
  Index n, r;
  bool mass;
  bool adapter;
};

void PrintTo(const BookkeepingCase& c, std::ostream* os) { *os << "n " << c.n << ", r " << c.r; }

class Bookkeeping : public ::testing::TestWithParam<BookkeepingCase> {};

TEST_P(Bookkeeping, ResidualEqualsTrackedFactorWithoutTruncation) {
  const auto c = GetParam();
  RandomOptions ro;
  ro.mass = c.mass;
  StandardProblem p;
  if (c.adapter) {
    p = adapt_in_place(gen_random_original(c.n, 2, 2, c.r, 11, ro));
  } else {
    p = gen_random_problem(c.n, 2, 2, c.r, 11, ro);
  }
  const SolveOptions opts = exact_options();
  SolverState st = init_state(p, opts);
  const double scale = (p.C.transpose() * p.C).norm();
  const double shifts[] = {0.7, 2.0, 1.1, 3.5, 0.9, 1.6};
  for (double g : shifts) {
    step_once(p, st, g, opts);
    const Matrix x = st.x_dense();
    const Matrix res = residual_dense(p, x);
    EXPECT_LT((res - st.C.transpose() * st.C).norm() / scale, 1e-11) << "k = " << st.k;
    // The accumulated feedback is the feedback of the current iterate.
    const Matrix fhat = feedback_dense(p, x);
    const Matrix f_eff = p.Kpi0 * (st.F - p.F0);
    EXPECT_LT(rel_diff(f_eff, fhat), 1e-10) << "k = " << st.k;
    const DenseCoefficients dc = effective_dense(p);
    const Matrix kk = (st.Kpi * p.Kpi0.inverse());
    EXPECT_LT(rel_diff(kk.transpose() * kk, middle_matrix(dc, x)), 1e-11);
  }
}

INSTANTIATE_TEST_SUITE_P(Problems, Bookkeeping,
                         ::testing::Values(BookkeepingCase{1, 1, false, false},
                                           BookkeepingCase{20, 1, false, false},
                                           BookkeepingCase{30, 3, false, false},
                                           BookkeepingCase{25, 4, true, false},
                                           BookkeepingCase{20, 2, false, true},
                                           BookkeepingCase{20, 3, true, true}),
                         [](const ::testing::TestParamInfo<BookkeepingCase>& info) {
                           const BookkeepingCase& c = info.param;
                           return "n" + std::to_string(c.n) + "_r" + std::to_string(c.r) +
                                  (c.mass ? "_mass" : "") + (c.adapter ? "_adapter" : "");
                         });

TEST(RadiStep, TruncationDebtIsAccountedExactly) {
  const StandardProblem p = gen_random_problem(30, 2, 3, 3, 21);
  SolveOptions opts;
  opts.trunc_rel = 1e-6;
  opts.keep_discarded_gram = true;
  SolverState st = init_state(p, opts);
  const double scale = (p.C.transpose() * p.C).norm();
  double prev_omega = 0.0;
  for (double g : {0.5, 1.0, 2.0, 4.0, 1.5, 0.8, 3.0, 1.2}) {
    step_once(p, st, g, opts);
    const Matrix res = residual_dense(p, st.x_dense());
    const Matrix tracked = st.C.transpose() * st.C + *st.discarded_gram;
    EXPECT_LT((res - tracked).norm() / scale, 1e-11);
    EXPECT_GE(st.nu_omega, prev_omega);
    EXPECT_NEAR(st.discarded_gram->trace(), st.nu_omega, 1e-12 * st.nu0 + 1e-9 * st.nu_omega);
    prev_omega = st.nu_omega;
  }
  EXPECT_GT(st.nu_omega, 0.0);
}

TEST(RadiSolve, ZeroRightHandSideReturnsImmediately) {
  StandardProblem p = gen_random_problem(10, 2, 2, 2, 3);
  p.C.setZero();
  const SolveResult res = radi_solve(p);
  EXPECT_TRUE(res.report.converged);
  EXPECT_EQ(res.report.iterations, 0);
  EXPECT_EQ(res.state.xi_cols, 0);
  EXPECT_THROW(nres_trace(res.state), DegenerateProblem);
}

TEST(RadiSolve, UnitToleranceNeedsNoIteration) {
  const StandardProblem p = gen_random_problem(10, 2, 2, 2, 3);
  SolveOptions o;
  o.tol_nres = 1.0;
  const SolveResult res = radi_solve(p, o);
  EXPECT_TRUE(res.report.converged);
  EXPECT_EQ(res.report.iterations, 0);
  ASSERT_EQ(res.report.records.size(), 1u);
  EXPECT_EQ(res.report.records[0].nres, 1.0);
}

TEST(RadiSolve, MatchesNewtonReference) {
  const StandardProblem p = gen_random_problem(20, 2, 2, 3, 8);
  const SolveResult res = radi_solve(p);
  ASSERT_TRUE(res.report.converged) << res.report.final_nres;
  const DenseSolution ref = newton_ref_solve(p);
  EXPECT_LT(rel_diff(res.state.x_dense(), ref.X), 1e-8);
}

TEST(RadiSolve, ClassicalCareMatchesSchurReference) {
  const StandardProblem p = gen_random_problem(40, 3, 2, 1, 9);
  const SolveResult res = radi_solve(p);
  ASSERT_TRUE(res.report.converged);
  const DenseSolution ref = care_schur_solve(Matrix(p.A), p.B, p.C);
  EXPECT_LT(rel_diff(res.state.x_dense(), ref.X), 1e-8);
}

TEST(RadiSolve, GeneralizedProblemMatchesNewton) {
  RandomOptions ro;
  ro.mass = true;
  const StandardProblem p = gen_random_problem(18, 2, 2, 2, 13, ro);
  const SolveResult res = radi_solve(p);
  ASSERT_TRUE(res.report.converged);
  const DenseSolution ref = newton_ref_solve(p);
  EXPECT_LT(rel_diff(res.state.x_dense(), ref.X), 1e-8);
}

TEST(RadiSolve, ReportTraceIsConsistent) {
  const StandardProblem p = gen_random_problem(30, 2, 2, 2, 4);
  SolveOptions o;
  o.shift = ShiftConfig::parse("proj c 2");
  const SolveResult res = radi_solve(p, o);
  ASSERT_TRUE(res.report.converged);
  const auto& recs = res.report.records;
  ASSERT_EQ(static_cast<long>(recs.size()), res.report.iterations + 1);
  EXPECT_EQ(recs.front().nres, 1.0);
  EXPECT_DOUBLE_EQ(recs.back().nres, nres_trace(res.state));
  EXPECT_EQ(recs.back().cols_Xi, res.state.xi_cols);
  for (size_t i = 1; i < recs.size(); ++i) {
    EXPECT_GT(recs[i].gamma, 0.0);
    EXPECT_GE(recs[i].nu_omega, recs[i - 1].nu_omega);
    EXPECT_LE(recs[i].cols_C, default_cap_cols(p));
  }
  EXPECT_EQ(res.report.shift_label, "proj c 2");
  EXPECT_NE(res.report.solver_backend.find("SparseLU"), std::string::npos);
}

TEST(RadiSolve, RejectedShiftIsPerturbedAndRecorded) {
  // A has the eigenvalue 1, so the supplied shift 1 hits a singular A - gamma I.
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, -2.0}};
  SparseMatrix b(2, 2);
  b.setFromTriplets(t.begin(), t.end());
  const StandardProblem p = StandardProblem::make(b, Matrix::Ones(2, 1), Matrix::Identity(2, 2));
  SolveOptions o;
  o.fixed_shifts = {1.0};
  o.max_iter = 1;
  const SolveResult res = radi_solve(p, o);
  ASSERT_EQ(res.report.records.size(), 2u);
  EXPECT_EQ(res.report.records[1].rejections, 1);
  EXPECT_NEAR(res.report.records[1].gamma, 1.1, 1e-15);
}

TEST(RadiSolve, WidthBudgetRaisesFlag) {
  const StandardProblem p = gen_random_problem(30, 2, 3, 2, 4);
  SolveOptions o;
  o.max_xi_cols = 6;
  const SolveResult res = radi_solve(p, o);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.flags, "m");
  EXPECT_GE(res.state.xi_cols, 6);
}

TEST(RadiSolve, StallRuleRaisesFlag) {
  const StandardProblem p = gen_random_problem(30, 2, 3, 3, 4);
  SolveOptions o;
  o.trunc_rel = 1e-9;  // leaves a debt well above tol_nres
  o.stop_on_stall = true;
  o.stall_tol = 1e-10;
  const SolveResult res = radi_solve(p, o);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.flags, "t");
  EXPECT_LT(res.state.C.squaredNorm() / res.state.nu0, 1e-10);
}

TEST(RadiSolve, MaxIterStopsUnconverged) {
  const StandardProblem p = gen_random_problem(30, 2, 3, 2, 4);
  SolveOptions o;
  o.max_iter = 2;
  const SolveResult res = radi_solve(p, o);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.iterations, 2);
  EXPECT_EQ(res.report.stop_reason, "max_iter");
}

TEST(RadiSolve, ExhaustedFactorStopsWithDebt) {
  // A one-column cap discards nearly everything; once C is empty only the
  // debt remains and the loop has nothing left to do.
  const StandardProblem p = gen_random_problem(20, 2, 3, 3, 6);
  SolveOptions o;
  o.cap_cols = 1;
  o.trunc_rel = 1e-3;
  o.max_iter = 100;
  const SolveResult res = radi_solve(p, o);
  EXPECT_FALSE(res.report.converged);
  ASSERT_EQ(res.state.C.rows(), 0);
  EXPECT_EQ(res.report.stop_reason, "exhausted");
  EXPECT_GT(res.report.final_nres, o.tol_nres);
  EXPECT_NEAR(res.report.final_nres, res.state.nu_omega / res.state.nu0, 1e-15);
}

}  // namespace
}  // namespace scare
