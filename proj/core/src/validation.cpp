#include <algorithm>
#include <cmath>

#include "scare/generators.hpp"
#include "scare/kernels.hpp"
#include "scare/oracles.hpp"
#include "scare/radi.hpp"

namespace scare {

namespace {

double rel(const Matrix& a, const Matrix& b) {
  const double d = (a - b).norm();
  if (d == 0.0) return 0.0;
  return d / std::max(a.norm(), b.norm());
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed) {
  std::vector<OracleCheck> out;
  Rng rng(seed);

  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Matrix u = rng.matrix(2, 1);
    const Matrix v = rng.matrix(1, 2);
    const auto d = ltimes_identities_check(u, v);
    worst = std::max(worst, d.max());
  }
  out.push_back({"semi-tensor push-through identities", worst, 1e-11});

  worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const StandardProblem p = gen_random_problem(60, 3, 2, 1, seed + 100 + i);
    const Matrix f = rng.matrix(3, 60);
    const Matrix rows = rng.matrix(4, 60);
    const ShiftedFactorization fac(p.A, nullptr, 0.8);
    const Matrix got = smw_row_solve(fac, p.B, f, rows);
    const Matrix dense = Matrix(p.A) + p.B * f - 0.8 * Matrix::Identity(60, 60);
    worst = std::max(worst, rel(got, rows * dense.inverse()));
  }
  out.push_back({"SMW shifted solve vs dense inverse", worst, 1e-10});

  {
    SparseMatrix a(1, 1);
    a.insert(0, 0) = -1.0;
    const auto p = StandardProblem::make(a, Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    const auto chk = residual_formula_check(p, 1.0);
    const double err = std::abs(residual_dense(p, chk.X)(0, 0) - 1.0 / 25.0) +
                       std::abs(chk.Ctilde(0, 0) * chk.Ctilde(0, 0) - 1.0 / 25.0);
    out.push_back({"scalar residual formula C(2/5) = 1/25", err, 1e-15});
  }

  worst = 0.0;
  for (Index r : {1, 2, 3}) {
    const StandardProblem p = gen_random_problem(20, 2, 3, r, seed + 200 + r);
    for (double g : {0.1, 1.0, 10.0}) worst = std::max(worst, residual_formula_check(p, g).deviation);
  }
  out.push_back({"low-rank residual formula", worst, 1e-10});

  worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    const StandardProblem p = gen_random_problem(15, 2, 2, 3, seed + 300 + i);
    Matrix g = rng.matrix(15, 15);
    const Matrix x = 0.1 * g * g.transpose();
    const Matrix h = rng.matrix(15, 15);
    const Matrix d = 0.05 * (h + h.transpose());
    worst = std::max(worst, rel(incorporation_residual_dense(p, x, d), residual_dense(p, x + d)));
  }
  out.push_back({"incorporation identity", worst, 1e-9});

  {
    const StandardProblem p = gen_random_problem(20, 2, 2, 1, seed + 400);
    const DenseSolution a = newton_ref_solve(p);
    const DenseSolution b = care_schur_solve(Matrix(p.A), p.B, p.C);
    out.push_back({"Newton vs Hamiltonian Schur (r = 1)", rel(a.X, b.X), 1e-10});
  }

  {
    const StandardProblem p = gen_random_problem(20, 2, 2, 3, seed + 500);
    const DenseSolution ref = newton_ref_solve(p);
    const SolveResult res = radi_solve(p);
    out.push_back({"RADI vs Newton (r = 3)", rel(res.state.x_dense(), ref.X), 1e-8});
  }
  return out;
}

}  // namespace scare
