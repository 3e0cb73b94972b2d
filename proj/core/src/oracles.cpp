#include "scare/oracles.hpp"

#include <cmath>
#include <vector>

#include "scare/errors.hpp"
#include "scare/kernels.hpp"

extern "C" {
void dgees_(const char* jobvs, const char* sort, int (*select)(const double*, const double*),
            const int* n, double* a, const int* lda, int* sdim, double* wr, double* wi, double* vs,
            const int* ldvs, double* work, const int* lwork, int* bwork, int* info,
            size_t jobvs_len, size_t sort_len);
}

namespace scare {

namespace {

int select_stable(const double* wr, const double* /*wi*/) { return *wr < 0.0 ? 1 : 0; }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

DenseSolution newton_ref_solve(const StandardProblem& p, const NewtonOptions& opts) {
  const DenseCoefficients c = effective_dense(p);
  const Index n = c.A.rows();
  if (n > 60) throw DimensionError("newton_ref_solve: limited to n <= 60");
  const Index nn = n * n;
  const double scale = (c.C.transpose() * c.C).norm();

  DenseSolution sol;
  sol.X = opts.x0 ? *opts.x0 : Matrix::Zero(n, n);
  Matrix res = residual_dense(c, sol.X);
  sol.residual = res.norm();
  if (scale == 0.0) {
    sol.X.setZero();
    sol.residual = residual_dense(c, sol.X).norm();
    sol.iterations = 1;
    return sol;
  }

  const Matrix et = c.E.transpose();
  for (int it = 0; it < opts.max_iter; ++it) {
    if (sol.residual <= opts.tol * scale) return sol;
    const Matrix f = feedback_dense(c, sol.X);
    const Matrix act = (c.A + c.B * f).transpose();
    Matrix op = kron(et, act) + kron(act, et);
    for (size_t i = 0; i < c.Ahat.size(); ++i) {
      const Matrix aht = (c.Ahat[i] + c.Bhat[i] * f).transpose();
      op.noalias() += kron(aht, aht);
    }
    Eigen::PartialPivLU<Matrix> lu(op);
    if (!(lu.rcond() > 1e-14)) throw OracleFailure("newton_ref_solve: singular Frechet system");
    const Vector rhs = -Eigen::Map<const Vector>(res.data(), nn);
    const Vector d = lu.solve(rhs);
    sol.X = symmetrize(sol.X + Eigen::Map<const Matrix>(d.data(), n, n));
    res = residual_dense(c, sol.X);
    const double prev = sol.residual;
    sol.residual = res.norm();
    sol.iterations = it + 1;
    if (!std::isfinite(sol.residual)) throw OracleFailure("newton_ref_solve: diverged");
    // Round-off floor: once quadratic convergence has stalled no step helps.
    if (sol.residual >= prev && sol.residual <= 1e3 * opts.tol * scale) return sol;
  }
  if (sol.residual <= opts.tol * scale) return sol;
  throw OracleFailure("newton_ref_solve: residual " + std::to_string(sol.residual / scale) +
                      " after " + std::to_string(opts.max_iter) + " steps");
}

DenseSolution care_schur_solve(const Matrix& a_in, const Matrix& b, const Matrix& c_in,
                               const Matrix* e) {
  const Index n = a_in.rows();
  if (n > 500) throw DimensionError("care_schur_solve: limited to n <= 500");
  Matrix a = a_in;
  Matrix c = c_in;
  if (e) {
    Eigen::PartialPivLU<Matrix> lu(Matrix(e->transpose()));
    a = lu.solve(a_in.transpose()).transpose();
    c = lu.solve(c_in.transpose()).transpose();
  }
  Matrix h(2 * n, 2 * n);
  h << a, -b * b.transpose(), -c.transpose() * c, -a.transpose();

  const int dim = static_cast<int>(2 * n);
  int sdim = 0;
  int info = 0;
  std::vector<double> wr(static_cast<size_t>(dim)), wi(static_cast<size_t>(dim));
  Matrix vs(dim, dim);
  std::vector<int> bwork(static_cast<size_t>(dim));
  int lwork = -1;
  double query = 0.0;
  dgees_("V", "S", select_stable, &dim, h.data(), &dim, &sdim, wr.data(), wi.data(), vs.data(),
         &dim, &query, &lwork, bwork.data(), &info, 1, 1);
  lwork = static_cast<int>(query);
  std::vector<double> work(static_cast<size_t>(lwork));
  dgees_("V", "S", select_stable, &dim, h.data(), &dim, &sdim, wr.data(), wi.data(), vs.data(),
         &dim, work.data(), &lwork, bwork.data(), &info, 1, 1);
  if (info != 0) throw OracleFailure("care_schur_solve: dgees info = " + std::to_string(info));
  if (sdim != n) {
    throw OracleFailure("care_schur_solve: " + std::to_string(sdim) +
                        " stable eigenvalues, expected " + std::to_string(n));
  }
  const Matrix u11 = vs.topLeftCorner(n, n);
  const Matrix u21 = vs.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<Matrix> lu(u11.transpose());
  if (!(lu.rcond() > 1e-14)) throw OracleFailure("care_schur_solve: U11 singular");
  DenseSolution sol;
  sol.X = symmetrize(lu.solve(u21.transpose()).transpose());
  Matrix res = c.transpose() * c + a.transpose() * sol.X + sol.X * a -
               sol.X * b * b.transpose() * sol.X;
  sol.residual = res.norm();
  sol.iterations = 1;
  return sol;
}

ResidualFormulaCheck residual_formula_check(const StandardProblem& p, double gamma) {
  ResidualFormulaCheck out;
  if (!(gamma > 0.0)) throw Error("residual_formula_check: gamma must be positive");
  const DenseCoefficients c = effective_dense(p);
  const Index n = c.A.rows();
  const Index m = c.B.cols();
  const Index l = c.C.rows();
  const auto blocks = static_cast<Index>(c.Ahat.size());
  const double s2g = std::sqrt(2.0 * gamma);

  Eigen::FullPivLU<Matrix> lu(Matrix((c.A - gamma * c.E).transpose()));
  if (!lu.isInvertible()) {
    out.skipped = true;
    out.diagnostic = "A - gamma E is singular for gamma = " + std::to_string(gamma);
    return out;
  }
  const Matrix cg = s2g * lu.solve(c.C.transpose()).transpose();
  const Matrix y = cg * c.B / s2g;
  const Matrix nn = Matrix::Identity(l, l) + y * y.transpose();
  Eigen::LLT<Matrix> nn_llt(nn);
  const Matrix w = nn_llt.solve(cg);
  out.X = symmetrize(cg.transpose() * w);

  const Matrix we = c.has_e ? Matrix(w * c.E) : w;
  DenseStack yhat(l, m);
  DenseStack c_m(l, n);
  for (Index i = 0; i < blocks; ++i) {
    const auto idx = static_cast<size_t>(i);
    yhat.push_back(cg * c.Bhat[idx]);
    c_m.push_back(cg * c.Ahat[idx] - s2g * yhat.block(i) * (y.transpose() * we));
  }
  out.Ctilde.resize(l + blocks * l, n);
  out.Ctilde.topRows(l) = c.C + s2g * we;

  const Matrix pn = chol_spd(nn);
  Matrix ktk = Matrix::Identity(m, m);
  Matrix lt_part = Matrix::Zero(m, n);
  if (blocks > 0) {
    const BlockLayout layout = p.layout();
    const Matrix yh = stack_rows(yhat, layout);
    const Matrix pm = chol_spd(kron_identity(nn, blocks, layout) + yh * yh.transpose());
    out.Ctilde.bottomRows(blocks * l) =
        pm.transpose().triangularView<Eigen::Lower>().solve(stack_rows(c_m, layout));
    for (Index i = 0; i < blocks; ++i) {
      const Matrix ny = pn.transpose().triangularView<Eigen::Lower>().solve(yhat.block(i));
      const Matrix ncm = pn.transpose().triangularView<Eigen::Lower>().solve(c_m.block(i));
      ktk.noalias() += ny.transpose() * ny;
      lt_part.noalias() += ny.transpose() * ncm;
    }
  }

  const Matrix res = residual_dense(c, out.X);
  const double den = res.norm();
  const double diff = (res - out.Ctilde.transpose() * out.Ctilde).norm();
  out.deviation = diff == 0.0 ? 0.0 : (den > 0.0 ? diff / den : diff);

  // L' of the step and the feedback of H_gamma: Fhat(H) = -K^{-1} L'.
  const Matrix k = chol_spd(ktk);
  const Matrix lt = k.transpose().triangularView<Eigen::Lower>().solve(lt_part) +
                    s2g * k * (y.transpose() * we);
  const Matrix f_step = -k.triangularView<Eigen::Upper>().solve(lt);
  const Matrix f_dense = feedback_dense(c, out.X);
  const double fd = (f_step - f_dense).norm();
  out.feedback_deviation = fd == 0.0 ? 0.0 : fd / std::max(f_dense.norm(), 1e-300);
  return out;
}

}  // namespace scare
