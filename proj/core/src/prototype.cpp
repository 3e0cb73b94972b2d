#include "scare/prototype.hpp"

#include <cmath>

#include "scare/errors.hpp"
#include "scare/kernels.hpp"

namespace scare {

Alg1State alg1_init(const StandardProblem& p) {
  if (p.n() > 200) throw DimensionError("alg1_init: dense reference limited to n <= 200");
  const DenseCoefficients c = effective_dense(p);
  Alg1State s;
  s.layout = p.layout();
  s.B = c.B;
  s.Bhat = c.Bhat;
  if (c.has_e) {
    Eigen::PartialPivLU<Matrix> lu(Matrix(c.E.transpose()));
    // M E^{-1} = (E^{-T} M')'
    auto right = [&](const Matrix& m) -> Matrix {
      return lu.solve(m.transpose()).transpose();
    };
    s.A = right(c.A);
    s.C = right(c.C);
    for (const auto& a : c.Ahat) s.Ahat.push_back(right(a));
  } else {
    s.A = c.A;
    s.C = c.C;
    s.Ahat = c.Ahat;
  }
  s.Xi.resize(p.n(), 0);
  return s;
}

void alg1_step(Alg1State& s, double gamma) {
  if (!(gamma > 0.0)) throw ShiftRejected("alg1_step: shift must be positive");
  const Index n = s.A.rows();
  const Index m = s.B.cols();
  const auto blocks = static_cast<Index>(s.Ahat.size());
  const double s2g = std::sqrt(2.0 * gamma);

  const Matrix a_gamma = s.A - gamma * Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(Matrix(a_gamma.transpose()));
  if (!lu.isInvertible()) throw ShiftRejected("alg1_step: A - gamma I singular");
  const Matrix c_gamma = s2g * lu.solve(s.C.transpose()).transpose();
  const Matrix y = c_gamma * s.B / s2g;
  const Index l = c_gamma.rows();

  std::vector<Matrix> yhat;
  for (Index i = 0; i < blocks; ++i) yhat.push_back(c_gamma * s.Bhat[static_cast<size_t>(i)]);

  const Matrix nn = Matrix::Identity(l, l) + y * y.transpose();
  const Matrix pn = chol_spd(nn);  // N = pn'
  const Matrix n_inv_cg = pn.transpose().triangularView<Eigen::Lower>().solve(c_gamma);
  const Matrix w = Eigen::LLT<Matrix>(nn).solve(c_gamma);  // (NN')^{-1} C_gamma

  Matrix xi(n, s.Xi.cols() + l);
  xi << s.Xi, n_inv_cg.transpose();
  s.Xi.swap(xi);

  DenseStack c_m(l, n);
  DenseStack yh_stack(l, m);
  for (Index i = 0; i < blocks; ++i) {
    const auto idx = static_cast<size_t>(i);
    c_m.push_back(c_gamma * s.Ahat[idx] - s2g * yhat[idx] * (y.transpose() * w));
    yh_stack.push_back(yhat[idx]);
  }

  Matrix c_new(s.C.rows() + blocks * l, n);
  c_new.topRows(s.C.rows()) = s.C + s2g * w;
  if (blocks > 0) {
    const Matrix yh = stack_rows(yh_stack, s.layout);
    const Matrix mm = kron_identity(nn, blocks, s.layout) + yh * yh.transpose();
    const Matrix pm = chol_spd(mm);
    c_new.bottomRows(blocks * l) =
        pm.transpose().triangularView<Eigen::Lower>().solve(stack_rows(c_m, s.layout));
  }

  Matrix ktk = Matrix::Identity(m, m);
  Matrix lt_part = Matrix::Zero(m, n);
  for (Index i = 0; i < blocks; ++i) {
    const auto idx = static_cast<size_t>(i);
    const Matrix ny = pn.transpose().triangularView<Eigen::Lower>().solve(yhat[idx]);
    const Matrix ncm = pn.transpose().triangularView<Eigen::Lower>().solve(c_m.block(i));
    ktk.noalias() += ny.transpose() * ny;
    lt_part.noalias() += ny.transpose() * ncm;
  }
  const Matrix k = chol_spd(ktk);
  const Matrix lt = k.transpose().triangularView<Eigen::Lower>().solve(lt_part) +
                    s2g * k * (y.transpose() * w);

  s.B = right_solve_upper(s.B, k);
  s.A -= s.B * lt;
  for (Index i = 0; i < blocks; ++i) {
    const auto idx = static_cast<size_t>(i);
    s.Bhat[idx] = right_solve_upper(s.Bhat[idx], k);
    s.Ahat[idx] -= s.Bhat[idx] * lt;
  }

  // The row count grows geometrically; an orthogonal compression keeps C'C.
  if (c_new.rows() > n) {
    Eigen::HouseholderQR<Matrix> qr(c_new);
    c_new = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  }
  s.C.swap(c_new);
  s.k += 1;
}

}  // namespace scare
