#include "scare/problem.hpp"

#include "scare/errors.hpp"
#include "scare/kernels.hpp"

namespace scare {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

Matrix upper_factor_of_r(const Matrix& r) {
  try {
    return chol_spd(r);
  } catch (const SpdViolation& e) {
    throw AssumptionViolation(std::string("R must be symmetric positive definite (C1): ") +
                              e.what());
  }
}

Matrix solve_spd(const Matrix& a, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::PartialPivLU<Matrix> lu(a);
    if (!(lu.rcond() > 1e-15)) throw DefinitenessError("middle matrix is singular");
    return lu.solve(rhs);
  }
  return llt.solve(rhs);
}

void guard_dense(Index n) {
  if (n > kDenseLimit) {
    throw DimensionError("dense oracle path refused for n = " + std::to_string(n));
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Shared evaluation for
//   K + A'XE + E'XA + sum Ah' X Ah - (E'XB + sum Ah' X Bh)(I + sum Bh' X Bh)^{-1}(...)'.
Matrix riccati_form(const Matrix& constant, const Matrix& e, bool has_e, const Matrix& a,
                    const Matrix& b, const std::vector<Matrix>& ahat,
                    const std::vector<Matrix>& bhat, const Matrix& x, const Matrix& weight) {
  const Matrix xa = x * a;
  Matrix lin = has_e ? Matrix(e.transpose() * xa) : xa;
  Matrix out = constant + lin + lin.transpose();
  Matrix g = has_e ? Matrix(e.transpose() * (x * b)) : Matrix(x * b);
  Matrix mid = weight;
  for (size_t i = 0; i < ahat.size(); ++i) {
    const Matrix xah = x * ahat[i];
    const Matrix xbh = x * bhat[i];
    out.noalias() += ahat[i].transpose() * xah;
    g.noalias() += ahat[i].transpose() * xbh;
    mid.noalias() += bhat[i].transpose() * xbh;
  }
  out -= g * solve_spd(symmetrize(mid), Matrix(g.transpose()));
  return symmetrize(out);
}

}  // namespace

void OriginalProblem::validate() const {
  require(!A_list.empty(), "original problem needs at least A0");
  require(A_list.size() == B_list.size(), "original problem: " + std::to_string(A_list.size()) +
                                              " A blocks but " + std::to_string(B_list.size()) +
                                              " B blocks");
  const Index nn = n();
  const Index mm = m();
  for (const auto& a : A_list) {
    require(a.rows() == nn && a.cols() == nn, "A block is " + shape_string(a.rows(), a.cols()));
  }
  for (const auto& b : B_list) {
    require(b.rows() == nn && b.cols() == mm, "B block is " + shape_string(b.rows(), b.cols()));
  }
  require(C0.cols() == nn, "C0 is " + shape_string(C0.rows(), C0.cols()));
  require(L.rows() == nn && L.cols() == mm, "L is " + shape_string(L.rows(), L.cols()));
  require(R.rows() == mm && R.cols() == mm, "R is " + shape_string(R.rows(), R.cols()));
  if (E) require(E->rows() == nn && E->cols() == nn, "E is " + shape_string(E->rows(), E->cols()));
  upper_factor_of_r(R);
}

StandardProblem StandardProblem::make(SparseMatrix a, Matrix b, Matrix c, SparseStack ahat,
                                      DenseStack bhat, std::optional<SparseMatrix> e) {
  StandardProblem p;
  const Index n = a.rows();
  const Index m = b.cols();
  p.A = std::move(a);
  p.B = std::move(b);
  p.C = std::move(c);
  p.Ahat = ahat.empty() && ahat.block_rows() == 0 ? SparseStack(n, n) : std::move(ahat);
  p.Bhat = bhat.empty() && bhat.block_rows() == 0 ? DenseStack(n, m) : std::move(bhat);
  p.E = std::move(e);
  p.F0 = Matrix::Zero(m, n);
  p.Kpi0 = Matrix::Identity(m, m);
  p.validate();
  return p;
}

void StandardProblem::validate() const {
  const Index nn = n();
  const Index mm = m();
  require(A.cols() == nn, "A is " + shape_string(A.rows(), A.cols()));
  require(B.rows() == nn, "B is " + shape_string(B.rows(), B.cols()));
  require(C.cols() == nn, "C is " + shape_string(C.rows(), C.cols()));
  if (E) require(E->rows() == nn && E->cols() == nn, "E is " + shape_string(E->rows(), E->cols()));
  require(Ahat.block_count() == Bhat.block_count(),
          "Ahat has " + std::to_string(Ahat.block_count()) + " blocks, Bhat " +
              std::to_string(Bhat.block_count()));
  if (!Ahat.empty()) {
    require(Ahat.block_rows() == nn && Ahat.block_cols() == nn,
            "Ahat blocks are " + shape_string(Ahat.block_rows(), Ahat.block_cols()));
    require(Bhat.block_rows() == nn && Bhat.block_cols() == mm,
            "Bhat blocks are " + shape_string(Bhat.block_rows(), Bhat.block_cols()));
  }
  require(F0.rows() == mm && F0.cols() == nn, "F0 is " + shape_string(F0.rows(), F0.cols()));
  require(Kpi0.rows() == mm && Kpi0.cols() == mm,
          "Kpi0 is " + shape_string(Kpi0.rows(), Kpi0.cols()));
}

StandardProblem standardize(const OriginalProblem& orig) {
  orig.validate();
  const Matrix p = upper_factor_of_r(orig.R);
  const Matrix k = Eigen::LLT<Matrix>(orig.R).solve(Matrix(orig.L.transpose()));  // R^{-1}L'
  auto shift_a = [&](const SparseMatrix& a, const Matrix& b) {
    SparseMatrix out = a;
    const Matrix bk = b * k;
    if (bk.squaredNorm() > 0.0) out = (Matrix(a) - bk).sparseView();
    return out;
  };
  StandardProblem sp;
  sp.A = shift_a(orig.A_list[0], orig.B_list[0]);
  sp.B = right_solve_upper(orig.B_list[0], p);
  sp.C = orig.C0;
  sp.E = orig.E;
  sp.Ahat = SparseStack(orig.n(), orig.n());
  sp.Bhat = DenseStack(orig.n(), orig.m());
  for (Index i = 1; i < orig.r(); ++i) {
    const auto idx = static_cast<size_t>(i);
    sp.Ahat.push_back(shift_a(orig.A_list[idx], orig.B_list[idx]));
    sp.Bhat.push_back(right_solve_upper(orig.B_list[idx], p));
  }
  sp.kron_flip = false;
  sp.F0 = Matrix::Zero(orig.m(), orig.n());
  sp.Kpi0 = Matrix::Identity(orig.m(), orig.m());
  return sp;
}

StandardProblem adapt_in_place(const OriginalProblem& orig) {
  orig.validate();
  StandardProblem sp;
  sp.A = orig.A_list[0];
  sp.B = orig.B_list[0];
  sp.C = orig.C0;
  sp.E = orig.E;
  sp.Ahat = SparseStack(orig.n(), orig.n());
  sp.Bhat = DenseStack(orig.n(), orig.m());
  for (Index i = 1; i < orig.r(); ++i) {
    sp.Ahat.push_back(orig.A_list[static_cast<size_t>(i)]);
    sp.Bhat.push_back(orig.B_list[static_cast<size_t>(i)]);
  }
  sp.kron_flip = true;
  sp.F0 = -Eigen::LLT<Matrix>(orig.R).solve(Matrix(orig.L.transpose()));
  sp.Kpi0 = upper_factor_of_r(orig.R);
  return sp;
}

DenseCoefficients effective_dense(const StandardProblem& p) {
  guard_dense(p.n());
  DenseCoefficients c;
  const Index n = p.n();
  const bool trivial_f = p.F0.squaredNorm() == 0.0;
  const bool trivial_k = p.Kpi0.isIdentity(0.0);
  c.has_e = p.E.has_value();
  c.E = c.has_e ? Matrix(*p.E) : Matrix::Identity(n, n);
  c.A = Matrix(p.A);
  c.B = p.B;
  c.C = p.C;
  if (!trivial_f) c.A += p.B * p.F0;
  if (!trivial_k) c.B = right_solve_upper(p.B, p.Kpi0);
  for (Index i = 0; i < p.Ahat.block_count(); ++i) {
    Matrix ah = Matrix(p.Ahat.block(i));
    Matrix bh = p.Bhat.block(i);
    if (!trivial_f) ah += bh * p.F0;
    if (!trivial_k) bh = right_solve_upper(bh, p.Kpi0);
    c.Ahat.push_back(std::move(ah));
    c.Bhat.push_back(std::move(bh));
  }
  return c;
}

Matrix middle_matrix(const DenseCoefficients& c, const Matrix& x) {
  const Index m = c.B.cols();
  Matrix mid = Matrix::Identity(m, m);
  for (const auto& bh : c.Bhat) mid.noalias() += bh.transpose() * (x * bh);
  return symmetrize(mid);
}

Matrix residual_dense(const DenseCoefficients& c, const Matrix& x) {
  const Index n = c.A.rows();
  if (x.rows() != n || x.cols() != n) {
    throw DimensionError("residual_dense: X is " + shape_string(x.rows(), x.cols()));
  }
  const Index m = c.B.cols();
  return riccati_form(c.C.transpose() * c.C, c.E, c.has_e, c.A, c.B, c.Ahat, c.Bhat, x,
                      Matrix::Identity(m, m));
}

Matrix residual_dense(const StandardProblem& p, const Matrix& x) {
  return residual_dense(effective_dense(p), x);
}

Matrix feedback_dense(const DenseCoefficients& c, const Matrix& x) {
  Matrix g = c.has_e ? Matrix(c.E.transpose() * (x * c.B)) : Matrix(x * c.B);
  for (size_t i = 0; i < c.Ahat.size(); ++i) g.noalias() += c.Ahat[i].transpose() * (x * c.Bhat[i]);
  return -solve_spd(middle_matrix(c, x), Matrix(g.transpose()));
}

Matrix feedback_dense(const StandardProblem& p, const Matrix& x) {
  return feedback_dense(effective_dense(p), x);
}

Matrix residual_original_dense(const OriginalProblem& orig, const Matrix& x) {
  orig.validate();
  guard_dense(orig.n());
  const Index n = orig.n();
  const bool has_e = orig.E.has_value();
  const Matrix e = has_e ? Matrix(*orig.E) : Matrix::Identity(n, n);
  const Matrix q = orig.C0.transpose() * orig.C0 +
                   orig.L * Eigen::LLT<Matrix>(orig.R).solve(Matrix(orig.L.transpose()));
  const Matrix a0 = Matrix(orig.A_list[0]);
  Matrix out = q;
  const Matrix lin = has_e ? Matrix(e.transpose() * x * a0) : Matrix(x * a0);
  out += lin + lin.transpose();
  Matrix g = (has_e ? Matrix(e.transpose() * x * orig.B_list[0]) : Matrix(x * orig.B_list[0])) +
             orig.L;
  Matrix mid = orig.R;
  for (Index i = 1; i < orig.r(); ++i) {
    const auto idx = static_cast<size_t>(i);
    const Matrix ai = Matrix(orig.A_list[idx]);
    const Matrix& bi = orig.B_list[idx];
    out.noalias() += ai.transpose() * x * ai;
    g.noalias() += ai.transpose() * x * bi;
    mid.noalias() += bi.transpose() * x * bi;
  }
  out -= g * solve_spd(symmetrize(mid), Matrix(g.transpose()));
  return symmetrize(out);
}

Matrix original_feedback(const OriginalProblem& orig, const Matrix& x) {
  orig.validate();
  guard_dense(orig.n());
  const Matrix b0 = orig.B_list[0];
  Matrix g = (orig.E ? Matrix(Matrix(*orig.E).transpose() * x * b0) : Matrix(x * b0)) + orig.L;
  Matrix mid = orig.R;
  for (Index i = 1; i < orig.r(); ++i) {
    const auto idx = static_cast<size_t>(i);
    const Matrix ai = Matrix(orig.A_list[idx]);
    const Matrix& bi = orig.B_list[idx];
    g.noalias() += ai.transpose() * x * bi;
    mid.noalias() += bi.transpose() * x * bi;
  }
  return -solve_spd(symmetrize(mid), Matrix(g.transpose()));
}

Matrix incorporation_residual_dense(const StandardProblem& p, const Matrix& x,
                                    const Matrix& delta) {
  const DenseCoefficients c = effective_dense(p);
  const Index n = c.A.rows();
  if (delta.rows() != n || delta.cols() != n) {
    throw DimensionError("incorporation: Delta is " + shape_string(delta.rows(), delta.cols()));
  }
  Matrix px;
  try {
    px = chol_spd(middle_matrix(c, x));
  } catch (const SpdViolation& e) {
    throw DefinitenessError(std::string("R_X is not SPD: ") + e.what());
  }
  DenseCoefficients cx;
  cx.has_e = c.has_e;
  cx.E = c.E;
  cx.B = right_solve_upper(c.B, px);
  Matrix lt = cx.B.transpose() * x * c.E;  // L_X'
  for (size_t i = 0; i < c.Bhat.size(); ++i) {
    cx.Bhat.push_back(right_solve_upper(c.Bhat[i], px));
    lt.noalias() += cx.Bhat[i].transpose() * x * c.Ahat[i];
  }
  cx.A = c.A - cx.B * lt;
  for (size_t i = 0; i < c.Ahat.size(); ++i) cx.Ahat.push_back(c.Ahat[i] - cx.Bhat[i] * lt);

  const Matrix base = residual_dense(c, x);
  const Index m = c.B.cols();
  return riccati_form(base, cx.E, cx.has_e, cx.A, cx.B, cx.Ahat, cx.Bhat, delta,
                      Matrix::Identity(m, m));
}

}  // namespace scare
