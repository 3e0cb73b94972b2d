#include "scare/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/SparseLU>

#include "scare/errors.hpp"
#include "scare/stacked.hpp"

extern "C" {
void dgesdd_(const char* jobz, const int* m, const int* n, double* a, const int* lda, double* s,
             double* u, const int* ldu, double* vt, const int* ldvt, double* work,
             const int* lwork, int* iwork, int* info, size_t jobz_len);
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork, int* info,
             size_t jobz_len, size_t uplo_len);
}

namespace scare {

std::string SparseSolverConfig::describe() const {
  std::string name = "Eigen::SparseLU<";
  switch (ordering) {
    case Ordering::Colamd: name += "COLAMD"; break;
    case Ordering::Amd: name += "AMD"; break;
    case Ordering::Natural: name += "natural"; break;
  }
  return name + ", pivot_threshold=" + std::to_string(pivot_threshold) + ">";
}

struct ShiftedFactorization::Impl {
  using Colamd = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
  using Amd = Eigen::SparseLU<SparseMatrix, Eigen::AMDOrdering<int>>;
  using Natural = Eigen::SparseLU<SparseMatrix, Eigen::NaturalOrdering<int>>;
  std::variant<Colamd, Amd, Natural> lu;

  explicit Impl(SparseSolverConfig::Ordering ordering) {
    switch (ordering) {
      case SparseSolverConfig::Ordering::Colamd: lu.emplace<Colamd>(); break;
      case SparseSolverConfig::Ordering::Amd: lu.emplace<Amd>(); break;
      case SparseSolverConfig::Ordering::Natural: lu.emplace<Natural>(); break;
    }
  }
};

ShiftedFactorization::ShiftedFactorization(const SparseMatrix& a, const SparseMatrix* e,
                                           double gamma, const SparseSolverConfig& config)
    : gamma_(gamma), n_(a.rows()) {
  if (a.rows() != a.cols()) {
    throw DimensionError("shifted factorization: A is " + shape_string(a.rows(), a.cols()));
  }
  SparseMatrix shifted;
  if (e != nullptr) {
    if (e->rows() != n_ || e->cols() != n_) {
      throw DimensionError("shifted factorization: E is " + shape_string(e->rows(), e->cols()));
    }
    shifted = a - gamma * (*e);
  } else {
    SparseMatrix eye(n_, n_);
    eye.setIdentity();
    shifted = a - gamma * eye;
  }
  // Row solves x'(A - gE)^{-1} are column solves with the transpose.
  SparseMatrix transposed = shifted.transpose();
  transposed.makeCompressed();

  auto impl = std::make_shared<Impl>(config.ordering);
  const bool ok = std::visit(
      [&](auto& lu) {
        lu.setPivotThreshold(config.pivot_threshold);
        lu.compute(transposed);
        return lu.info() == Eigen::Success;
      },
      impl->lu);
  if (!ok) {
    throw ShiftRejected("A - gamma*E is singular for gamma = " + std::to_string(gamma));
  }
  impl_ = std::move(impl);
}

Matrix ShiftedFactorization::solve_rows(const Matrix& rows) const {
  if (rows.cols() != n_) {
    throw DimensionError("solve_rows: rows " + shape_string(rows.rows(), rows.cols()) +
                         " vs n = " + std::to_string(n_));
  }
  if (rows.rows() == 0) return Matrix(0, n_);
  const Matrix rhs = rows.transpose();
  Matrix sol = std::visit([&](const auto& lu) -> Matrix { return lu.solve(rhs); }, impl_->lu);
  return sol.transpose();
}

SmwSolve smw_solve(const ShiftedFactorization& fac, const Matrix& b, const Matrix& f,
                   const Matrix& rows) {
  const Index n = fac.dim();
  const Index m = b.cols();
  if (b.rows() != n || f.rows() != m || f.cols() != n) {
    throw DimensionError("smw_solve: B " + shape_string(b.rows(), b.cols()) + ", F " +
                         shape_string(f.rows(), f.cols()) + ", n = " + std::to_string(n));
  }
  const Index t = rows.rows();
  Matrix stacked(t + m, n);
  stacked << rows, f;
  const Matrix solved = fac.solve_rows(stacked);

  SmwSolve out;
  out.rows_a = solved.topRows(t);
  out.f_a = solved.bottomRows(m);

  const Matrix core = Matrix::Identity(m, m) + out.f_a * b;
  Eigen::PartialPivLU<Matrix> lu(Matrix(core.transpose()));  // core'
  const double rcond = m > 0 ? lu.rcond() : 1.0;
  if (!(rcond > 1e-14)) {
    throw ShiftRejected("I + F (A - gamma E)^{-1} B is singular (rcond " + std::to_string(rcond) +
                        ") for gamma = " + std::to_string(fac.gamma()));
  }
  const Matrix rows_b = out.rows_a * b;
  // rows_b * core^{-1} = (core^{-T} rows_b')'
  out.rows_core = lu.solve(rows_b.transpose()).transpose();
  out.result = out.rows_a - out.rows_core * out.f_a;
  return out;
}

Matrix chol_spd(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("chol_spd: matrix is " + shape_string(m.rows(), m.cols()));
  }
  const Index k = m.rows();
  Matrix p = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    const double d = m(j, j) - p.col(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SpdViolation("chol_spd: non-positive pivot " + std::to_string(d) + " at index " +
                             std::to_string(j),
                         static_cast<long>(j));
    }
    const double pjj = std::sqrt(d);
    p(j, j) = pjj;
    const Index rest = k - j - 1;
    if (rest > 0) {
      p.row(j).tail(rest) =
          (m.row(j).tail(rest) - p.col(j).head(j).transpose() * p.block(0, j + 1, j, rest)) /
          pjj;
    }
  }
  return p;
}

Matrix right_solve_upper(const Matrix& rhs, const Matrix& p) {
  // x P = rhs  <=>  P' x' = rhs'
  return p.transpose().triangularView<Eigen::Lower>().solve(rhs.transpose()).transpose();
}

namespace {

Index retained_count(const Vector& sq, double tau_abs, Index cap) {
  // sq is nonincreasing and nonnegative; keep the shortest prefix whose
  // complement sums to at most tau_abs.
  const Index len = sq.size();
  Index keep = len;
  double tail = 0.0;
  for (Index i = len - 1; i >= 0; --i) {
    tail += sq(i);
    if (tail <= tau_abs) keep = i; else break;
  }
  while (keep > 0 && !(sq(keep - 1) > 0.0)) --keep;
  return std::min(keep, cap);
}

// Thin SVD through LAPACK's divide-and-conquer driver.  Resolves small
// singular values to working accuracy relative to sigma_1, unlike the
// cross-product route.
TruncationResult one_sided_svd(const Matrix& c, double tau_abs, Index cap) {
  const int p = static_cast<int>(c.rows());
  const int n = static_cast<int>(c.cols());
  const int q = std::min(p, n);
  Matrix a = c;
  Vector sv(q);
  Matrix u(p, q);
  Matrix vt(q, n);
  std::vector<int> iwork(static_cast<size_t>(8 * q));
  int lwork = -1;
  int info = 0;
  double query = 0.0;
  dgesdd_("S", &p, &n, a.data(), &p, sv.data(), u.data(), &p, vt.data(), &q, &query, &lwork,
          iwork.data(), &info, 1);
  lwork = static_cast<int>(query);
  std::vector<double> work(static_cast<size_t>(lwork));
  dgesdd_("S", &p, &n, a.data(), &p, sv.data(), u.data(), &p, vt.data(), &q, work.data(), &lwork,
          iwork.data(), &info, 1);
  if (info != 0) throw NumericalBreakdown("trunc_svd: dgesdd info = " + std::to_string(info), -1);

  const Vector sq = sv.array().square();
  const Index keep = retained_count(sq, tau_abs, cap);
  TruncationResult out;
  out.used_fallback = true;
  out.sigma = sv.head(keep);
  out.discarded_sq_trace = sq.tail(q - keep).sum();
  out.vt = vt.topRows(keep);
  return out;
}

// Eigenpairs of a symmetric matrix, eigenvalues ascending (dsyevd).
void sym_eig(Matrix& a, Vector& w) {
  const int n = static_cast<int>(a.rows());
  w.resize(n);
  int lwork = -1;
  int liwork = -1;
  int info = 0;
  double query = 0.0;
  int iquery = 0;
  dsyevd_("V", "L", &n, a.data(), &n, w.data(), &query, &lwork, &iquery, &liwork, &info, 1, 1);
  lwork = static_cast<int>(query);
  liwork = iquery;
  std::vector<double> work(static_cast<size_t>(lwork));
  std::vector<int> iwork(static_cast<size_t>(liwork));
  dsyevd_("V", "L", &n, a.data(), &n, w.data(), work.data(), &lwork, iwork.data(), &liwork, &info,
          1, 1);
  if (info != 0) throw NumericalBreakdown("trunc_svd: dsyevd info = " + std::to_string(info), -1);
}

}  // namespace

TruncationResult trunc_svd(const Matrix& c, double tau_abs, Index cap) {
  if (tau_abs < 0.0) throw Error("trunc_svd: negative tolerance");
  if (cap < 1) throw Error("trunc_svd: cap must be positive");
  const Index p = c.rows();
  const Index n = c.cols();
  TruncationResult out;
  if (p == 0 || n == 0 || c.squaredNorm() == 0.0) {
    out.sigma.resize(0);
    out.vt.resize(0, n);
    return out;
  }

  Matrix vecs(p, p);
  vecs.triangularView<Eigen::Lower>() = c * c.transpose();
  Vector w;
  sym_eig(vecs, w);
  const Vector lam = w.reverse().cwiseMax(0.0);
  const Index keep = retained_count(lam, tau_abs, cap);
  if (keep > 0 && lam(keep - 1) < 1e-8 * lam(0)) {
    return one_sided_svd(c, tau_abs, cap);
  }

  const Matrix u = vecs.rowwise().reverse().leftCols(keep);
  out.sigma = lam.head(keep).array().sqrt();
  out.discarded_sq_trace = lam.tail(p - keep).sum();
  out.vt = out.sigma.cwiseInverse().asDiagonal() * (u.transpose() * c);
  return out;
}

namespace {

double relative_deviation(const Matrix& lhs, const Matrix& rhs) {
  const double diff = (lhs - rhs).norm();
  if (diff == 0.0) return 0.0;
  const double den = lhs.norm();
  return den > 0.0 ? diff / den : diff;
}

bool invertible(const Matrix& m) {
  Eigen::FullPivLU<Matrix> lu(m);
  return lu.isInvertible() && lu.rcond() > 1e-12;
}

}  // namespace

IdentityDeviation ltimes_identities_check(const Matrix& u, const Matrix& v) {
  const Matrix vu = ltimes_general(v, u);
  const Matrix uv = ltimes_general(u, v);
  if (vu.rows() != vu.cols() || uv.rows() != uv.cols()) {
    throw DimensionError("identity check: U⋉V and V⋉U must be square, got " +
                         shape_string(uv.rows(), uv.cols()) + " and " +
                         shape_string(vu.rows(), vu.cols()));
  }
  const Matrix i_vu = Matrix::Identity(vu.rows(), vu.cols()) + vu;
  const Matrix i_uv = Matrix::Identity(uv.rows(), uv.cols()) + uv;

  IdentityDeviation out;
  out.push_through = relative_deviation(ltimes_general(u, i_vu), ltimes_general(i_uv, u));
  if (!invertible(i_vu) || !invertible(i_uv)) {
    out.inverse_skipped = true;
    return out;
  }
  out.inverse = relative_deviation(ltimes_general(u, Matrix(i_vu.inverse())),
                                   ltimes_general(Matrix(i_uv.inverse()), u));
  return out;
}

std::optional<double> smw_identity_deviation(const Matrix& m, const Matrix& u,
                                             const Matrix& d, const Matrix& v) {
  if (!invertible(m) || !invertible(d)) return std::nullopt;
  const Matrix update = ltimes_general(ltimes_general(u, d), v);
  if (update.rows() != m.rows() || update.cols() != m.cols()) {
    throw DimensionError("SMW check: U⋉D⋉V is " + shape_string(update.rows(), update.cols()) +
                         ", M is " + shape_string(m.rows(), m.cols()));
  }
  const Matrix m_inv = m.inverse();
  const Matrix perturbed = m + update;
  if (!invertible(perturbed)) return std::nullopt;
  const Matrix core = Matrix(d.inverse()) + ltimes_general(ltimes_general(v, m_inv), u);
  if (!invertible(core)) return std::nullopt;

  const Matrix lhs = m_inv - perturbed.inverse();
  Matrix rhs = ltimes_general(m_inv, u);
  rhs = ltimes_general(rhs, Matrix(core.inverse()));
  rhs = ltimes_general(rhs, v);
  rhs = ltimes_general(rhs, m_inv);
  return relative_deviation(lhs, rhs);
}

}  // namespace scare
