#pragma once

#include <memory>
#include <optional>
#include <string>

#include "scare/types.hpp"

namespace scare {

/// Sparse LU backend settings.  Both knobs are forwarded to Eigen::SparseLU.
struct SparseSolverConfig {
  enum class Ordering { Colamd, Amd, Natural };
  Ordering ordering = Ordering::Colamd;
  double pivot_threshold = 1.0;  // 1.0 = partial pivoting

  std::string describe() const;
};

/// Factorization of (A - gamma*E), stored so that row solves
/// x' (A - gamma E)^{-1} are a single sparse triangular sweep.
/// Immutable after construction; copies share the factors.
class ShiftedFactorization {
 public:
  /// `e == nullptr` means E = I.  Throws ShiftRejected when singular.
  ShiftedFactorization(const SparseMatrix& a, const SparseMatrix* e, double gamma,
                       const SparseSolverConfig& config = {});

  double gamma() const noexcept { return gamma_; }
  Index dim() const noexcept { return n_; }

  /// rows * (A - gamma E)^{-1}.
  Matrix solve_rows(const Matrix& rows) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double gamma_ = 0.0;
  Index n_ = 0;
};

/// Intermediate quantities of one Sherman-Morrison-Woodbury row solve.
struct SmwSolve {
  Matrix rows_a;     // rows (A - gamma E)^{-1}
  Matrix f_a;        // F (A - gamma E)^{-1}
  Matrix rows_core;  // rows_a B (I + f_a B)^{-1}
  Matrix result;     // rows (A + B F - gamma E)^{-1}
};

/// rows * (A + B F - gamma E)^{-1} from one factorization of A - gamma E.
/// Throws ShiftRejected when I + F (A - gamma E)^{-1} B is singular.
SmwSolve smw_solve(const ShiftedFactorization& fac, const Matrix& b, const Matrix& f,
                   const Matrix& rows);

inline Matrix smw_row_solve(const ShiftedFactorization& fac, const Matrix& b,
                            const Matrix& f, const Matrix& rows) {
  return smw_solve(fac, b, f, rows).result;
}

/// Upper-triangular P with P'P = M.  Only the upper triangle of M is read.
/// Throws SpdViolation carrying the offending pivot index.
Matrix chol_spd(const Matrix& m);

/// Solve x * P = rhs for upper-triangular P (i.e. rhs * P^{-1}).
Matrix right_solve_upper(const Matrix& rhs, const Matrix& p);

struct TruncationResult {
  Vector sigma;               // retained singular values, nonincreasing, > 0
  Matrix vt;                  // retained right factor, rows = sigma.size()
  double discarded_sq_trace = 0.0;
  bool used_fallback = false;  // true when the one-sided SVD path was taken

  Index rank() const { return sigma.size(); }
  /// Sigma * V', the compressed replacement of the input.
  Matrix factor() const { return sigma.asDiagonal() * vt; }
};

/// Truncated SVD keeping the shortest leading set whose discarded squared
/// singular values sum to at most `tau_abs`, then at most `cap` of them.
/// Uses the cross-product route (eigen-decomposition of C C') unless the
/// smallest retained sigma^2 falls below 1e-8 sigma_1^2.
TruncationResult trunc_svd(const Matrix& c, double tau_abs, Index cap);

/// Relative deviations of the two semi-tensor push-through identities
///   U ⋉ (I + V ⋉ U) = (I + U ⋉ V) ⋉ U
///   U ⋉ (I + V ⋉ U)^{-1} = (I + U ⋉ V)^{-1} ⋉ U
/// evaluated by explicit Kronecker expansion.
struct IdentityDeviation {
  double push_through = 0.0;
  double inverse = 0.0;
  bool inverse_skipped = false;  // I + V ⋉ U numerically singular
  double max() const { return push_through > inverse ? push_through : inverse; }
};
IdentityDeviation ltimes_identities_check(const Matrix& u, const Matrix& v);

/// Relative deviation of the semi-tensor Sherman-Morrison-Woodbury identity
///   M^{-1} - (M + U⋉D⋉V)^{-1} = M^{-1}⋉U⋉(D^{-1} + V⋉M^{-1}⋉U)^{-1}⋉V⋉M^{-1}.
/// Returns std::nullopt when one of the inverses does not exist.
std::optional<double> smw_identity_deviation(const Matrix& m, const Matrix& u,
                                             const Matrix& d, const Matrix& v);

}  // namespace scare
