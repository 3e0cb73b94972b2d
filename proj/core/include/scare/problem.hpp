#pragma once

#include <optional>
#include <vector>

#include "scare/stacked.hpp"
#include "scare/types.hpp"

namespace scare {

/// SCARE in its original weighting:
///   Q + A0'X + XA0 + sum Ai'XAi
///     - (XB0 + sum Ai'XBi + L)(R + sum Bi'XBi)^{-1}(...)' = 0
/// with Q - L R^{-1} L' = C0'C0.  E (mass matrix) is optional.
struct OriginalProblem {
  std::vector<SparseMatrix> A_list;  // A0 ... A_{r-1}
  std::vector<Matrix> B_list;        // B0 ... B_{r-1}
  Matrix C0;
  Matrix L;  // n x m
  Matrix R;  // m x m, SPD
  std::optional<SparseMatrix> E;

  Index r() const { return static_cast<Index>(A_list.size()); }
  Index n() const { return A_list.empty() ? 0 : A_list.front().rows(); }
  Index m() const { return B_list.empty() ? 0 : B_list.front().cols(); }
  Index l() const { return C0.rows(); }

  /// Throws DimensionError / AssumptionViolation.
  void validate() const;
};

/// Standard-form SCARE
///   C'C + A'XE + E'XA + Ahat' ⋉ X ⋉ Ahat
///     - (E'XB + Ahat' ⋉ X ⋉ Bhat)(I + Bhat' ⋉ X ⋉ Bhat)^{-1}(...)' = 0.
/// F0 and Kpi0 carry the starting feedback and accumulator.  They are 0 and
/// I for a natively standard problem; the in-place adapter stores the
/// original weighting there instead of rewriting A, B.
struct StandardProblem {
  std::optional<SparseMatrix> E;
  SparseMatrix A;
  Matrix B;
  Matrix C;
  SparseStack Ahat;
  DenseStack Bhat;
  bool kron_flip = false;
  Matrix F0;
  Matrix Kpi0;

  /// Natively standard problem (F0 = 0, Kpi0 = I, kron_flip = false).
  static StandardProblem make(SparseMatrix a, Matrix b, Matrix c, SparseStack ahat = {},
                              DenseStack bhat = {}, std::optional<SparseMatrix> e = {});

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  Index l() const { return C.rows(); }
  Index r() const { return Ahat.block_count() + 1; }
  BlockLayout layout() const {
    return kron_flip ? BlockLayout::Blocked : BlockLayout::Interleaved;
  }
  const SparseMatrix* e_ptr() const { return E ? &*E : nullptr; }

  void validate() const;
};

/// Dense symmetric iterate or reference solution.
struct DenseSolution {
  Matrix X;
  int iterations = 0;
  double residual = 0.0;
};

/// Dense copies of the coefficients the residual operator actually sees:
/// A + B F0, B Kpi0^{-1}, Ahat_i + Bhat_i F0, Bhat_i Kpi0^{-1}.  E is the
/// identity when the problem carries none.
struct DenseCoefficients {
  Matrix E, A, B, C;
  std::vector<Matrix> Ahat, Bhat;
  bool has_e = false;
};

/// Guard for every dense oracle path.
inline constexpr Index kDenseLimit = 2000;

StandardProblem standardize(const OriginalProblem& orig);
StandardProblem adapt_in_place(const OriginalProblem& orig);

DenseCoefficients effective_dense(const StandardProblem& p);

/// R_X = I + sum Bhat_i' X Bhat_i (effective coefficients).
Matrix middle_matrix(const DenseCoefficients& c, const Matrix& x);

/// Residual operator evaluated densely.  Throws DefinitenessError when the
/// middle matrix is singular.
Matrix residual_dense(const DenseCoefficients& c, const Matrix& x);
Matrix residual_dense(const StandardProblem& p, const Matrix& x);

/// -R_X^{-1}(E'XB + sum Ahat_i' X Bhat_i)' for the effective coefficients.
Matrix feedback_dense(const DenseCoefficients& c, const Matrix& x);
Matrix feedback_dense(const StandardProblem& p, const Matrix& x);

/// Residual of the original equation, evaluated directly from A_list, B_list,
/// Q = C0'C0 + L R^{-1} L', L and R.
Matrix residual_original_dense(const OriginalProblem& orig, const Matrix& x);

/// Feedback of the original problem, -(R + sum Bi'XBi)^{-1}(E'XB0 + sum Ai'XBi + L)'.
/// Equals -R^{-1}L' + P^{-1} Fhat_X with P'P = R.
Matrix original_feedback(const OriginalProblem& orig, const Matrix& x);

/// The residual operator of the equation for the correction Delta after
/// incorporating X.  Equals residual_dense(p, X + Delta).
Matrix incorporation_residual_dense(const StandardProblem& p, const Matrix& x,
                                    const Matrix& delta);

}  // namespace scare
