#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scare/problem.hpp"

namespace scare {

struct NewtonOptions {
  double tol = 1e-13;  // on ||C(X)||_F / ||C'C||_F
  int max_iter = 50;
  std::optional<Matrix> x0;
};

/// Dense Newton iteration on the residual operator.  Every step solves the
/// Frechet equation as one n^2 x n^2 linear system.  Intended for n <= 60.
/// Throws OracleFailure on a singular system or when tol is not reached.
DenseSolution newton_ref_solve(const StandardProblem& p, const NewtonOptions& opts = {});

/// Classical CARE  C'C + A'X + XA - XBB'X = 0  (or the generalized version
/// with E) through the ordered real Schur form of the Hamiltonian.
/// Throws OracleFailure when eigenvalues sit on the imaginary axis.
DenseSolution care_schur_solve(const Matrix& a, const Matrix& b, const Matrix& c,
                               const Matrix* e = nullptr);

struct ResidualFormulaCheck {
  double deviation = 0.0;           // ||C(H) - Ct'Ct||_F / ||C(H)||_F
  double feedback_deviation = 0.0;  // -K^{-1}L' against the dense feedback of H
  bool skipped = false;
  std::string diagnostic;
  Matrix X;       // H_gamma
  Matrix Ctilde;  // the low-rank residual factor
};

/// Builds H_gamma and the residual factor of one step from scratch and
/// compares C(H_gamma) with Ct'Ct.  Skips (with a diagnostic) when
/// A - gamma E is singular.
ResidualFormulaCheck residual_formula_check(const StandardProblem& p, double gamma);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed() const { return value <= threshold; }
};

/// Small self-check battery: semi-tensor identities, SMW solves, the
/// residual formula, incorporation, and solver cross-agreement.  Runs in a
/// few seconds.
std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed = 1);

}  // namespace scare
