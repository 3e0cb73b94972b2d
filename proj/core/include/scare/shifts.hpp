#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "scare/kernels.hpp"
#include "scare/problem.hpp"

namespace scare {

enum class ShiftStrategy { Hamiltonian, Projection };
enum class ShiftMode { Cached, PerIteration };

struct ShiftConfig {
  ShiftStrategy strategy = ShiftStrategy::Hamiltonian;
  int window_s = 1;
  ShiftMode mode = ShiftMode::Cached;
  std::optional<double> gamma_floor;  // default 1e-8 * ||A||_1

  /// "hami 2", "proj c 5", ...  ("c" marks per-iteration recomputation).
  std::string label() const;
  /// Inverse of label().  Throws Error on unknown input.
  static ShiftConfig parse(const std::string& label);
  /// All twelve variants {hami, hami c, proj, proj c} x {1, 2, 5}.
  static std::vector<ShiftConfig> full_grid();
};

struct ShiftCache {
  std::deque<double> pending;
  long source_iteration = -1;
};

/// Orthonormal basis of span{S_(k-1)', ..., S_(k-s)'}.  `history` holds the
/// most recent factor last.  With an empty history the rows of `fallback`
/// are used.  Numerically dependent directions are dropped.
/// Throws ShiftFailure when everything is zero.
Matrix build_basis(const std::vector<Matrix>& history, int s, const Matrix& fallback);

/// Snapshot of the solver quantities a shift computation reads.
struct ShiftInputs {
  const StandardProblem* problem = nullptr;
  const Matrix* F = nullptr;
  const Matrix* Kpi = nullptr;
  const Matrix* C = nullptr;
  /// Factorization of E' (gamma = 0) when the problem has a mass matrix.
  const ShiftedFactorization* mass = nullptr;
};

/// Projected closed-loop blocks on the basis U.
struct ProjectedBlocks {
  Matrix A;  // U'(A + BF)E^{-1}U
  Matrix G;  // (U'B Kpi^{-1})(U'B Kpi^{-1})'
  Matrix Q;  // (C E^{-1} U)'(C E^{-1} U)
};
ProjectedBlocks project(const Matrix& u, const ShiftInputs& in);

/// Residual Hamiltonian shifts from [[Abar, Gbar], [Qbar, -Abar']].
/// Front entry is the primary shift; the rest follow by descending |q|.
/// Falls back to projection shifts when no stable eigenvalue exists.
ShiftCache hamiltonian_shifts(const Matrix& u, const ShiftInputs& in, double gamma_floor);
ShiftCache hamiltonian_shifts(const ProjectedBlocks& blocks, double gamma_floor);

/// Projection shifts from the spectrum of Abar, most negative real part
/// first.  Throws ShiftFailure when Abar has no stable eigenvalue.
ShiftCache projection_shifts(const Matrix& u, const ShiftInputs& in, double gamma_floor);
ShiftCache projection_shifts(const Matrix& abar, double gamma_floor);

/// Default floor 1e-8 * ||A||_1 (or 1e-8 if A = 0).
double default_gamma_floor(const SparseMatrix& a);

/// Stateful shift generator owned by one solve.
class ShiftGenerator {
 public:
  ShiftGenerator(ShiftConfig cfg, double gamma_floor);

  /// Next shift for iteration k.  Cached mode pops the queue and
  /// recomputes once it runs dry; per-iteration mode always recomputes.
  double next(long k, const std::vector<Matrix>& history, const ShiftInputs& in);

  /// Take a pending cached shift if one exists (used after a rejection).
  std::optional<double> pop_pending();

  const ShiftConfig& config() const { return cfg_; }
  const ShiftCache& cache() const { return cache_; }
  double gamma_floor() const { return floor_; }

 private:
  ShiftCache compute(long k, const std::vector<Matrix>& history, const ShiftInputs& in) const;

  ShiftConfig cfg_;
  double floor_;
  ShiftCache cache_;
};

}  // namespace scare
