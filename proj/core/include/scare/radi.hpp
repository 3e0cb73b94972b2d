#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scare/kernels.hpp"
#include "scare/problem.hpp"
#include "scare/shifts.hpp"

namespace scare {

struct SolveOptions {
  double tol_nres = 1e-12;
  int max_iter = 300;
  double trunc_rel = 3.33e-15;  // relative to nu0; 0 keeps every direction
  std::optional<Index> cap_cols;     // rows of C after compression, default 10 r l
  std::optional<Index> max_xi_cols;  // width budget for Xi, flag "m" when hit
  ShiftConfig shift;
  /// Stop once ||C||_F^2 / nu0 < stall_tol even though the truncation debt
  /// keeps nres above tol_nres (flag "t").
  bool stop_on_stall = false;
  double stall_tol = 1e-10;
  SparseSolverConfig solver;
  int max_rejections = 5;
  /// Used in order before the shift generator is consulted.
  std::vector<double> fixed_shifts;
  /// Accumulate sum Omega'Omega densely (tests only, n x n memory).
  bool keep_discarded_gram = false;
};

struct SolverState {
  Matrix xi_buf;  // n x capacity, first xi_cols columns valid
  Index xi_cols = 0;
  Matrix F;
  Matrix Kpi;
  Matrix C;
  double nu0 = 0.0;
  double nu_omega = 0.0;
  long k = 0;
  std::vector<Matrix> s_history;  // most recent last
  std::optional<Matrix> discarded_gram;

  Eigen::Ref<const Matrix> xi() const { return xi_buf.leftCols(xi_cols); }
  Matrix x_dense() const {
    const auto z = xi();
    return z * z.transpose();
  }
  void append_xi(const Matrix& cols);
};

/// Intermediate quantities of the last iteration.
struct IterationScratch {
  double gamma = 0.0;
  Matrix C_A, F_A, C_gamma, Y;
  DenseStack Yhat;
  Matrix N;  // lower, N N' = I + Y Y'
  Matrix S;
  DenseStack C_M;
  Matrix K;         // upper, K'K = I + sum Yhat_i' Z_i
  Matrix M_factor;  // lower, M M' per layout
  TruncationResult trunc;
};

struct StepTimings {
  double solve = 0.0;
  double ltimes = 0.0;
  double svd = 0.0;
};

struct IterationRecord {
  long k = 0;
  double gamma = 0.0;
  double nres = 1.0;
  Index cols_C = 0;
  Index cols_Xi = 0;
  double nu_omega = 0.0;
  double t_shift = 0.0;
  double t_solve = 0.0;
  double t_ltimes = 0.0;
  double t_svd = 0.0;
  double t_other = 0.0;
  int rejections = 0;
};

struct RunReport {
  std::vector<IterationRecord> records;  // records[0] is the k = 0 state
  bool converged = false;
  long iterations = 0;
  Index xi_cols = 0;
  double final_nres = 1.0;
  double wall_time = 0.0;
  std::string flags;        // "", "m" or "t"
  std::string stop_reason;  // "converged", "max_iter", "width", "stall", "exhausted", "zero_rhs"
  std::string shift_label;
  std::string solver_backend;
};

struct SolveResult {
  SolverState state;
  RunReport report;
};

SolverState init_state(const StandardProblem& p, const SolveOptions& opts = {});

/// One iteration of the practical algorithm with shift gamma.  On any error
/// the state is left untouched.
IterationScratch step_once(const StandardProblem& p, SolverState& state, double gamma,
                           const SolveOptions& opts = {}, StepTimings* timings = nullptr);

/// (||C||_F^2 + nu_omega) / nu0.  Throws DegenerateProblem when nu0 = 0.
double nres_trace(const SolverState& state);

Index default_cap_cols(const StandardProblem& p);

SolveResult radi_solve(const StandardProblem& p, const SolveOptions& opts = {});

}  // namespace scare
