#include "scare/radi.hpp"

#include <chrono>
#include <cmath>

#include "scare/errors.hpp"

namespace scare {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// x * P^{-T} for upper P, i.e. the lower solve with P'.
Matrix lower_left_solve(const Matrix& p, const Matrix& rhs) {
  return p.transpose().triangularView<Eigen::Lower>().solve(rhs);
}

Matrix upper_left_solve(const Matrix& p, const Matrix& rhs) {
  return p.triangularView<Eigen::Upper>().solve(rhs);
}

}  // namespace

void SolverState::append_xi(const Matrix& cols) {
  const Index need = xi_cols + cols.cols();
  if (xi_buf.rows() != cols.rows() && xi_cols == 0) xi_buf.resize(cols.rows(), 0);
  if (need > xi_buf.cols()) {
    Index cap = std::max<Index>(xi_buf.cols(), 16);
    while (cap < need) cap *= 2;
    Matrix grown(xi_buf.rows(), cap);
    grown.leftCols(xi_cols) = xi_buf.leftCols(xi_cols);
    xi_buf.swap(grown);
  }
  xi_buf.middleCols(xi_cols, cols.cols()) = cols;
  xi_cols = need;
}

Index default_cap_cols(const StandardProblem& p) {
  return std::max<Index>(1, 10 * p.r() * p.l());
}

SolverState init_state(const StandardProblem& p, const SolveOptions& opts) {
  p.validate();
  SolverState s;
  s.F = p.F0;
  s.Kpi = p.Kpi0;
  s.C = p.C;
  s.nu0 = p.C.squaredNorm();
  s.xi_buf.resize(p.n(), 0);
  if (opts.keep_discarded_gram) s.discarded_gram = Matrix::Zero(p.n(), p.n());
  return s;
}

double nres_trace(const SolverState& state) {
  if (!(state.nu0 > 0.0)) throw DegenerateProblem("nres undefined: the right-hand side C is zero");
  return (state.C.squaredNorm() + state.nu_omega) / state.nu0;
}

IterationScratch step_once(const StandardProblem& p, SolverState& state, double gamma,
                           const SolveOptions& opts, StepTimings* timings) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ShiftRejected("shift must be positive, got " + std::to_string(gamma));
  }
  const Index m = p.m();
  const Index n = p.n();
  const Index blocks = p.Ahat.block_count();
  const double s2g = std::sqrt(2.0 * gamma);
  IterationScratch sc;
  sc.gamma = gamma;
  StepTimings local;

  // C_A, F_A from one factorization and the SMW correction.
  auto t0 = Clock::now();
  const ShiftedFactorization fac(p.A, p.e_ptr(), gamma, opts.solver);
  const SmwSolve smw = smw_solve(fac, p.B, state.F, state.C);
  local.solve = seconds_since(t0);
  sc.C_A = smw.rows_a;
  sc.F_A = smw.f_a;
  sc.C_gamma = s2g * smw.result;
  sc.Y = right_solve_upper(smw.rows_core, state.Kpi);

  t0 = Clock::now();
  sc.C_M = ltimes(sc.C_gamma, p.Ahat);
  sc.Yhat = ltimes(sc.C_gamma, p.Bhat);
  local.ltimes = seconds_since(t0);

  // N N' = I + Y Y'.  chol_spd gives P'P, so N = P'.
  const Index l = sc.C_gamma.rows();
  const Matrix nn = Matrix::Identity(l, l) + sc.Y * sc.Y.transpose();
  const Matrix pn = chol_spd(nn);
  sc.N = pn.transpose();
  sc.S = lower_left_solve(pn, sc.C_gamma);

  Matrix t = s2g * upper_left_solve(pn, sc.S);  // sqrt(2g) N^{-T} S
  if (p.E) t = t * (*p.E);
  Matrix c_new = state.C + t;
  Matrix f_new = state.F - upper_left_solve(state.Kpi, Matrix(sc.Y.transpose())) * t;

  Matrix g = Matrix::Zero(m, n);
  Matrix ktk = Matrix::Identity(m, m);
  DenseStack z(l, m);
  for (Index i = 0; i < blocks; ++i) {
    sc.C_M.block(i).noalias() += sc.Yhat.block(i) * f_new;
    sc.Yhat.block(i) = right_solve_upper(sc.Yhat.block(i), state.Kpi);
    Matrix zi = upper_left_solve(pn, lower_left_solve(pn, sc.Yhat.block(i)));
    ktk.noalias() += sc.Yhat.block(i).transpose() * zi;
    g.noalias() += zi.transpose() * sc.C_M.block(i);
  }
  // K'K convention matches chol_spd directly.
  sc.K = chol_spd(0.5 * (ktk + ktk.transpose()));
  Matrix kpi_new = sc.K * state.Kpi;
  if (blocks > 0) {
    const Matrix kg = sc.K.transpose().triangularView<Eigen::Lower>().solve(g);
    f_new -= upper_left_solve(kpi_new, kg);
  }

  Matrix stacked;
  if (blocks > 0) {
    const BlockLayout layout = p.layout();
    const Matrix yh = stack_rows(sc.Yhat, layout);
    Matrix mm = kron_identity(nn, blocks, layout);
    mm.noalias() += yh * yh.transpose();
    const Matrix pm = chol_spd(mm);
    sc.M_factor = pm.transpose();
    stacked.resize(c_new.rows() + blocks * l, n);
    stacked.topRows(c_new.rows()) = c_new;
    stacked.bottomRows(blocks * l) = lower_left_solve(pm, stack_rows(sc.C_M, p.layout()));
  } else {
    sc.M_factor.resize(0, 0);
    stacked = c_new;
  }

  t0 = Clock::now();
  const Index cap = opts.cap_cols.value_or(default_cap_cols(p));
  sc.trunc = trunc_svd(stacked, opts.trunc_rel * state.nu0, cap);
  local.svd = seconds_since(t0);

  // Commit.
  Matrix c_trunc = sc.trunc.factor();
  if (state.discarded_gram) {
    *state.discarded_gram += stacked.transpose() * stacked - c_trunc.transpose() * c_trunc;
  }
  state.append_xi(sc.S.transpose());
  state.C = std::move(c_trunc);
  state.F = std::move(f_new);
  state.Kpi = std::move(kpi_new);
  state.nu_omega += sc.trunc.discarded_sq_trace;
  state.k += 1;
  state.s_history.push_back(sc.S);
  const auto keep = static_cast<size_t>(std::max(opts.shift.window_s, 1));
  while (state.s_history.size() > keep) state.s_history.erase(state.s_history.begin());
  if (timings) *timings = local;
  return sc;
}

SolveResult radi_solve(const StandardProblem& p, const SolveOptions& opts) {
  if (!(opts.tol_nres > 0.0)) throw Error("tol_nres must be positive");
  if (opts.trunc_rel < 0.0) throw Error("trunc_rel must be nonnegative");
  const auto wall0 = Clock::now();
  SolveResult out;
  SolverState& st = out.state;
  RunReport& rep = out.report;
  st = init_state(p, opts);
  rep.shift_label = opts.shift.label();
  rep.solver_backend = opts.solver.describe();

  IterationRecord first;
  first.cols_C = st.C.rows();
  rep.records.push_back(first);

  if (st.nu0 == 0.0) {
    rep.converged = true;
    rep.final_nres = 0.0;
    rep.records.front().nres = 0.0;
    rep.stop_reason = "zero_rhs";
    rep.wall_time = seconds_since(wall0);
    return out;
  }

  std::optional<ShiftedFactorization> mass;
  if (p.E) mass.emplace(SparseMatrix(p.E->transpose()), nullptr, 0.0, opts.solver);
  ShiftGenerator shifts(opts.shift,
                        opts.shift.gamma_floor.value_or(default_gamma_floor(p.A)));
  size_t fixed_pos = 0;

  for (;;) {
    const double nres = nres_trace(st);
    rep.final_nres = nres;
    if (nres <= opts.tol_nres) {
      rep.converged = true;
      rep.stop_reason = "converged";
      break;
    }
    if (opts.stop_on_stall && st.k > 0 && st.C.squaredNorm() / st.nu0 < opts.stall_tol) {
      rep.flags = "t";
      rep.stop_reason = "stall";
      break;
    }
    if (st.C.rows() == 0) {
      // Everything left is truncation debt; no further step can reduce it.
      rep.stop_reason = "exhausted";
      break;
    }
    if (opts.max_xi_cols && st.xi_cols >= *opts.max_xi_cols) {
      rep.flags = "m";
      rep.stop_reason = "width";
      break;
    }
    if (st.k >= opts.max_iter) {
      rep.stop_reason = "max_iter";
      break;
    }

    const auto it0 = Clock::now();
    IterationRecord rec;
    auto t0 = Clock::now();
    double gamma;
    if (fixed_pos < opts.fixed_shifts.size()) {
      gamma = opts.fixed_shifts[fixed_pos++];
    } else {
      const ShiftInputs in{&p, &st.F, &st.Kpi, &st.C, mass ? &*mass : nullptr};
      gamma = shifts.next(st.k, st.s_history, in);
    }
    rec.t_shift = seconds_since(t0);

    StepTimings tm;
    for (int attempt = 0;; ++attempt) {
      try {
        step_once(p, st, gamma, opts, &tm);
        break;
      } catch (const ShiftRejected&) {
      } catch (const SpdViolation&) {
      }
      rec.rejections = attempt + 1;
      if (rec.rejections >= opts.max_rejections) {
        throw NumericalBreakdown("iteration " + std::to_string(st.k) + ": " +
                                     std::to_string(rec.rejections) + " shifts rejected",
                                 st.k);
      }
      t0 = Clock::now();
      gamma = shifts.pop_pending().value_or(gamma * (1.0 + 0.1 * (attempt + 1)));
      rec.t_shift += seconds_since(t0);
    }

    rec.k = st.k;
    rec.gamma = gamma;
    rec.nres = nres_trace(st);
    rec.cols_C = st.C.rows();
    rec.cols_Xi = st.xi_cols;
    rec.nu_omega = st.nu_omega;
    rec.t_solve = tm.solve;
    rec.t_ltimes = tm.ltimes;
    rec.t_svd = tm.svd;
    const double wall = seconds_since(it0);
    rec.t_other = std::max(0.0, wall - rec.t_shift - rec.t_solve - rec.t_ltimes - rec.t_svd);
    rep.records.push_back(rec);
  }
  rep.iterations = st.k;
  rep.xi_cols = st.xi_cols;
  rep.wall_time = seconds_since(wall0);
  return out;
}

}  // namespace scare
