// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.  `scare_acceptance 3 8` runs a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "scare/errors.hpp"
#include "scare/experiment.hpp"
#include "scare/generators.hpp"
#include "scare/kernels.hpp"
#include "scare/oracles.hpp"
#include "scare/prototype.hpp"
#include "scare/radi.hpp"
#include "scare/report.hpp"

namespace {

using namespace scare;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

double rel(const Matrix& a, const Matrix& b) {
  const double d = (a - b).norm();
  if (d == 0.0) return 0.0;
  return d / std::max(a.norm(), b.norm());
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Matrix random_spd(Index n, Rng& rng, double scale) {
  const Matrix g = rng.matrix(n, n);
  return scale * (g * g.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n));
}

Matrix random_sym(Index n, Rng& rng, double scale) {
  const Matrix g = rng.matrix(n, n);
  return 0.5 * scale * (g + g.transpose());
}

// Mix of plain and genuinely dimension-mismatched operands.
Outcome identities() {
  Rng rng(101);
  double worst = 0.0;
  int skipped = 0;
  for (int i = 0; i < 200; ++i) {
    const Index k = 1 + i % 3;
    Matrix u, v;
    switch (i % 3) {
      case 0:  // ordinary product
        u = rng.matrix(k + 1, k);
        v = rng.matrix(k, k + 1);
        break;
      case 1:  // U is k^2 x k, V is 1 x k
        u = rng.matrix((k + 1) * (k + 1), k + 1);
        v = rng.matrix(1, k + 1);
        break;
      default:  // U is k x k^2, V is k x 1
        u = rng.matrix(k + 1, (k + 1) * (k + 1));
        v = rng.matrix(k + 1, 1);
        break;
    }
    const IdentityDeviation d = ltimes_identities_check(u, v);
    worst = std::max(worst, d.max());
    if (d.inverse_skipped) ++skipped;

    // SMW: M is 4x4 or 9x9, U ⋉ D is rows x q and V is 1 x q.
    const Index q = 2 + i % 2;
    const Index rows = q * q;
    const Matrix m = static_cast<double>(rows) * Matrix::Identity(rows, rows) +
                     rng.matrix(rows, rows);
    const Matrix uu = rng.matrix(rows, q);
    const Matrix dd = Matrix::Identity(q, q) + 0.3 * rng.matrix(q, q);
    const Matrix vv = rng.matrix(1, q);
    if (const auto s = smw_identity_deviation(m, uu, dd, vv)) {
      worst = std::max(worst, *s);
    } else {
      ++skipped;
    }
  }
  Outcome o;
  o.ok = worst <= 1e-11 && skipped < 20;
  o.detail = "max dev " + sci(worst) + ", " + std::to_string(skipped) + " skipped";
  return o;
}

Outcome residual_formula() {
  const Index sizes[] = {5, 20, 80, 200};
  const Index ranks[] = {1, 2, 3, 5};
  const double gammas[] = {0.1, 1.0, 10.0};
  double worst = 0.0;
  int skipped = 0;
  for (int i = 0; i < 100; ++i) {
    const Index n = sizes[i % 4];
    const Index r = ranks[(i / 4) % 4];
    const double g = gammas[(i / 16) % 3];
    const auto seed = static_cast<std::uint64_t>(1000 + i);
    StandardProblem p;
    if (i % 10 == 9) {
      p = adapt_in_place(gen_random_original(n, 2, 3, r, seed));
    } else {
      RandomOptions opts;
      opts.mass = i % 7 == 3;
      p = gen_random_problem(n, 1 + i % 3, 1 + i % 4, r, seed, opts);
    }
    const ResidualFormulaCheck chk = residual_formula_check(p, g);
    if (chk.skipped) {
      ++skipped;
      continue;
    }
    worst = std::max({worst, chk.deviation, chk.feedback_deviation});
  }
  // Hand-checked scalar case: a = -1, b = c = 1, gamma = 1.
  SparseMatrix a(1, 1);
  a.insert(0, 0) = -1.0;
  const StandardProblem s = StandardProblem::make(a, Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  const ResidualFormulaCheck sc = residual_formula_check(s, 1.0);
  const double scalar_err = std::abs(sc.X(0, 0) - 0.4) +
                            std::abs(residual_dense(s, sc.X)(0, 0) - 1.0 / 25.0) +
                            std::abs(sc.Ctilde(0, 0) * sc.Ctilde(0, 0) - 1.0 / 25.0);
  Outcome o;
  o.ok = worst <= 1e-10 && skipped == 0 && scalar_err <= 1e-15;
  o.detail = "max dev " + sci(worst) + ", scalar err " + sci(scalar_err) + ", " +
             std::to_string(skipped) + " skipped";
  return o;
}

Outcome incorporation() {
  Rng rng(303);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Index n = 5 + (i * 7) % 36;
    const Index r = 1 + i % 4;
    RandomOptions opts;
    opts.mass = i % 5 == 2;
    const StandardProblem p =
        gen_random_problem(n, 1 + i % 3, 2, r, static_cast<std::uint64_t>(3000 + i), opts);
    const Matrix x = random_spd(n, rng, 0.2);
    const Matrix d = random_sym(n, rng, 0.05);
    worst = std::max(worst, rel(incorporation_residual_dense(p, x, d), residual_dense(p, x + d)));
  }
  return {worst <= 1e-9, "max dev " + sci(worst)};
}

Outcome prototype_equivalence() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Index n = 10 + (i * 13) % 51;
    const Index r = 1 + i % 3;
    const auto seed = static_cast<std::uint64_t>(4000 + i);
    StandardProblem p;
    if (i % 5 == 4) {
      p = adapt_in_place(gen_random_original(n, 2, 2, r, seed));
    } else {
      RandomOptions opts;
      opts.mass = i % 4 == 1;
      p = gen_random_problem(n, 2, 3, r, seed, opts);
    }
    Alg1State proto = alg1_init(p);
    SolveOptions so;
    so.trunc_rel = 0.0;
    so.cap_cols = 100000;
    SolverState st = init_state(p, so);
    for (int k = 0; k < 10; ++k) {
      const double g = 0.2 + 0.45 * ((k * 3 + i) % 7);
      alg1_step(proto, g);
      step_once(p, st, g, so);
      worst = std::max(worst, rel(proto.x_dense(), st.x_dense()));
    }
  }
  return {worst <= 1e-10, "max dev " + sci(worst)};
}

Outcome bookkeeping() {
  double worst = 0.0;
  double debt = 0.0;
  for (int i = 0; i < 12; ++i) {
    const Index n = 15 + (i * 11) % 46;
    const Index r = 1 + i % 4;
    RandomOptions ropts;
    ropts.mass = i % 3 == 2;
    const StandardProblem p =
        gen_random_problem(n, 2, 3, r, static_cast<std::uint64_t>(5000 + i), ropts);
    SolveOptions opts;
    opts.trunc_rel = i % 2 ? 1e-8 : 1e-12;
    opts.keep_discarded_gram = true;
    SolverState st = init_state(p, opts);
    const double scale = (p.C.transpose() * p.C).norm();
    for (int k = 0; k < 15; ++k) {
      step_once(p, st, 0.3 + 0.4 * ((k + i) % 6), opts);
      const Matrix res = residual_dense(p, st.x_dense());
      const Matrix tracked = st.C.transpose() * st.C + *st.discarded_gram;
      worst = std::max(worst, (res - tracked).norm() / scale);
    }
    debt = std::max(debt, st.nu_omega / st.nu0);
  }
  Outcome o;
  o.ok = worst <= 1e-9 && debt > 0.0;
  o.detail = "max dev " + sci(worst) + " (relative to ||C'C||), debt up to " + sci(debt);
  return o;
}

Outcome oracle_agreement() {
  double newton_worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Index n = 10 + 4 * i;  // 10 .. 46
    const Index r = 2 + i % 2;
    RandomOptions opts;
    opts.mass = i % 4 == 3;
    const StandardProblem p =
        gen_random_problem(n, 2, 2, r, static_cast<std::uint64_t>(6000 + i), opts);
    const DenseSolution ref = newton_ref_solve(p);
    const SolveResult res = radi_solve(p);
    if (!res.report.converged) return {false, "radi did not converge on instance " + std::to_string(i)};
    newton_worst = std::max(newton_worst, rel(res.state.x_dense(), ref.X));
  }
  double schur_worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Index n = 20 * (i + 1);  // up to 100
    RandomOptions opts;
    opts.mass = i == 2;
    const StandardProblem p =
        gen_random_problem(n, 2, 3, 1, static_cast<std::uint64_t>(6100 + i), opts);
    const Matrix e = p.E ? Matrix(*p.E) : Matrix();
    const DenseSolution ref = care_schur_solve(Matrix(p.A), p.B, p.C, p.E ? &e : nullptr);
    const SolveResult res = radi_solve(p);
    if (!res.report.converged) return {false, "radi did not converge on r = 1 instance"};
    schur_worst = std::max(schur_worst, rel(res.state.x_dense(), ref.X));
  }
  Outcome o;
  o.ok = newton_worst <= 1e-8 && schur_worst <= 1e-8;
  o.detail = "vs Newton " + sci(newton_worst) + ", vs Schur " + sci(schur_worst);
  return o;
}

Outcome smw() {
  Rng rng(707);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Index n = 10 + (i * 37) % 291;
    const Index m = 1 + i % 4;
    RandomOptions opts;
    opts.mass = i % 6 == 5;
    const StandardProblem p =
        gen_random_problem(n, m, 2, 1, static_cast<std::uint64_t>(7000 + i), opts);
    const Matrix f = 0.5 * rng.matrix(m, n);
    const Matrix rows = rng.matrix(1 + i % 5, n);
    const double g = 0.1 + 0.7 * (i % 9);
    const ShiftedFactorization fac(p.A, p.e_ptr(), g);
    const Matrix got = smw_row_solve(fac, p.B, f, rows);
    const Matrix e = p.E ? Matrix(*p.E) : Matrix::Identity(n, n);
    const Matrix dense = Matrix(p.A) + p.B * f - g * e;
    const Matrix ref = dense.transpose().partialPivLu().solve(rows.transpose()).transpose();
    worst = std::max(worst, rel(got, ref));
  }
  return {worst <= 1e-10, "max dev " + sci(worst)};
}

StandardProblem desk_problem() { return gen_heat_problem(1357, 7, 6, 42); }

Outcome desk_scale() {
  SolveOptions o;
  o.shift = ShiftConfig::parse("hami 1");
  const SolveResult res = radi_solve(desk_problem(), o);
  const RunReport& r = res.report;
  Outcome out;
  out.ok = r.converged && r.final_nres < 1e-12 && r.iterations <= 300;
  out.detail = std::to_string(r.iterations) + " iterations, dim " + std::to_string(r.xi_cols) +
               ", nres " + sci(r.final_nres) + " (Rail reference: 38 iterations, dim 228)";
  return out;
}

Outcome stochastic_desk_scale() {
  const StandardProblem p = with_noise(desk_problem(), {1e-5, 1e-4, 1e-3, 1e-2}, 42);
  SolveOptions o;
  o.shift = ShiftConfig::parse("hami 1");
  const SolveResult res = radi_solve(p, o);
  const RunReport& r = res.report;
  Outcome out;
  out.ok = r.converged && r.final_nres < 1e-12 && r.iterations <= 300;
  out.detail = std::to_string(r.iterations) + " iterations, dim " + std::to_string(r.xi_cols) +
               ", nres " + sci(r.final_nres) + ", stop " + r.stop_reason +
               " (Rail reference: 69 iterations)";
  return out;
}

Outcome determinism() {
  const auto out_dir = std::filesystem::temp_directory_path() / "scare_acceptance_grid";
  ExperimentConfig cfg = ExperimentConfig::from_json(R"({
    "generator": "heat:n=200,m=3,l=2", "noise_scales": [1e-3, 1e-2], "shifts": "all",
    "seed": 9})");
  const ExperimentConfig base = cfg;
  auto snapshot = [&](int threads) {
    const auto cells = run_grid(cfg, threads);
    // output_dir is part of the echoed config, so render against the base config
    std::string all = summary_csv(cells, false) + summary_json(base, cells, false);
    for (const auto& c : cells) all += trace_csv(c.report, false);
    return all;
  };
  const std::string a = snapshot(1);
  const std::string b = snapshot(1);
  const std::string c = snapshot(3);
  cfg.output_dir = out_dir.string();
  const std::string d = snapshot(2);
  const bool written = std::filesystem::exists(out_dir / "summary.csv") &&
                       std::filesystem::exists(out_dir / "summary.json");
  std::filesystem::remove_all(out_dir);
  Outcome o;
  o.ok = a == b && a == c && a == d && written;
  o.detail = o.ok ? "4 grid runs (1, 1, 3, 2 threads) identical, " +
                        std::to_string(a.size()) + " bytes"
                  : "grid reports differ between runs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "semi-tensor and SMW identities", 5, identities},
      {2, "low-rank residual formula", 60, residual_formula},
      {3, "incorporation identity", 30, incorporation},
      {4, "prototype and practical iterations agree", 60, prototype_equivalence},
      {5, "residual bookkeeping with truncation", 60, bookkeeping},
      {6, "agreement with Newton and Schur references", 120, oracle_agreement},
      {7, "SMW shifted solve vs dense solve", 30, smw},
      {8, "desk-scale convergence, hami 1, r = 1", 60, desk_scale},
      {9, "stochastic desk-scale run, hami 1, r = 5", 600, stochastic_desk_scale},
      {10, "grid reports are deterministic", 600, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs < c.time_limit;
    const bool pass = o.ok && in_time;
    if (!pass) ++failed;
    std::printf("%s  %2d  %-44s %s; %.1fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), o.detail.c_str(), secs, c.time_limit,
                in_time ? "" : " TIME LIMIT EXCEEDED");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
