// scare-radi: solve one SCARE, run the shift-variant grid, or run the
// oracle self-checks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "scare/errors.hpp"
#include "scare/experiment.hpp"
#include "scare/generators.hpp"
#include "scare/oracles.hpp"
#include "scare/radi.hpp"
#include "scare/report.hpp"

namespace fs = std::filesystem;

namespace {

const std::vector<double> kPaperScales{1e-5, 1e-4, 1e-3, 1e-2};

struct SolveArgs {
  std::string problem;
  std::string generate;
  int r = 0;
  std::vector<double> noise;
  double noise_density = 1.0;
  bool adapter = false;
  std::string shift = "hami";
  int window = 1;
  std::string mode = "cached";
  double tol = 1e-12;
  int max_iter = 300;
  double trunc_rel = 3.33e-15;
  long cap_cols = 0;
  long max_xi_cols = 0;
  bool stop_on_stall = false;
  std::uint64_t seed = 42;
  std::string out;
};

int run_solve(const SolveArgs& a) {
  using namespace scare;
  if (a.problem.empty() == a.generate.empty()) {
    std::cerr << "solve: give exactly one of --problem and --generate\n";
    return 2;
  }
  StandardProblem base;
  if (!a.problem.empty()) {
    base = as_standard(load_problem(a.problem), a.adapter);
  } else {
    const GeneratorSpec g = GeneratorSpec::parse(a.generate);
    HeatOptions h;
    h.mass = g.mass;
    h.stiffness = g.stiffness;
    base = gen_heat_problem(g.n, g.m, g.l, a.seed, h);
  }

  std::vector<double> noise = a.noise;
  if (noise.empty() && a.r > 1) {
    if (a.r - 1 > static_cast<int>(kPaperScales.size())) {
      std::cerr << "solve: --r above 5 needs an explicit --noise list\n";
      return 2;
    }
    noise.assign(kPaperScales.begin(), kPaperScales.begin() + (a.r - 1));
  }
  if (a.r > 0 && !a.noise.empty() && a.r != 1 + static_cast<int>(a.noise.size())) {
    std::cerr << "solve: --r " << a.r << " does not match " << a.noise.size()
              << " noise scales\n";
    return 2;
  }
  StandardProblem p = noise.empty() ? base : with_noise(base, noise, a.seed, a.noise_density);

  ShiftConfig shift;
  if (a.shift == "hami") shift.strategy = ShiftStrategy::Hamiltonian;
  else if (a.shift == "proj") shift.strategy = ShiftStrategy::Projection;
  else throw Error("unknown --shift '" + a.shift + "'");
  shift.mode = a.mode == "per-iter" ? ShiftMode::PerIteration : ShiftMode::Cached;
  shift.window_s = a.window;

  SolveOptions o;
  o.tol_nres = a.tol;
  o.max_iter = a.max_iter;
  o.trunc_rel = a.trunc_rel;
  if (a.cap_cols > 0) o.cap_cols = a.cap_cols;
  if (a.max_xi_cols > 0) o.max_xi_cols = a.max_xi_cols;
  o.stop_on_stall = a.stop_on_stall;
  o.shift = shift;

  const SolveResult res = radi_solve(p, o);
  const RunReport& rep = res.report;

  nlohmann::json echo{{"problem", a.problem},       {"generate", a.generate},
                      {"r", p.r()},                 {"noise", noise},
                      {"noise_density", a.noise_density},
                      {"adapter", a.adapter},       {"shift", shift.label()},
                      {"tol", a.tol},               {"max_iter", a.max_iter},
                      {"trunc_rel", a.trunc_rel},   {"cap_cols", o.cap_cols.value_or(default_cap_cols(p))},
                      {"seed", a.seed},             {"n", p.n()},
                      {"m", p.m()},                 {"l", p.l()}};
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text((fs::path(a.out) / "trace.csv").string(), trace_csv(rep));
    write_text((fs::path(a.out) / "summary.json").string(), run_json(echo.dump(), rep));
  }
  std::printf("%s  r=%ld n=%ld  ite=%ld dim=%ld time=%.3gs nres=%.3e %s\n",
              shift.label().c_str(), static_cast<long>(p.r()), static_cast<long>(p.n()),
              rep.iterations, static_cast<long>(rep.xi_cols), rep.wall_time, rep.final_nres,
              rep.converged ? "converged" : ("stopped: " + rep.stop_reason).c_str());
  return rep.converged ? 0 : 1;
}

int run_grid_cmd(const std::string& config, int threads) {
  using namespace scare;
  const ExperimentConfig cfg = ExperimentConfig::from_json_file(config);
  const auto cells = run_grid(cfg, threads);
  std::cout << summary_csv(cells);
  return 0;
}

int run_validate() {
  int failures = 0;
  for (const auto& c : scare::run_oracle_suite()) {
    std::printf("%-4s %-48s %.3e (limit %.1e)\n", c.passed() ? "ok" : "FAIL", c.name.c_str(),
                c.value, c.threshold);
    if (!c.passed()) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RADI-type solver for large-scale stochastic algebraic Riccati equations"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "solve one problem");
  solve->add_option("--problem", sa.problem, "problem directory (Matrix Market files)");
  solve->add_option("--generate", sa.generate, "generator spec, e.g. heat:n=1357,m=7,l=6");
  solve->add_option("--r", sa.r, "number of terms (1 + noise blocks)");
  solve->add_option("--noise", sa.noise, "noise scales")->delimiter(',');
  solve->add_option("--noise-density", sa.noise_density, "kept fraction of the pattern");
  solve->add_flag("--adapter", sa.adapter, "run original problems through the in-place adapter");
  solve->add_option("--shift", sa.shift, "hami or proj")->check(CLI::IsMember({"hami", "proj"}));
  solve->add_option("--window", sa.window, "number of recent factors spanning the basis")
      ->check(CLI::PositiveNumber);
  solve->add_option("--mode", sa.mode, "cached or per-iter")
      ->check(CLI::IsMember({"cached", "per-iter"}));
  solve->add_option("--tol", sa.tol, "stopping tolerance on nres");
  solve->add_option("--max-iter", sa.max_iter, "iteration limit");
  solve->add_option("--trunc-rel", sa.trunc_rel, "truncation tolerance relative to ||C||_F^2");
  solve->add_option("--cap-cols", sa.cap_cols, "row cap of the residual factor");
  solve->add_option("--max-xi-cols", sa.max_xi_cols, "width budget of the solution factor");
  solve->add_flag("--stop-on-stall", sa.stop_on_stall, "stop once the untruncated part is small");
  solve->add_option("--seed", sa.seed, "generator seed");
  solve->add_option("--out", sa.out, "output directory for trace.csv and summary.json");

  std::string config;
  int threads = 0;
  auto* grid = app.add_subcommand("grid", "run the shift-variant grid");
  grid->add_option("--config", config, "JSON experiment config")->required();
  grid->add_option("--threads", threads, "worker threads (default SCARE_RADI_THREADS or all)");

  app.add_subcommand("validate", "run the oracle self-checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand(solve)) return run_solve(sa);
    if (app.got_subcommand(grid)) return run_grid_cmd(config, threads);
    return run_validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
