#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scare/generators.hpp"
#include "scare/problem.hpp"
#include "scare/radi.hpp"

namespace scare {

/// "heat:n=1357,m=7,l=6[,mass=1][,stiffness=5]"
struct GeneratorSpec {
  Index n = 1357;
  Index m = 7;
  Index l = 6;
  bool mass = false;
  double stiffness = kDefaultHeatStiffness;

  static GeneratorSpec parse(const std::string& text);
  std::string to_string() const;
};

using LoadedProblem = std::variant<OriginalProblem, StandardProblem>;

/// Reads A.mtx, B.mtx, C.mtx and the optional E, L, R, A<i>, B<i> files.
/// Without L and R the problem is taken to be in standard form.
LoadedProblem load_problem(const std::string& dir);

/// Writes a natively standard problem in the layout load_problem reads.
void save_problem(const std::string& dir, const StandardProblem& p);

/// Standardized (or adapter) view of a loaded problem.
StandardProblem as_standard(const LoadedProblem& p, bool adapter = false);

struct ExperimentConfig {
  std::optional<std::string> problem_path;
  std::optional<GeneratorSpec> generator;
  std::vector<int> r_values;  // empty: every case
  std::vector<double> noise_scales{1e-5, 1e-4, 1e-3, 1e-2};
  double noise_density = 1.0;
  std::vector<ShiftConfig> shifts = ShiftConfig::full_grid();
  double tol = 1e-12;
  int max_iter = 300;
  double trunc_rel = 3.33e-15;
  std::optional<Index> cap_cols;
  std::optional<Index> max_xi_cols;
  bool stop_on_stall = false;
  std::uint64_t seed = 42;
  std::string output_dir;

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;
  SolveOptions solve_options(const ShiftConfig& shift) const;
};

/// One problem of the grid: r = 1, r = 2 per noise scale, and all scales
/// combined.
struct GridCase {
  std::string name;  // "r1", "r2_ns1e-05", "r5"
  int r = 1;
  std::vector<double> noise;
  std::size_t first_stream = 0;
};

std::vector<GridCase> grid_cases(const ExperimentConfig& cfg);

/// Base (noise-free) problem of the configuration.
StandardProblem base_problem(const ExperimentConfig& cfg);
StandardProblem case_problem(const StandardProblem& base, const GridCase& c,
                             const ExperimentConfig& cfg);

struct CellResult {
  GridCase grid_case;
  ShiftConfig shift;
  RunReport report;
  std::string error;  // non-empty when the solve threw
};

/// Worker count: SCARE_RADI_THREADS if set, else hardware concurrency.
int worker_threads();

/// Runs every (case, shift) cell.  Cells run on up to `threads` workers and
/// are returned in grid order.  Writes traces and summaries when
/// cfg.output_dir is set.
std::vector<CellResult> run_grid(const ExperimentConfig& cfg, int threads = 0);

}  // namespace scare
