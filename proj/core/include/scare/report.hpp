#pragma once

#include <string>
#include <vector>

#include "scare/experiment.hpp"
#include "scare/radi.hpp"

namespace scare {

inline constexpr const char* kTraceHeader =
    "iter,gamma,nres,cols_C,cols_Xi,nu_omega,t_shift,t_solve,t_ltimes,t_svd,t_other";

/// Per-iteration trace.  With `with_times = false` the timing columns are
/// written as 0 so that runs can be compared byte for byte.
std::string trace_csv(const RunReport& report, bool with_times = true);
void write_text(const std::string& path, const std::string& text);

/// (case, shift, ite, dim, time, remark) table, one line per cell.
std::string summary_csv(const std::vector<CellResult>& cells, bool with_times = true);

/// Config echo, provenance and one entry per cell.
std::string summary_json(const ExperimentConfig& cfg, const std::vector<CellResult>& cells,
                         bool with_times = true);

/// Single-run summary used by the solve command.
std::string run_json(const std::string& config_echo, const RunReport& report);

/// "scare_radi <version> (<git describe>)".
std::string provenance();

/// The remark column: flags, or nres at stop when not converged.
std::string remark(const RunReport& report);

}  // namespace scare
