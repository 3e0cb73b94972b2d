#include "scare/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "scare/errors.hpp"

#ifndef SCARE_VERSION
#define SCARE_VERSION "0.0.0"
#endif
#ifndef SCARE_GIT_DESCRIBE
#define SCARE_GIT_DESCRIBE "unknown"
#endif

using nlohmann::json;

namespace scare {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string trace_csv(const RunReport& report, bool with_times) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  for (const auto& r : report.records) {
    auto t = [&](double v) { return with_times ? num(v) : std::string("0"); };
    out << r.k << ',' << num(r.gamma) << ',' << num(r.nres) << ',' << r.cols_C << ','
        << r.cols_Xi << ',' << num(r.nu_omega) << ',' << t(r.t_shift) << ',' << t(r.t_solve)
        << ',' << t(r.t_ltimes) << ',' << t(r.t_svd) << ',' << t(r.t_other) << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string remark(const RunReport& report) {
  if (!report.flags.empty()) return report.flags;
  if (report.converged) return "";
  return short_num(report.final_nres);
}

std::string summary_csv(const std::vector<CellResult>& cells, bool with_times) {
  std::ostringstream out;
  out << "case,shift,ite,dim,time,remark\n";
  for (const auto& c : cells) {
    out << c.grid_case.name << ',' << c.shift.label() << ',';
    if (!c.error.empty()) {
      out << ",,,\"error: " << c.error << "\"\n";
      continue;
    }
    out << c.report.iterations << ',' << c.report.xi_cols << ','
        << (with_times ? short_num(c.report.wall_time) : std::string("0")) << ','
        << remark(c.report) << '\n';
  }
  return out.str();
}

std::string summary_json(const ExperimentConfig& cfg, const std::vector<CellResult>& cells,
                         bool with_times) {
  json j;
  j["provenance"] = provenance();
  j["config"] = json::parse(cfg.to_json());
  json runs = json::array();
  for (const auto& c : cells) {
    json r;
    r["case"] = c.grid_case.name;
    r["r"] = c.grid_case.r;
    r["noise"] = c.grid_case.noise;
    r["shift"] = c.shift.label();
    if (!c.error.empty()) {
      r["error"] = c.error;
    } else {
      r["converged"] = c.report.converged;
      r["iterations"] = c.report.iterations;
      r["dim"] = c.report.xi_cols;
      r["final_nres"] = c.report.final_nres;
      r["flags"] = c.report.flags;
      r["stop_reason"] = c.report.stop_reason;
      r["time"] = with_times ? c.report.wall_time : 0.0;
      r["solver_backend"] = c.report.solver_backend;
    }
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);
  return j.dump(2) + "\n";
}

std::string run_json(const std::string& config_echo, const RunReport& report) {
  json j;
  j["provenance"] = provenance();
  j["config"] = json::parse(config_echo);
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["dim"] = report.xi_cols;
  j["final_nres"] = report.final_nres;
  j["flags"] = report.flags;
  j["stop_reason"] = report.stop_reason;
  j["time"] = report.wall_time;
  j["shift"] = report.shift_label;
  j["solver_backend"] = report.solver_backend;
  double t[5] = {0, 0, 0, 0, 0};
  for (const auto& r : report.records) {
    t[0] += r.t_shift;
    t[1] += r.t_solve;
    t[2] += r.t_ltimes;
    t[3] += r.t_svd;
    t[4] += r.t_other;
  }
  j["timing"] = {{"shift", t[0]}, {"solve", t[1]}, {"ltimes", t[2]}, {"svd", t[3]}, {"other", t[4]}};
  return j.dump(2) + "\n";
}

std::string provenance() {
  return std::string("scare_radi ") + SCARE_VERSION + " (" + SCARE_GIT_DESCRIBE + ")";
}

}  // namespace scare
