#include "scare/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "scare/errors.hpp"
#include "scare/generators.hpp"
#include "scare/kernels.hpp"
#include "scare/matrix_market.hpp"
#include "scare/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace scare {

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind != "heat") throw Error("unknown generator '" + kind + "' (only heat is available)");
  GeneratorSpec g;
  if (colon == std::string::npos) return g;
  std::stringstream in(text.substr(colon + 1));
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("generator option '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "n") g.n = std::stol(val);
      else if (key == "m") g.m = std::stol(val);
      else if (key == "l") g.l = std::stol(val);
      else if (key == "mass") g.mass = val == "1" || val == "true";
      else if (key == "stiffness") g.stiffness = std::stod(val);
      else throw Error("unknown generator option '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error("bad value for generator option '" + key + "'");
    }
  }
  return g;
}

std::string GeneratorSpec::to_string() const {
  std::ostringstream out;
  out << "heat:n=" << n << ",m=" << m << ",l=" << l;
  if (mass) out << ",mass=1";
  if (stiffness != kDefaultHeatStiffness) out << ",stiffness=" << stiffness;
  return out.str();
}

namespace {

std::string file_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

bool exists_in(const std::string& dir, const std::string& name) {
  return fs::exists(fs::path(dir) / name);
}

void check_shape(const std::string& file, Index rows, Index cols, Index want_rows,
                 Index want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw LoadError(file + ": shape " + shape_string(rows, cols) + ", expected " +
                    shape_string(want_rows, want_cols));
  }
}

}  // namespace

LoadedProblem load_problem(const std::string& dir) {
  if (!fs::is_directory(dir)) throw LoadError(dir + ": not a directory");
  for (const char* need : {"A.mtx", "B.mtx", "C.mtx"}) {
    if (!exists_in(dir, need)) throw LoadError(file_in(dir, need) + ": missing");
  }
  SparseMatrix a = read_mm_sparse(file_in(dir, "A.mtx"));
  const Index n = a.rows();
  check_shape(file_in(dir, "A.mtx"), a.rows(), a.cols(), n, n);
  Matrix b = read_mm_dense(file_in(dir, "B.mtx"));
  check_shape(file_in(dir, "B.mtx"), b.rows(), b.cols(), n, b.cols());
  const Index m = b.cols();
  Matrix c = read_mm_dense(file_in(dir, "C.mtx"));
  check_shape(file_in(dir, "C.mtx"), c.rows(), c.cols(), c.rows(), n);

  std::optional<SparseMatrix> e;
  if (exists_in(dir, "E.mtx")) {
    e = read_mm_sparse(file_in(dir, "E.mtx"));
    check_shape(file_in(dir, "E.mtx"), e->rows(), e->cols(), n, n);
  }
  std::vector<SparseMatrix> as;
  std::vector<Matrix> bs;
  for (int i = 1;; ++i) {
    const std::string an = "A" + std::to_string(i) + ".mtx";
    const std::string bn = "B" + std::to_string(i) + ".mtx";
    if (!exists_in(dir, an)) {
      if (exists_in(dir, bn)) throw LoadError(file_in(dir, an) + ": missing (found " + bn + ")");
      break;
    }
    as.push_back(read_mm_sparse(file_in(dir, an)));
    check_shape(file_in(dir, an), as.back().rows(), as.back().cols(), n, n);
    if (exists_in(dir, bn)) {
      bs.push_back(read_mm_dense(file_in(dir, bn)));
      check_shape(file_in(dir, bn), bs.back().rows(), bs.back().cols(), n, m);
    } else {
      bs.push_back(Matrix::Zero(n, m));
    }
  }

  const bool has_l = exists_in(dir, "L.mtx");
  const bool has_r = exists_in(dir, "R.mtx");
  if (has_l || has_r) {
    OriginalProblem o;
    o.A_list.push_back(std::move(a));
    o.B_list.push_back(std::move(b));
    for (size_t i = 0; i < as.size(); ++i) {
      o.A_list.push_back(std::move(as[i]));
      o.B_list.push_back(std::move(bs[i]));
    }
    o.C0 = std::move(c);
    o.E = std::move(e);
    o.L = has_l ? read_mm_dense(file_in(dir, "L.mtx")) : Matrix::Zero(n, m);
    if (has_l) check_shape(file_in(dir, "L.mtx"), o.L.rows(), o.L.cols(), n, m);
    o.R = has_r ? read_mm_dense(file_in(dir, "R.mtx")) : Matrix::Identity(m, m);
    if (has_r) {
      check_shape(file_in(dir, "R.mtx"), o.R.rows(), o.R.cols(), m, m);
      try {
        chol_spd(o.R);
      } catch (const SpdViolation& err) {
        throw LoadError(file_in(dir, "R.mtx") + ": not SPD (" + err.what() + ")");
      }
    }
    return o;
  }
  SparseStack ahat(n, n);
  DenseStack bhat(n, m);
  for (size_t i = 0; i < as.size(); ++i) {
    ahat.push_back(std::move(as[i]));
    bhat.push_back(std::move(bs[i]));
  }
  return StandardProblem::make(std::move(a), std::move(b), std::move(c), std::move(ahat),
                               std::move(bhat), std::move(e));
}

void save_problem(const std::string& dir, const StandardProblem& p) {
  if (p.F0.squaredNorm() != 0.0 || !p.Kpi0.isIdentity(0.0)) {
    throw Error("save_problem: only natively standard problems can be written");
  }
  fs::create_directories(dir);
  write_mm(file_in(dir, "A.mtx"), p.A);
  write_mm(file_in(dir, "B.mtx"), p.B);
  write_mm(file_in(dir, "C.mtx"), p.C);
  if (p.E) write_mm(file_in(dir, "E.mtx"), *p.E);
  for (Index i = 0; i < p.Ahat.block_count(); ++i) {
    write_mm(file_in(dir, "A" + std::to_string(i + 1) + ".mtx"), p.Ahat.block(i));
    write_mm(file_in(dir, "B" + std::to_string(i + 1) + ".mtx"), p.Bhat.block(i));
  }
}

StandardProblem as_standard(const LoadedProblem& p, bool adapter) {
  if (const auto* s = std::get_if<StandardProblem>(&p)) return *s;
  const auto& o = std::get<OriginalProblem>(p);
  return adapter ? adapt_in_place(o) : standardize(o);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("problem_path")) c.problem_path = j.at("problem_path").get<std::string>();
    if (j.contains("generator")) c.generator = GeneratorSpec::parse(j.at("generator").get<std::string>());
    if (j.contains("r")) c.r_values = j.at("r").get<std::vector<int>>();
    if (j.contains("noise_scales")) c.noise_scales = j.at("noise_scales").get<std::vector<double>>();
    if (j.contains("noise_density")) c.noise_density = j.at("noise_density").get<double>();
    if (j.contains("shifts")) {
      const auto& s = j.at("shifts");
      if (s.is_string() && s.get<std::string>() == "all") {
        c.shifts = ShiftConfig::full_grid();
      } else {
        c.shifts.clear();
        for (const auto& label : s) c.shifts.push_back(ShiftConfig::parse(label.get<std::string>()));
      }
    }
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
    if (j.contains("trunc_rel")) c.trunc_rel = j.at("trunc_rel").get<double>();
    if (j.contains("cap_cols") && !j.at("cap_cols").is_null()) c.cap_cols = j.at("cap_cols").get<Index>();
    if (j.contains("max_xi_cols") && !j.at("max_xi_cols").is_null())
      c.max_xi_cols = j.at("max_xi_cols").get<Index>();
    if (j.contains("stop_on_stall")) c.stop_on_stall = j.at("stop_on_stall").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!c.problem_path && !c.generator) c.generator = GeneratorSpec{};
  if (!(c.tol > 0.0)) throw Error("config: tol must be positive");
  if (c.trunc_rel < 0.0) throw Error("config: trunc_rel must be nonnegative");
  if (c.max_iter < 0) throw Error("config: max_iter must be nonnegative");
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string ExperimentConfig::to_json() const {
  json j;
  if (problem_path) j["problem_path"] = *problem_path;
  if (generator) j["generator"] = generator->to_string();
  j["r"] = r_values;
  j["noise_scales"] = noise_scales;
  j["noise_density"] = noise_density;
  std::vector<std::string> labels;
  for (const auto& s : shifts) labels.push_back(s.label());
  j["shifts"] = labels;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["trunc_rel"] = trunc_rel;
  j["cap_cols"] = cap_cols ? json(*cap_cols) : json(nullptr);
  j["max_xi_cols"] = max_xi_cols ? json(*max_xi_cols) : json(nullptr);
  j["stop_on_stall"] = stop_on_stall;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

SolveOptions ExperimentConfig::solve_options(const ShiftConfig& shift) const {
  SolveOptions o;
  o.tol_nres = tol;
  o.max_iter = max_iter;
  o.trunc_rel = trunc_rel;
  o.cap_cols = cap_cols;
  o.max_xi_cols = max_xi_cols;
  o.stop_on_stall = stop_on_stall;
  o.shift = shift;
  return o;
}

namespace {

std::string ns_tag(double ns) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", ns);
  return buf;
}

bool wanted(const ExperimentConfig& cfg, int r) {
  return cfg.r_values.empty() ||
         std::find(cfg.r_values.begin(), cfg.r_values.end(), r) != cfg.r_values.end();
}

}  // namespace

std::vector<GridCase> grid_cases(const ExperimentConfig& cfg) {
  std::vector<GridCase> out;
  if (wanted(cfg, 1)) out.push_back({"r1", 1, {}, 0});
  if (wanted(cfg, 2)) {
    for (size_t i = 0; i < cfg.noise_scales.size(); ++i) {
      out.push_back({"r2_ns" + ns_tag(cfg.noise_scales[i]), 2, {cfg.noise_scales[i]}, i});
    }
  }
  const int r_all = 1 + static_cast<int>(cfg.noise_scales.size());
  if (cfg.noise_scales.size() > 1 && wanted(cfg, r_all)) {
    out.push_back({"r" + std::to_string(r_all), r_all, cfg.noise_scales, 0});
  }
  return out;
}

StandardProblem base_problem(const ExperimentConfig& cfg) {
  if (cfg.problem_path) return as_standard(load_problem(*cfg.problem_path));
  const GeneratorSpec g = cfg.generator.value_or(GeneratorSpec{});
  HeatOptions h;
  h.mass = g.mass;
  h.stiffness = g.stiffness;
  return gen_heat_problem(g.n, g.m, g.l, cfg.seed, h);
}

StandardProblem case_problem(const StandardProblem& base, const GridCase& c,
                             const ExperimentConfig& cfg) {
  if (c.noise.empty()) return base;
  return with_noise(base, c.noise, cfg.seed, cfg.noise_density, c.first_stream);
}

int worker_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("SCARE_RADI_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
    }
  }
  return n;
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg, int threads) {
  const StandardProblem base = base_problem(cfg);
  std::vector<GridCase> cases;
  if (base.r() > 1) {
    // A loaded problem that already carries noise is run as given.
    cases.push_back({"r" + std::to_string(base.r()), static_cast<int>(base.r()), {}, 0});
  } else {
    cases = grid_cases(cfg);
  }
  std::vector<StandardProblem> problems;
  for (const auto& c : cases) problems.push_back(case_problem(base, c, cfg));

  std::vector<CellResult> cells;
  std::vector<size_t> owner;
  for (size_t ci = 0; ci < cases.size(); ++ci) {
    for (const auto& s : cfg.shifts) {
      cells.push_back({cases[ci], s, {}, {}});
      owner.push_back(ci);
    }
  }

  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < cells.size(); i = next++) {
      try {
        cells[i].report = radi_solve(problems[owner[i]], cfg.solve_options(cells[i].shift)).report;
      } catch (const std::exception& e) {
        cells[i].error = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads > 0 ? threads : worker_threads(),
                                                  static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  if (!cfg.output_dir.empty()) {
    fs::create_directories(fs::path(cfg.output_dir) / "traces");
    for (const auto& c : cells) {
      std::string label = c.shift.label();
      std::replace(label.begin(), label.end(), ' ', '_');
      write_text((fs::path(cfg.output_dir) / "traces" / (c.grid_case.name + "__" + label + ".csv"))
                     .string(),
                 trace_csv(c.report));
    }
    write_text((fs::path(cfg.output_dir) / "summary.csv").string(), summary_csv(cells));
    write_text((fs::path(cfg.output_dir) / "summary.json").string(), summary_json(cfg, cells));
  }
  return cells;
}

}  // namespace scare
