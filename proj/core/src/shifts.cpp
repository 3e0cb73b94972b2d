#include "scare/shifts.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "scare/errors.hpp"

namespace scare {

std::string ShiftConfig::label() const {
  std::string out = strategy == ShiftStrategy::Hamiltonian ? "hami" : "proj";
  if (mode == ShiftMode::PerIteration) out += " c";
  return out + " " + std::to_string(window_s);
}

ShiftConfig ShiftConfig::parse(const std::string& label) {
  std::istringstream in(label);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  ShiftConfig cfg;
  if (words.size() < 2 || words.size() > 3) throw Error("bad shift label '" + label + "'");
  if (words[0] == "hami") {
    cfg.strategy = ShiftStrategy::Hamiltonian;
  } else if (words[0] == "proj") {
    cfg.strategy = ShiftStrategy::Projection;
  } else {
    throw Error("unknown shift strategy in '" + label + "'");
  }
  if (words.size() == 3) {
    if (words[1] != "c") throw Error("bad shift label '" + label + "'");
    cfg.mode = ShiftMode::PerIteration;
  }
  try {
    cfg.window_s = std::stoi(words.back());
  } catch (const std::exception&) {
    throw Error("bad window in shift label '" + label + "'");
  }
  if (cfg.window_s < 1) throw Error("window must be positive in '" + label + "'");
  return cfg;
}

std::vector<ShiftConfig> ShiftConfig::full_grid() {
  std::vector<ShiftConfig> out;
  for (auto strategy : {ShiftStrategy::Hamiltonian, ShiftStrategy::Projection})
    for (auto mode : {ShiftMode::Cached, ShiftMode::PerIteration})
      for (int s : {1, 2, 5}) {
        ShiftConfig c;
        c.strategy = strategy;
        c.mode = mode;
        c.window_s = s;
        out.push_back(c);
      }
  return out;
}

Matrix build_basis(const std::vector<Matrix>& history, int s, const Matrix& fallback) {
  if (s < 1) throw Error("build_basis: window must be positive");
  std::vector<const Matrix*> parts;
  const auto count = std::min<size_t>(history.size(), static_cast<size_t>(s));
  for (size_t i = 0; i < count; ++i) parts.push_back(&history[history.size() - 1 - i]);
  if (parts.empty()) parts.push_back(&fallback);

  Index n = parts.front()->cols();
  Index width = 0;
  for (const auto* p : parts) width += p->rows();
  Matrix stacked(n, width);
  Index col = 0;
  for (const auto* p : parts) {
    stacked.middleCols(col, p->rows()) = p->transpose();
    col += p->rows();
  }
  if (width == 0 || stacked.squaredNorm() == 0.0) {
    throw ShiftFailure("shift basis: all residual factors are zero");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  qr.setThreshold(1e-10);
  const Index d = qr.rank();
  if (d == 0) throw ShiftFailure("shift basis: rank zero");
  return qr.householderQ() * Matrix::Identity(n, d);
}

ProjectedBlocks project(const Matrix& u, const ShiftInputs& in) {
  const StandardProblem& p = *in.problem;
  // W = E^{-1} U, so every block below is a projection of the primed problem.
  const Matrix w = in.mass ? Matrix(in.mass->solve_rows(u.transpose()).transpose()) : u;
  const Matrix ub = u.transpose() * p.B;
  ProjectedBlocks out;
  out.A = u.transpose() * (p.A * w) + ub * ((*in.F) * w);
  const Matrix ubk = right_solve_upper(ub, *in.Kpi);
  out.G = ubk * ubk.transpose();
  const Matrix cw = (*in.C) * w;
  out.Q = cw.transpose() * cw;
  return out;
}

namespace {

struct Candidate {
  std::complex<double> lambda;
  double weight;  // |q| for the Hamiltonian rule
};

bool same_real(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

ShiftCache to_cache(const std::vector<Candidate>& sorted, double floor) {
  ShiftCache out;
  std::vector<double> seen;
  for (const auto& c : sorted) {
    const double re = c.lambda.real();
    if (std::any_of(seen.begin(), seen.end(), [&](double s) { return same_real(s, re); }))
      continue;
    seen.push_back(re);
    out.pending.push_back(std::max(-re, floor));
  }
  return out;
}

}  // namespace

ShiftCache projection_shifts(const Matrix& abar, double gamma_floor) {
  Eigen::EigenSolver<Matrix> es(abar, false);
  if (es.info() != Eigen::Success) throw ShiftFailure("projection shift: eigensolver failed");
  std::vector<Candidate> cands;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lam = es.eigenvalues()(i);
    if (lam.real() < 0.0) cands.push_back({lam, 0.0});
  }
  if (cands.empty()) throw ShiftFailure("projection shift: projected matrix has no stable eigenvalue");
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.lambda.real() < b.lambda.real();
  });
  return to_cache(cands, gamma_floor);
}

ShiftCache projection_shifts(const Matrix& u, const ShiftInputs& in, double gamma_floor) {
  return projection_shifts(project(u, in).A, gamma_floor);
}

ShiftCache hamiltonian_shifts(const ProjectedBlocks& blocks, double gamma_floor) {
  const Index d = blocks.A.rows();
  Matrix h(2 * d, 2 * d);
  h << blocks.A, blocks.G, blocks.Q, -blocks.A.transpose();
  Eigen::EigenSolver<Matrix> es(h, true);
  if (es.info() != Eigen::Success) throw ShiftFailure("Hamiltonian shift: eigensolver failed");
  std::vector<Candidate> cands;
  for (Index i = 0; i < 2 * d; ++i) {
    const auto lam = es.eigenvalues()(i);
    if (!(lam.real() < 0.0)) continue;
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    const double total = v.norm();
    const double q = total > 0.0 ? v.tail(d).norm() / total : 0.0;
    cands.push_back({lam, q});
  }
  if (cands.empty()) return projection_shifts(blocks.A, gamma_floor);
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    const double tol = 1e-12 * std::max(a.weight, b.weight);
    if (std::abs(a.weight - b.weight) > tol) return a.weight > b.weight;
    const double ia = std::abs(a.lambda.imag());
    const double ib = std::abs(b.lambda.imag());
    if (!same_real(ia, ib)) return ia < ib;
    return std::abs(a.lambda.real()) > std::abs(b.lambda.real());
  });
  return to_cache(cands, gamma_floor);
}

ShiftCache hamiltonian_shifts(const Matrix& u, const ShiftInputs& in, double gamma_floor) {
  return hamiltonian_shifts(project(u, in), gamma_floor);
}

double default_gamma_floor(const SparseMatrix& a) {
  double norm1 = 0.0;
  for (Index j = 0; j < a.outerSize(); ++j) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  return 1e-8 * (norm1 > 0.0 ? norm1 : 1.0);
}

ShiftGenerator::ShiftGenerator(ShiftConfig cfg, double gamma_floor)
    : cfg_(cfg), floor_(gamma_floor) {
  if (cfg_.window_s < 1) throw Error("shift window must be positive");
  if (!(floor_ > 0.0)) throw Error("gamma floor must be positive");
}

ShiftCache ShiftGenerator::compute(long k, const std::vector<Matrix>& history,
                                   const ShiftInputs& in) const {
  const Matrix u = build_basis(history, cfg_.window_s, *in.C);
  const ProjectedBlocks blocks = project(u, in);
  ShiftCache out;
  try {
    out = cfg_.strategy == ShiftStrategy::Hamiltonian ? hamiltonian_shifts(blocks, floor_)
                                                      : projection_shifts(blocks.A, floor_);
  } catch (const ShiftFailure&) {
    // Mirror the spectrum of the projected matrix as a last resort.
    Eigen::EigenSolver<Matrix> es(blocks.A, false);
    double g = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      g = std::max(g, std::abs(es.eigenvalues()(i).real()));
    out.pending.assign(1, std::max(g, floor_));
  }
  if (cfg_.mode == ShiftMode::PerIteration) out.pending.resize(1);
  out.source_iteration = k;
  return out;
}

double ShiftGenerator::next(long k, const std::vector<Matrix>& history, const ShiftInputs& in) {
  if (cfg_.mode == ShiftMode::PerIteration || cache_.pending.empty()) {
    cache_ = compute(k, history, in);
  }
  const double g = cache_.pending.front();
  cache_.pending.pop_front();
  return g;
}

std::optional<double> ShiftGenerator::pop_pending() {
  if (cache_.pending.empty()) return std::nullopt;
  const double g = cache_.pending.front();
  cache_.pending.pop_front();
  return g;
}

}  // namespace scare
