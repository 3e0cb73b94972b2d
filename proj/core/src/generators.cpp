#include "scare/generators.hpp"

#include <cmath>
#include <vector>

#include "scare/errors.hpp"

namespace scare {

double Rng::normal() {
  const double u1 = uniform_open0();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix Rng::matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = symmetric();
  return m;
}

std::pair<SparseMatrix, Matrix> gen_noise_blocks(const SparseMatrix& a, const Matrix& b,
                                                 double ns, double density, std::uint64_t seed) {
  if (ns < 0.0) throw Error("noise scale must be nonnegative");
  Rng rng(seed);
  std::vector<Eigen::Triplet<double>> trips;
  for (Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      const double keep = rng.uniform();
      const double v = rng.uniform_open0();
      if (keep < density && ns > 0.0) trips.emplace_back(it.row(), it.col(), ns * it.value() * v);
    }
  }
  SparseMatrix a1(a.rows(), a.cols());
  a1.setFromTriplets(trips.begin(), trips.end());
  a1.makeCompressed();
  Matrix b1 = Matrix::Zero(b.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index i = 0; i < b.rows(); ++i) {
      const double keep = rng.uniform();
      const double v = rng.uniform_open0();
      if (b(i, j) != 0.0 && keep < density) b1(i, j) = ns * b(i, j) * v;
    }
  }
  return {std::move(a1), std::move(b1)};
}

namespace {

SparseMatrix tridiag(Index n, double lower, double diag, double upper) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag);
    if (i > 0) t.emplace_back(i, i - 1, lower);
    if (i + 1 < n) t.emplace_back(i, i + 1, upper);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

Matrix unit_columns(Matrix m) {
  for (Index j = 0; j < m.cols(); ++j) m.col(j).normalize();
  return m;
}

}  // namespace

StandardProblem gen_heat_problem(Index n, Index m, Index l, std::uint64_t seed,
                                 const HeatOptions& opts) {
  if (n < 3) throw DimensionError("gen_heat_problem: n must be at least 3");
  if (m < 1 || l < 1) throw DimensionError("gen_heat_problem: m and l must be positive");
  const double k = opts.stiffness / 4.0;
  SparseMatrix a = tridiag(n, k, -1.0 - 2.0 * k, k);
  Rng rng(seed);
  Matrix b = unit_columns(rng.matrix(n, m));
  Matrix c = unit_columns(rng.matrix(n, l)).transpose();
  std::optional<SparseMatrix> e;
  if (opts.mass) e = tridiag(n, 1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0);
  return StandardProblem::make(std::move(a), std::move(b), std::move(c), {}, {}, std::move(e));
}

StandardProblem with_noise(const StandardProblem& base, const std::vector<double>& ns_list,
                           std::uint64_t seed, double density, std::size_t first_stream) {
  StandardProblem p = base;
  p.Ahat = SparseStack(p.n(), p.n());
  p.Bhat = DenseStack(p.n(), p.m());
  for (size_t i = 0; i < ns_list.size(); ++i) {
    const std::uint64_t stream = seed + 7919 * (first_stream + i + 1);
    auto [a1, b1] = gen_noise_blocks(base.A, base.B, ns_list[i], density, stream);
    p.Ahat.push_back(std::move(a1));
    p.Bhat.push_back(std::move(b1));
  }
  p.validate();
  return p;
}

namespace {

struct RandomParts {
  SparseMatrix a;
  std::vector<SparseMatrix> noise;
  std::optional<SparseMatrix> e;
};

RandomParts random_parts(Index n, Index r, Rng& rng, const RandomOptions& opts) {
  Matrix rnd = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i == j || rng.uniform() < opts.density) rnd(i, j) = rng.symmetric();
  // Gershgorin bound on the largest eigenvalue of sym(rnd).
  const Matrix sym = 0.5 * (rnd + rnd.transpose());
  double bound = -1e300;
  for (Index i = 0; i < n; ++i)
    bound = std::max(bound, sym(i, i) + sym.row(i).cwiseAbs().sum() - std::abs(sym(i, i)));
  RandomParts out;
  const Matrix a = rnd - (bound + opts.margin) * Matrix::Identity(n, n);
  out.a = a.sparseView();

  const double budget = opts.noise_share * opts.margin;
  for (Index i = 1; i < r; ++i) {
    Matrix blk = Matrix::Zero(n, n);
    for (Index jj = 0; jj < n; ++jj)
      for (Index ii = 0; ii < n; ++ii)
        if (rng.uniform() < opts.density) blk(ii, jj) = rng.symmetric();
    const double fro = blk.norm();  // >= spectral norm
    if (fro > 0.0) blk *= std::sqrt(budget / static_cast<double>(r - 1)) / fro;
    out.noise.push_back(blk.sparseView());
  }
  if (opts.mass) {
    Matrix e = Matrix::Identity(n, n);
    for (Index i = 0; i + 1 < n; ++i) e(i, i + 1) = e(i + 1, i) = 0.1 * rng.symmetric();
    out.e = e.sparseView();
  }
  return out;
}

}  // namespace

StandardProblem gen_random_problem(Index n, Index m, Index l, Index r, std::uint64_t seed,
                                   const RandomOptions& opts) {
  if (n < 1 || m < 1 || l < 1 || r < 1) throw DimensionError("gen_random_problem: bad sizes");
  Rng rng(seed);
  RandomParts parts = random_parts(n, r, rng, opts);
  Matrix b = rng.matrix(n, m);
  Matrix c = rng.matrix(l, n);
  SparseStack ahat(n, n);
  DenseStack bhat(n, m);
  for (Index i = 1; i < r; ++i) {
    ahat.push_back(parts.noise[static_cast<size_t>(i - 1)]);
    bhat.push_back(0.5 * rng.matrix(n, m));
  }
  return StandardProblem::make(std::move(parts.a), std::move(b), std::move(c), std::move(ahat),
                               std::move(bhat), std::move(parts.e));
}

OriginalProblem gen_random_original(Index n, Index m, Index l, Index r, std::uint64_t seed,
                                    const RandomOptions& opts) {
  if (n < 1 || m < 1 || l < 1 || r < 1) throw DimensionError("gen_random_original: bad sizes");
  Rng rng(seed);
  RandomParts parts = random_parts(n, r, rng, opts);
  OriginalProblem o;
  // A0 is stable after the L-shift as well when L is small relative to the margin.
  o.A_list.push_back(parts.a);
  o.B_list.push_back(rng.matrix(n, m));
  for (Index i = 1; i < r; ++i) {
    o.A_list.push_back(parts.noise[static_cast<size_t>(i - 1)]);
    o.B_list.push_back(0.5 * rng.matrix(n, m));
  }
  o.C0 = rng.matrix(l, n);
  const Matrix g = rng.matrix(m, m);
  o.R = g * g.transpose() + static_cast<double>(m) * Matrix::Identity(m, m);
  o.L = 0.05 * rng.matrix(n, m);
  o.E = parts.e;
  return o;
}

}  // namespace scare
