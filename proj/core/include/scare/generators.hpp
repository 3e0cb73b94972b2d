#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "scare/problem.hpp"

namespace scare {

/// mt19937_64 with a portable double conversion, so generated problems are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  double symmetric() { return 2.0 * uniform() - 1.0; }
  /// Standard normal by Box-Muller (uses two draws).
  double normal();
  Matrix matrix(Index rows, Index cols);  // entries uniform on [-1, 1)

 private:
  std::mt19937_64 eng_;
};

/// ns * (M .* mask): same pattern as A and B, multipliers in (0, 1], each
/// entry kept with probability `density`.
std::pair<SparseMatrix, Matrix> gen_noise_blocks(const SparseMatrix& a, const Matrix& b,
                                                 double ns, double density, std::uint64_t seed);

/// Chosen so that multiplicative noise at ns = 1e-2 stays a perturbation, as
/// it is for the Rail data; at 100 the noise dominates the dynamics.
inline constexpr double kDefaultHeatStiffness = 5.0;

struct HeatOptions {
  double stiffness = kDefaultHeatStiffness;  // spectrum of -A lies in (1, 1 + stiffness)
  bool mass = false;         // E = tridiag(1, 4, 1) / 6
};

/// Stable 1D diffusion stand-in for the Rail data:
/// A = -(I + stiffness/4 * tridiag(-1, 2, -1)), B with unit-norm columns,
/// C with unit-norm rows.  r = 1.
StandardProblem gen_heat_problem(Index n, Index m, Index l, std::uint64_t seed,
                                 const HeatOptions& opts = {});

/// Adds r - 1 noise blocks.  ns_list[i] scales block i (r = 1 + size).
/// Block i draws from stream first_stream + i, so a single-scale run
/// started at stream j reproduces block j of the combined run.
StandardProblem with_noise(const StandardProblem& base, const std::vector<double>& ns_list,
                           std::uint64_t seed, double density = 1.0,
                           std::size_t first_stream = 0);

struct RandomOptions {
  double margin = 1.0;       // beta: A + A' <= -2 beta I
  double noise_share = 0.5;  // sum ||Ahat_i||_2^2 = noise_share * beta
  double density = 0.3;      // off-diagonal density of the random part
  bool mass = false;         // SPD E close to I
};

/// Small random standard problem whose A is certified mean-square stable by
/// the Lyapunov matrix X = I (A + A' + sum Ahat_i'Ahat_i < 0).
StandardProblem gen_random_problem(Index n, Index m, Index l, Index r, std::uint64_t seed,
                                   const RandomOptions& opts = {});

/// Random original-form problem with nonzero L and a non-identity SPD R.
OriginalProblem gen_random_original(Index n, Index m, Index l, Index r, std::uint64_t seed,
                                    const RandomOptions& opts = {});

}  // namespace scare
