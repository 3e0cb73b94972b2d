#pragma once

#include <vector>

#include "scare/problem.hpp"

namespace scare {

/// Dense state of the prototypical iteration, which rewrites A, B, Ahat,
/// Bhat and C explicitly every step.  Only meant as a reference at small n.
struct Alg1State {
  Matrix A, B, C;
  std::vector<Matrix> Ahat, Bhat;
  BlockLayout layout = BlockLayout::Interleaved;
  Matrix Xi;
  long k = 0;

  Matrix x_dense() const { return Xi * Xi.transpose(); }
};

/// Dense copy of the effective coefficients.  A mass matrix is folded in
/// (A E^{-1}, Ahat_i E^{-1}, C E^{-1}), which leaves the solution unchanged.
Alg1State alg1_init(const StandardProblem& p);

/// One step with shift gamma.  C is kept at most n rows by an exact QR
/// compression, so its Gram matrix (all the iteration depends on) is kept.
void alg1_step(Alg1State& s, double gamma);

}  // namespace scare
