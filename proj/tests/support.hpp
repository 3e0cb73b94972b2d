#pragma once

#include <cmath>

#include "scare/generators.hpp"
#include "scare/types.hpp"

namespace scare::testing {

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double d = (a - b).norm();
  if (d == 0.0) return 0.0;
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? d / s : d;
}

inline Matrix random_spd(Index k, Rng& rng) {
  const Matrix g = rng.matrix(k, k);
  return g * g.transpose() + 0.1 * Matrix::Identity(k, k);
}

inline Matrix random_symmetric(Index k, Rng& rng) {
  const Matrix g = rng.matrix(k, k);
  return 0.5 * (g + g.transpose());
}

}  // namespace scare::testing
