#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdwalk {

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
inline double log_add(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace bdwalk
