#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bdwalk/drift.hpp"

namespace bdwalk {

/// A time-homogeneous birth-and-death chain on {0, 1, 2, ...} with birth
/// rates lambda_n (n >= 0) and death rates mu_n (n >= 1).
///
/// Rates are produced on demand, so closed-form chains cost nothing to build
/// and tabulated chains carry a finite prefix that repeats its last entry.
/// Positivity is checked by the algorithms that consume the rates, which
/// throw InvalidChain on the first bad index they touch.
class ChainSpec {
 public:
  using RateFn = std::function<double(std::int64_t)>;

  ChainSpec(RateFn birth, RateFn death, std::string description);

  /// lambda_n = birth, mu_n = death for every n.
  static ChainSpec constant(double birth, double death);

  /// lambda_n / mu_n = ratio(n) for n >= 1 with lambda_n + mu_n = 1;
  /// lambda_0 = birth0.
  static ChainSpec from_ratio(std::function<double(std::int64_t)> ratio, double birth0 = 0.5,
                              std::string description = "ratio");

  /// The homogeneous chain on the diagonal t = n^2 of a drift:
  /// lambda_n = 1/2 + phi(n, n^2), mu_n = 1/2 - phi(n, n^2), lambda_0 = 1.
  /// Below `valid_from` the chain is symmetric.
  static ChainSpec diagonal(const DriftFunction& f, std::int64_t valid_from = 1);

  /// Prefix tables indexed from 0 (death[0] is ignored). Indices past the end
  /// repeat the last entry, which is the declared limit of the rates.
  static ChainSpec tabulated(std::vector<double> birth, std::vector<double> death);

  double birth(std::int64_t n) const { return birth_(n); }
  double death(std::int64_t n) const { return n == 0 ? 0.0 : death_(n); }

  /// log(mu_n / lambda_n); throws InvalidChain if either rate is not positive.
  double log_ratio(std::int64_t n) const;

  /// Same chain with every rate multiplied by k > 0.
  ChainSpec scaled(double k) const;

  const std::string& description() const noexcept { return description_; }

 private:
  RateFn birth_;
  RateFn death_;
  std::string description_;
};

}  // namespace bdwalk
