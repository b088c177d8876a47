#pragma once

#include <cstdint>
#include <vector>

#include "bdwalk/chain.hpp"

namespace bdwalk {

/// Start at `start` with absorbing barriers at `lower` < `upper`.
struct HittingProblem {
  std::int64_t start;
  std::int64_t lower;
  std::int64_t upper;
};

/// P(hit upper before lower | start), from the ladder products
/// pi_n = prod_{j=lower+1}^{n} mu_j / lambda_j:
///   sum_{n=lower}^{start-1} pi_n / sum_{n=lower}^{upper-1} pi_n.
/// Exactly 0 at start == lower and exactly 1 at start == upper.
double hit_probability(const ChainSpec& chain, const HittingProblem& p);

struct StationaryDistribution {
  std::vector<double> p;  // P_0 .. P_N, normalized over the truncation range
  std::int64_t truncation = 0;
  /// Geometric-tail estimate of the mass beyond the truncation, relative to
  /// the mass kept.
  double tail_bound = 0.0;
};

/// Solves the balance equations on 0..n_trunc via P_n ∝ prod_{k=1}^{n} lambda_{k-1} / mu_k.
/// Throws NotNormalizable when the unnormalized mass does not decrease over
/// the final octave [n_trunc / 2, n_trunc].
StationaryDistribution stationary(const ChainSpec& chain, std::int64_t n_trunc);

struct BalanceResidual {
  double interior = 0.0;  // max_n |P_{n+1} mu_{n+1} + P_{n-1} lambda_{n-1} - P_n (lambda_n + mu_n)|
  double boundary = 0.0;  // |P_1 mu_1 - P_0 lambda_0|

  double max() const noexcept { return interior > boundary ? interior : boundary; }
};

BalanceResidual balance_residuals(const StationaryDistribution& dist, const ChainSpec& chain);

/// Largest absolute balance residual over the boundary and interior equations.
inline double balance_residual(const StationaryDistribution& dist, const ChainSpec& chain) {
  return balance_residuals(dist, chain).max();
}

struct ReturnEstimate {
  std::int64_t level = 0;
  /// P(hit level before 0 | start 1); equals 1 / (1 + S_{level-1}).
  double escape = 0.0;
  /// Same at twice the level, for the convergence diagnostic.
  double escape_at_double = 0.0;
  double return_probability = 0.0;
  /// escape < 1e-6 and still shrinking geometrically (escape(2b)/escape(b) < 0.9).
  /// A diagnostic, not a proof of recurrence.
  bool infinite_returns = false;
};

ReturnEstimate expected_returns(const ChainSpec& chain, std::int64_t horizon_states);

}  // namespace bdwalk
