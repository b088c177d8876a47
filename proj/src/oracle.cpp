#include "bdwalk/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bdwalk/errors.hpp"
#include "bdwalk/numeric.hpp"

namespace bdwalk {

double hit_probability(const ChainSpec& chain, const HittingProblem& p) {
  if (p.lower < 0 || p.lower >= p.upper || p.start < p.lower || p.start > p.upper) {
    std::ostringstream msg;
    msg << "hit_probability: need 0 <= lower <= start <= upper and lower < upper (got lower="
        << p.lower << ", start=" << p.start << ", upper=" << p.upper << ")";
    throw std::invalid_argument(msg.str());
  }
  if (p.start == p.lower) return 0.0;
  if (p.start == p.upper) return 1.0;

  double log_pi = 0.0;  // pi_lower = 1
  double log_num = -std::numeric_limits<double>::infinity();
  double log_den = log_num;
  for (std::int64_t n = p.lower; n < p.upper; ++n) {
    if (n > p.lower) log_pi += chain.log_ratio(n);
    log_den = log_add(log_den, log_pi);
    if (n < p.start) log_num = log_den;
  }
  return std::exp(log_num - log_den);
}

StationaryDistribution stationary(const ChainSpec& chain, std::int64_t n_trunc) {
  if (n_trunc < 2) throw std::invalid_argument("stationary: truncation must be >= 2");

  std::vector<double> log_w(static_cast<std::size_t>(n_trunc) + 1, 0.0);
  for (std::int64_t n = 1; n <= n_trunc; ++n) {
    const double up = chain.birth(n - 1);
    const double down = chain.death(n);
    if (!(up > 0) || !(down > 0)) {
      throw InvalidChain(chain.description() + ": non-positive rate near n=" + std::to_string(n));
    }
    const auto i = static_cast<std::size_t>(n);
    log_w[i] = log_w[i - 1] + std::log(up) - std::log(down);
  }

  const auto last = static_cast<std::size_t>(n_trunc);
  if (!(log_w[last] < log_w[last / 2])) {
    std::ostringstream msg;
    msg << chain.description() << ": unnormalized stationary mass does not decay over ["
        << last / 2 << ", " << last << "]";
    throw NotNormalizable(msg.str());
  }

  double log_total = -std::numeric_limits<double>::infinity();
  for (double lw : log_w) log_total = log_add(log_total, lw);

  StationaryDistribution d;
  d.truncation = n_trunc;
  d.p.resize(log_w.size());
  for (std::size_t i = 0; i < log_w.size(); ++i) d.p[i] = std::exp(log_w[i] - log_total);

  const double r = std::exp(log_w[last] - log_w[last - 1]);
  d.tail_bound = r < 1.0 ? d.p[last] * r / (1.0 - r) : 1.0;
  return d;
}

BalanceResidual balance_residuals(const StationaryDistribution& dist, const ChainSpec& chain) {
  const auto& P = dist.p;
  if (P.size() < 2) throw std::invalid_argument("balance_residual: need at least P_0 and P_1");
  BalanceResidual res;
  res.boundary = std::abs(P[1] * chain.death(1) - P[0] * chain.birth(0));
  for (std::size_t n = 1; n + 1 < P.size(); ++n) {
    const auto k = static_cast<std::int64_t>(n);
    const double r = P[n + 1] * chain.death(k + 1) + P[n - 1] * chain.birth(k - 1) -
                     P[n] * (chain.birth(k) + chain.death(k));
    res.interior = std::max(res.interior, std::abs(r));
  }
  return res;
}

ReturnEstimate expected_returns(const ChainSpec& chain, std::int64_t horizon_states) {
  if (horizon_states < 2) throw std::invalid_argument("expected_returns: horizon must be >= 2");
  ReturnEstimate est;
  est.level = horizon_states;
  est.escape = hit_probability(chain, {1, 0, horizon_states});
  est.escape_at_double = hit_probability(chain, {1, 0, 2 * horizon_states});
  est.return_probability = 1.0 - est.escape;
  est.infinite_returns = est.escape < 1e-6 && est.escape_at_double / est.escape < 0.9;
  return est;
}

}  // namespace bdwalk
