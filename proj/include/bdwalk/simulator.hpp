#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "bdwalk/drift.hpp"
#include "bdwalk/rng.hpp"

namespace bdwalk {

enum class Mode { Discrete, ContinuousEmbedding };

/// When the continuous embedding reads its rates. Frozen uses the values at
/// the last jump time, so rates stay constant between jumps. AtEvent reads
/// them at the event time, the exact answer for rates that vary between
/// jumps (the total rate is identically 1, so no candidate is ever thinned).
enum class RateTiming { Frozen, AtEvent };

enum class PathCapture { None, Geometric, Full };

struct WalkConfig {
  DriftFunction drift = DriftFunction::constant(0.0);
  std::int64_t start_state = 0;
  std::int64_t start_time = 1;
  /// Discrete: the last time index. Continuous: the end of the time window.
  std::int64_t horizon = 1000;
  std::uint64_t seed = 0;
  Mode mode = Mode::Discrete;
  RateTiming timing = RateTiming::Frozen;

  /// 0 disables the upper level.
  std::int64_t escape_level = 0;
  bool stop_at_escape = false;
  bool stop_at_return = false;

  /// Require start_state <= start_time, the wedge n <= t on which the step
  /// kernel is defined. Unit steps keep the walk inside it.
  bool enforce_wedge = true;

  /// States are recorded at these times (sorted ascending).
  std::vector<double> sample_times;
  PathCapture path = PathCapture::None;

  bool operator==(const WalkConfig&) const = default;
};

/// Throws std::invalid_argument naming the offending field.
void validate_config(const WalkConfig& cfg);

struct UpperHit {
  std::int64_t level;
  double time;

  bool operator==(const UpperHit&) const = default;
};

struct PathPoint {
  double time;
  std::int64_t state;

  bool operator==(const PathPoint&) const = default;
};

struct TrajectoryStats {
  /// Visits to 0 after leaving it.
  std::int64_t returns_to_zero = 0;
  std::optional<double> first_return_time;
  std::int64_t max_state = 0;
  std::int64_t final_state = 0;
  /// Largest state reached up to the first return (the whole path if none).
  std::int64_t pre_return_max = 0;
  std::optional<UpperHit> hit_upper;
  /// Discrete: number of time indices at 0. Continuous: time spent at 0.
  double time_at_zero = 0.0;
  double end_time = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t uniforms = 0;
  std::vector<std::int64_t> sampled_states;
  std::vector<PathPoint> path;

  bool escaped_before_return() const noexcept {
    return hit_upper && (!first_return_time || hit_upper->time < *first_return_time);
  }

  bool operator==(const TrajectoryStats&) const = default;
};

/// Per-(state, time bucket) tallies of jump directions against the
/// up-probabilities used, plus holding times. Buckets are
/// floor(log2(time)); states above `max_state` are not tallied.
class EmbeddingAudit {
 public:
  struct Cell {
    std::int64_t visits = 0;
    std::int64_t ups = 0;
    double expected_ups = 0.0;  // sum of p
    double variance = 0.0;      // sum of p (1 - p)
  };

  explicit EmbeddingAudit(std::int64_t max_state = 64) : max_state_(max_state) {}

  void record(std::int64_t state, double time, double p_up, bool up, double holding);

  std::uint64_t jumps() const noexcept { return jumps_; }
  double total_holding() const noexcept { return total_holding_; }
  double mean_holding() const noexcept { return jumps_ ? total_holding_ / jumps_ : 0.0; }
  const std::map<std::pair<std::int64_t, int>, Cell>& cells() const noexcept { return cells_; }

 private:
  std::int64_t max_state_;
  std::uint64_t jumps_ = 0;
  double total_holding_ = 0.0;
  std::map<std::pair<std::int64_t, int>, Cell> cells_;
};

/// One step of the discrete walk from state n at time t. Draws exactly one
/// uniform; at n = 0 the draw is discarded and the walk moves to 1.
std::int64_t step_discrete(std::int64_t n, std::int64_t t, const DriftFunction& drift, Rng& rng);

TrajectoryStats run_discrete(const WalkConfig& cfg, EmbeddingAudit* audit = nullptr);

/// Jump chain of the embedded birth-and-death process: unit-mean exponential
/// holding times (birth + death = 1), up with probability 1/2 + phi(n, tau).
/// State 0 jumps up at rate 1.
TrajectoryStats run_continuous(const WalkConfig& cfg, EmbeddingAudit* audit = nullptr);

/// Dispatches on cfg.mode.
TrajectoryStats run_walk(const WalkConfig& cfg);

struct Estimate {
  double value = 0.0;
  double se = 0.0;

  bool operator==(const Estimate&) const = default;
};

struct TimePoint {
  double time;
  double mean;
  double se;

  bool operator==(const TimePoint&) const = default;
};

struct EnsembleStats {
  std::int64_t replicas = 0;
  std::uint64_t master_seed = 0;
  std::int64_t escape_level = 0;
  /// Fraction of replicas with at least one return.
  Estimate return_frequency;
  Estimate mean_returns;
  /// Fraction reaching escape_level before returning to 0.
  Estimate escape_frequency;
  std::vector<TimePoint> mean_state_by_time;
  std::vector<std::uint64_t> seeds;
  std::vector<TrajectoryStats> runs;

  /// Fraction with a first return at or before `time`.
  Estimate return_frequency_by(double time) const;
  /// Fraction reaching `level` before returning; valid for levels up to the
  /// escape level when runs stop at it.
  Estimate escape_frequency_at(std::int64_t level) const;

  bool operator==(const EnsembleStats&) const = default;
};

/// sqrt(p (1 - p) / n).
double binomial_se(double p, std::int64_t n);

/// Runs `replicas` walks with seeds split_seed(cfg.seed, i). Results do not
/// depend on `threads` (0 = hardware concurrency).
EnsembleStats run_ensemble(const WalkConfig& cfg, std::int64_t replicas,
                           std::int64_t escape_level, unsigned threads = 0);

struct VanishingReport {
  std::vector<TimePoint> mean_phi;  // E phi(X_t, t)
  /// Least-squares slope of log E phi against log t; NaN when fewer than two
  /// positive estimates.
  double trend_slope = 0.0;
  double threshold = 0.0;
  /// Last estimate below the first and below the threshold.
  bool vanishing_at_horizon = false;
};

VanishingReport drift_vanishing_check(const WalkConfig& cfg, std::int64_t replicas,
                                      const std::vector<double>& t_grid,
                                      double threshold = 1e-2, unsigned threads = 0);

/// Least-squares slope of log(mean) on log(time) over points with
/// time in [t_min, t_max] and mean > 0.
double log_log_slope(const std::vector<TimePoint>& points, double t_min, double t_max);

}  // namespace bdwalk
