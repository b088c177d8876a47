#include "bdwalk/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace bdwalk {
namespace {

void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument(field + ": " + what);
}

// Shared bookkeeping for both modes. `time` is the time at which the walk
// has just entered `state`.
class Tracker {
 public:
  Tracker(const WalkConfig& cfg, TrajectoryStats& stats)
      : cfg_(cfg), s_(stats), next_path_step_(1) {
    s_.max_state = s_.pre_return_max = s_.final_state = cfg.start_state;
    s_.sampled_states.reserve(cfg.sample_times.size());
    if (cfg.path != PathCapture::None) {
      s_.path.push_back({static_cast<double>(cfg.start_time), cfg.start_state});
    }
    check_upper(cfg.start_state, static_cast<double>(cfg.start_time));
  }

  // Records the state held on [from, to) for every sample time in that window.
  void hold(std::int64_t state, double from, double to) {
    // sample times before the start see the start state
    while (sample_ < cfg_.sample_times.size() && cfg_.sample_times[sample_] < to) {
      s_.sampled_states.push_back(state);
      ++sample_;
    }
    if (state == 0) {
      s_.time_at_zero += cfg_.mode == Mode::Discrete ? 1.0 : (to - from);
    }
  }

  // Returns true when an early-stop condition fired.
  bool enter(std::int64_t state, double time) {
    ++s_.steps;
    s_.final_state = state;
    s_.max_state = std::max(s_.max_state, state);
    if (!s_.first_return_time) s_.pre_return_max = std::max(s_.pre_return_max, state);
    if (cfg_.path == PathCapture::Full ||
        (cfg_.path == PathCapture::Geometric && s_.steps == next_path_step_)) {
      s_.path.push_back({time, state});
      if (s_.steps == next_path_step_) next_path_step_ *= 2;
    }
    bool stop = check_upper(state, time) && cfg_.stop_at_escape;
    if (state == 0) {
      ++s_.returns_to_zero;
      if (!s_.first_return_time) s_.first_return_time = time;
      stop = stop || cfg_.stop_at_return;
    }
    return stop;
  }

  void finish(std::int64_t state, double time) {
    s_.end_time = time;
    while (sample_ < cfg_.sample_times.size()) {
      s_.sampled_states.push_back(state);
      ++sample_;
    }
    if (cfg_.path == PathCapture::Geometric &&
        (s_.path.empty() || s_.path.back().time != time)) {
      s_.path.push_back({time, state});
    }
  }

 private:
  bool check_upper(std::int64_t state, double time) {
    if (cfg_.escape_level > 0 && !s_.hit_upper && state >= cfg_.escape_level) {
      s_.hit_upper = UpperHit{cfg_.escape_level, time};
      return true;
    }
    return false;
  }

  const WalkConfig& cfg_;
  TrajectoryStats& s_;
  std::size_t sample_ = 0;
  std::uint64_t next_path_step_;
};

}  // namespace

void validate_config(const WalkConfig& cfg) {
  if (cfg.start_state < 0) fail("start_state", "must be >= 0");
  if (cfg.start_time < 1) fail("start_time", "must be >= 1");
  if (cfg.horizon <= cfg.start_time) fail("horizon", "must exceed start_time");
  if (cfg.enforce_wedge && cfg.start_state > cfg.start_time) {
    fail("start_state", "must not exceed start_time (walk is defined on n <= t)");
  }
  if (cfg.escape_level < 0) fail("escape_level", "must be >= 0");
  if (!std::is_sorted(cfg.sample_times.begin(), cfg.sample_times.end())) {
    fail("sample_times", "must be sorted ascending");
  }
}

void EmbeddingAudit::record(std::int64_t state, double time, double p_up, bool up,
                            double holding) {
  ++jumps_;
  total_holding_ += holding;
  if (state > max_state_ || !(time > 0)) return;
  auto& c = cells_[{state, static_cast<int>(std::floor(std::log2(time)))}];
  ++c.visits;
  c.ups += up ? 1 : 0;
  c.expected_ups += p_up;
  c.variance += p_up * (1.0 - p_up);
}

std::int64_t step_discrete(std::int64_t n, std::int64_t t, const DriftFunction& drift, Rng& rng) {
  const double u = rng.uniform();
  if (n == 0) return 1;
  const double p = 0.5 + drift.evaluate(n, static_cast<double>(t));
  return u < p ? n + 1 : n - 1;
}

TrajectoryStats run_discrete(const WalkConfig& cfg, EmbeddingAudit* audit) {
  validate_config(cfg);
  TrajectoryStats stats;
  Rng rng(cfg.seed);
  Tracker track(cfg, stats);

  std::int64_t n = cfg.start_state;
  std::int64_t t = cfg.start_time;
  while (t < cfg.horizon) {
    track.hold(n, static_cast<double>(t), static_cast<double>(t + 1));
    const double u = rng.uniform();
    std::int64_t next;
    if (n == 0) {
      next = 1;
    } else {
      const double p = 0.5 + cfg.drift.evaluate(n, static_cast<double>(t));
      next = u < p ? n + 1 : n - 1;
      if (audit) audit->record(n, static_cast<double>(t), p, next > n, 1.0);
    }
    n = next;
    ++t;
    assert(!cfg.enforce_wedge || n <= t);
    if (track.enter(n, static_cast<double>(t))) break;
  }
  if (t == cfg.horizon) track.hold(n, static_cast<double>(t), static_cast<double>(t + 1));
  track.finish(n, static_cast<double>(t));
  stats.uniforms = rng.draws();
  return stats;
}

TrajectoryStats run_continuous(const WalkConfig& cfg, EmbeddingAudit* audit) {
  validate_config(cfg);
  TrajectoryStats stats;
  Rng rng(cfg.seed);
  Tracker track(cfg, stats);

  const double end = static_cast<double>(cfg.horizon);
  std::int64_t n = cfg.start_state;
  double tau = static_cast<double>(cfg.start_time);
  while (true) {
    const double holding = rng.exponential();
    const double next = tau + holding;
    if (next > end) {
      track.hold(n, tau, end);
      tau = end;
      break;
    }
    track.hold(n, tau, next);
    const double u = rng.uniform();
    bool up = true;
    if (n > 0) {
      const double rate_time = cfg.timing == RateTiming::Frozen ? tau : next;
      const double p = 0.5 + cfg.drift.evaluate(n, rate_time);
      up = u < p;
      if (audit) audit->record(n, rate_time, p, up, holding);
    } else if (audit) {
      audit->record(n, tau, 1.0, true, holding);
    }
    n += up ? 1 : -1;
    tau = next;
    if (track.enter(n, tau)) break;
  }
  track.finish(n, tau);
  stats.uniforms = rng.draws();
  return stats;
}

TrajectoryStats run_walk(const WalkConfig& cfg) {
  return cfg.mode == Mode::Discrete ? run_discrete(cfg) : run_continuous(cfg);
}

double binomial_se(double p, std::int64_t n) {
  if (n <= 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

namespace {

Estimate mean_and_se(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

Estimate fraction(std::int64_t hits, std::int64_t n) {
  const double p = n > 0 ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  return {p, binomial_se(p, n)};
}

}  // namespace

Estimate EnsembleStats::return_frequency_by(double time) const {
  std::int64_t hits = 0;
  for (const auto& r : runs) hits += (r.first_return_time && *r.first_return_time <= time) ? 1 : 0;
  return fraction(hits, replicas);
}

Estimate EnsembleStats::escape_frequency_at(std::int64_t level) const {
  std::int64_t hits = 0;
  for (const auto& r : runs) {
    if (level == escape_level) {
      hits += r.escaped_before_return() ? 1 : 0;
    } else {
      hits += r.pre_return_max >= level ? 1 : 0;
    }
  }
  return fraction(hits, replicas);
}

EnsembleStats run_ensemble(const WalkConfig& cfg, std::int64_t replicas,
                           std::int64_t escape_level, unsigned threads) {
  if (replicas < 1) throw std::invalid_argument("replicas: must be >= 1");
  if (escape_level < 1) throw std::invalid_argument("escape_level: must be >= 1");
  WalkConfig base = cfg;
  base.escape_level = escape_level;
  validate_config(base);

  EnsembleStats out;
  out.replicas = replicas;
  out.master_seed = cfg.seed;
  out.escape_level = escape_level;
  out.seeds.resize(static_cast<std::size_t>(replicas));
  out.runs.resize(static_cast<std::size_t>(replicas));
  for (std::int64_t i = 0; i < replicas; ++i) {
    out.seeds[static_cast<std::size_t>(i)] = split_seed(cfg.seed, static_cast<std::uint64_t>(i));
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, replicas));

  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned worker) {
    try {
      WalkConfig local = base;
      for (auto i = static_cast<std::size_t>(worker); i < out.runs.size(); i += threads) {
        local.seed = out.seeds[i];
        out.runs[i] = run_walk(local);
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // sequential reduction in replica order
  std::int64_t returned = 0, escaped = 0;
  std::vector<double> returns;
  returns.reserve(out.runs.size());
  for (const auto& r : out.runs) {
    returned += r.returns_to_zero > 0 ? 1 : 0;
    escaped += r.escaped_before_return() ? 1 : 0;
    returns.push_back(static_cast<double>(r.returns_to_zero));
  }
  out.return_frequency = fraction(returned, replicas);
  out.escape_frequency = fraction(escaped, replicas);
  out.mean_returns = mean_and_se(returns);

  std::vector<double> column(out.runs.size());
  for (std::size_t j = 0; j < cfg.sample_times.size(); ++j) {
    for (std::size_t i = 0; i < out.runs.size(); ++i) {
      column[i] = static_cast<double>(out.runs[i].sampled_states[j]);
    }
    const auto e = mean_and_se(column);
    out.mean_state_by_time.push_back({cfg.sample_times[j], e.value, e.se});
  }
  return out;
}

double log_log_slope(const std::vector<TimePoint>& points, double t_min, double t_max) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& p : points) {
    if (p.time < t_min || p.time > t_max || !(p.mean > 0)) continue;
    const double x = std::log(p.time), y = std::log(p.mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = m * sxx - sx * sx;
  if (denom == 0) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / denom;
}

VanishingReport drift_vanishing_check(const WalkConfig& cfg, std::int64_t replicas,
                                      const std::vector<double>& t_grid, double threshold,
                                      unsigned threads) {
  if (t_grid.empty()) throw std::invalid_argument("t_grid: must not be empty");
  if (std::adjacent_find(t_grid.begin(), t_grid.end(), std::greater_equal<>()) != t_grid.end()) {
    throw std::invalid_argument("t_grid: must be strictly increasing");
  }
  if (t_grid.back() > static_cast<double>(cfg.horizon)) {
    throw std::invalid_argument("t_grid: must not exceed the horizon");
  }
  WalkConfig local = cfg;
  local.sample_times = t_grid;
  local.stop_at_escape = false;
  local.stop_at_return = false;
  const auto ens = run_ensemble(local, replicas, std::max<std::int64_t>(1, cfg.escape_level), threads);

  VanishingReport rep;
  rep.threshold = threshold;
  std::vector<double> column(ens.runs.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    for (std::size_t i = 0; i < ens.runs.size(); ++i) {
      column[i] = cfg.drift.evaluate(ens.runs[i].sampled_states[j], t_grid[j]);
    }
    const auto e = mean_and_se(column);
    rep.mean_phi.push_back({t_grid[j], e.value, e.se});
  }
  rep.trend_slope = log_log_slope(rep.mean_phi, t_grid.front(), t_grid.back());
  const double first = rep.mean_phi.front().mean;
  const double last = rep.mean_phi.back().mean;
  rep.vanishing_at_horizon = last < first && last < threshold;
  return rep;
}

}  // namespace bdwalk
