#include "bdwalk/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bdwalk/chain.hpp"
#include "bdwalk/errors.hpp"
#include "bdwalk/oracle.hpp"

namespace bdwalk {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTie = 1e-9;

std::string fmt(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(6);
  s << x;
  return s.str();
}

unsigned worker_count(unsigned requested, std::size_t work) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, work)));
}

}  // namespace

std::int64_t McSettings::resolved_escape_level() const {
  if (escape_level > 0) return escape_level;
  return std::max<std::int64_t>(2, static_cast<std::int64_t>(std::sqrt(static_cast<double>(horizon))));
}

std::string to_string(Family f) {
  switch (f) {
    case Family::PowerLaw:
      return "power_law";
    case Family::Boundary:
      return "boundary";
    case Family::Exponential:
      return "exponential";
    case Family::Constant:
      return "constant";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  for (auto f : {Family::PowerLaw, Family::Boundary, Family::Exponential, Family::Constant}) {
    if (to_string(f) == s) return f;
  }
  throw std::invalid_argument("family: unknown family '" + s +
                              "' (expected power_law, boundary, exponential or constant)");
}

FamilyAxes axes_of(Family f) {
  switch (f) {
    case Family::PowerLaw:
      return {true, true, true};
    case Family::Boundary:
      return {true, true, false};
    case Family::Exponential:
      return {false, true, true};
    case Family::Constant:
      return {true, false, false};
  }
  return {false, false, false};
}

DriftFunction make_drift(Family family, const GridPoint& p) {
  switch (family) {
    case Family::PowerLaw:
      return DriftFunction::power_law(p.rho, p.alpha, p.beta);
    case Family::Boundary:
      return DriftFunction::boundary(p.rho, p.alpha);
    case Family::Exponential:
      return DriftFunction::exponential(p.alpha, p.beta);
    case Family::Constant:
      return DriftFunction::constant(p.rho);
  }
  throw std::invalid_argument("family: unknown");
}

std::vector<std::string> spec_violations(const ExperimentSpec& spec) {
  std::vector<std::string> out;
  auto bad = [&](const std::string& field, const std::string& what) { out.push_back(field + ": " + what); };
  const auto axes = axes_of(spec.family);
  auto check_axis = [&](const char* name, const std::vector<double>& v, bool used, double lo,
                        bool strict) {
    if (!used) return;
    if (v.empty()) bad(name, "grid must not be empty");
    for (double x : v) {
      if (!std::isfinite(x)) {
        bad(name, "values must be finite");
      } else if (strict ? !(x > lo) : !(x >= lo)) {
        bad(name, fmt(x) + (strict ? " must be > " : " must be >= ") + fmt(lo));
      }
    }
  };
  check_axis("rho", spec.rho, axes.rho, 0.0, false);
  check_axis("alpha", spec.alpha, axes.alpha,
             spec.family == Family::Boundary ? -1.0 : -std::numeric_limits<double>::infinity(), false);
  check_axis("beta", spec.beta, axes.beta, 0.0, spec.family == Family::Exponential);
  if (!(spec.band >= 0)) bad("band", "must be >= 0");
  const auto& s = spec.scan;
  if (s.n_lo < 1) bad("classifier.n_lo", "must be >= 1");
  if (s.n_hi < 4 * s.n_lo) bad("classifier.n_hi", "must be at least 4 * n_lo");
  if (!(s.margin > 0 && s.margin < 1)) bad("classifier.margin", "must lie in (0, 1)");
  if (s.samples_per_octave < 1) bad("classifier.samples_per_octave", "must be >= 1");
  if (s.dense_octaves < 1) bad("classifier.dense_octaves", "must be >= 1");
  const auto& m = spec.mc;
  if (m.replicas < 0) bad("simulation.replicas", "must be >= 0");
  if (m.start_time < 1) bad("simulation.start_time", "must be >= 1");
  if (m.start_state < 0) bad("simulation.start_state", "must be >= 0");
  if (m.start_state > m.start_time) bad("simulation.start_state", "must not exceed start_time");
  if (m.horizon <= m.start_time) bad("simulation.horizon", "must exceed start_time");
  if (m.escape_level < 0) bad("simulation.escape_level", "must be >= 0");
  if (!std::is_sorted(m.sample_times.begin(), m.sample_times.end())) {
    bad("simulation.sample_times", "must be sorted ascending");
  }
  if (spec.oracle_level < 2) bad("oracle_level", "must be >= 2");
  for (const auto& o : spec.outputs) {
    if (o != "json" && o != "csv" && o != "phase") bad("outputs", "unknown output '" + o + "'");
  }
  if (spec.example < 0 || spec.example > 4) bad("example", "must be 0 (none) or 1..4");
  return out;
}

void validate_spec(const ExperimentSpec& spec) {
  const auto v = spec_violations(spec);
  if (v.empty()) return;
  std::string msg = v.front();
  for (std::size_t i = 1; i < v.size(); ++i) msg += "; " + v[i];
  throw std::invalid_argument(msg);
}

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  const auto axes = axes_of(spec.family);
  const std::vector<double> none{kNaN};
  const auto& rs = axes.rho ? spec.rho : none;
  const auto& as = axes.alpha ? spec.alpha : none;
  const auto& bs = axes.beta ? spec.beta : none;
  std::vector<GridPoint> out;
  for (double r : rs) {
    for (double a : as) {
      for (double b : bs) {
        GridPoint p{r, a, b};
        if (spec.family == Family::Boundary) p.beta = (1.0 + a) / 2.0;
        if (spec.beta_above_alpha && axes.alpha && axes.beta && !(p.beta > p.alpha + kTie)) continue;
        out.push_back(p);
      }
    }
  }
  return out;
}

std::optional<Label> expected_label(Family family, const GridPoint& p) {
  auto by_limit = [](double s) -> std::optional<Label> {
    if (s < 1.0 - kTie) return Label::Recurrent;
    if (s > 1.0 + kTie) return Label::Transient;
    return std::nullopt;
  };
  switch (family) {
    case Family::PowerLaw: {
      if (p.rho == 0) return Label::Recurrent;
      // diagonal statistic 2 rho n^(1 + alpha - 2 beta)
      const double growth = 1.0 + p.alpha - 2.0 * p.beta;
      if (growth < -kTie) return Label::Recurrent;
      if (growth > kTie) return Label::Transient;
      return by_limit(2.0 * p.rho);
    }
    case Family::Boundary:
      return by_limit(4.0 * p.rho);
    case Family::Exponential:
      return Label::Recurrent;
    case Family::Constant:
      return p.rho == 0 ? Label::Recurrent : Label::Transient;
  }
  return std::nullopt;
}

bool near_boundary(Family family, const GridPoint& p, double band, double margin) {
  switch (family) {
    case Family::PowerLaw: {
      const double growth = 1.0 + p.alpha - 2.0 * p.beta;
      if (std::abs(growth) <= kTie) return std::abs(2.0 * p.rho - 1.0) <= margin + kTie;
      const double to_lower = std::abs(growth) / std::sqrt(5.0);          // alpha = 2 beta - 1
      const double to_upper = std::abs(p.alpha - p.beta) / std::sqrt(2.0);  // alpha = beta
      return std::min(to_lower, to_upper) <= band + kTie;
    }
    case Family::Boundary:
      return std::abs(4.0 * p.rho - 1.0) <= margin + kTie;
    case Family::Exponential:
    case Family::Constant:
      return false;
  }
  return false;
}

WalkConfig walk_config(const DriftFunction& f, const McSettings& mc, std::uint64_t seed) {
  WalkConfig cfg;
  cfg.drift = f;
  cfg.start_state = mc.start_state;
  cfg.start_time = mc.start_time;
  cfg.horizon = mc.horizon;
  cfg.seed = seed;
  cfg.mode = mc.mode;
  cfg.timing = mc.timing;
  cfg.stop_at_escape = mc.stop_at_escape;
  cfg.stop_at_return = mc.stop_at_return;
  cfg.sample_times = mc.sample_times;
  return cfg;
}

McSummary monte_carlo(const DriftFunction& f, const McSettings& mc, std::uint64_t seed,
                      unsigned threads) {
  auto cfg = walk_config(f, mc, seed);
  cfg.sample_times.clear();
  const auto level = mc.resolved_escape_level();
  const auto e = run_ensemble(cfg, mc.replicas, level, threads);

  McSummary s;
  s.replicas = mc.replicas;
  s.horizon = mc.horizon;
  s.escape_level = level;
  s.seed = seed;
  s.return_frequency = e.return_frequency;
  s.early_return_frequency = e.return_frequency_by(
      static_cast<double>(mc.start_time + (mc.horizon - mc.start_time) / 16));
  s.escape_frequency = e.escape_frequency;
  s.quarter_escape_frequency = e.escape_frequency_at(std::max<std::int64_t>(1, level / 4));
  s.mean_returns = e.mean_returns;
  return s;
}

namespace {

SweepRecord evaluate_point(const ExperimentSpec& spec, std::size_t index, const GridPoint& p,
                           unsigned mc_threads) {
  const auto started = std::chrono::steady_clock::now();
  SweepRecord rec;
  rec.index = index;
  rec.point = p;
  rec.seed = split_seed(spec.mc.seed, index);
  rec.expected = expected_label(spec.family, p);
  rec.near_boundary = near_boundary(spec.family, p, spec.band, spec.scan.margin);
  if (rec.near_boundary) rec.annotations.push_back("near a region boundary");
  if (spec.family == Family::PowerLaw && p.beta >= 1.0) {
    rec.annotations.push_back("beta >= 1: outside the stated transience region");
  }

  try {
    const auto f = make_drift(spec.family, p);
    try {
      rec.verdict = classify_diagonal(f, spec.scan);
    } catch (const DomainError& e) {
      rec.invalid_model = true;
      rec.annotations.push_back(std::string("invalid model: ") + e.what());
    }

    if (rec.verdict) {
      const auto chain = ChainSpec::diagonal(f, rec.verdict->valid_from);
      OracleCheck oc;
      oc.ratio_label = classify_ratio(chain, spec.scan).label;
      const auto ret = expected_returns(chain, spec.oracle_level);
      oc.level = ret.level;
      oc.escape = ret.escape;
      oc.infinite_returns = ret.infinite_returns;
      oc.agrees = rec.verdict->label == Label::Inconclusive || oc.ratio_label == Label::Inconclusive ||
                  oc.ratio_label == rec.verdict->label;
      if (!oc.agrees) rec.annotations.push_back("ratio test on the diagonal chain disagrees");
      rec.oracle = oc;
    }

    if (spec.mc.replicas > 0 && !rec.invalid_model) {
      const auto& m = spec.mc;
      ValidateOptions opts;
      opts.wedge_only = true;
      opts.wedge_offset = m.start_time - m.start_state;
      const auto n_max = std::min<std::int64_t>(m.start_state + m.horizon - m.start_time, 4096);
      const auto violations = validate(f, n_max, static_cast<double>(m.horizon), opts);
      const bool leaves_range = std::any_of(violations.begin(), violations.end(),
                                            [](const Violation& v) { return v.which == Invariant::Range; });
      if (leaves_range) {
        rec.annotations.push_back("drift reaches 1/2 on reachable states; Monte Carlo skipped");
      } else {
        rec.mc = monte_carlo(f, m, rec.seed, mc_threads);
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }

  if (rec.verdict && rec.expected) {
    rec.consistent = rec.near_boundary || rec.verdict->label == *rec.expected;
  }
  rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

}  // namespace

bool SweepRecord::same_results(const SweepRecord& o) const {
  auto same_point = [](const GridPoint& a, const GridPoint& b) {
    auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return eq(a.rho, b.rho) && eq(a.alpha, b.alpha) && eq(a.beta, b.beta);
  };
  return index == o.index && same_point(point, o.point) && verdict == o.verdict &&
         expected == o.expected && near_boundary == o.near_boundary && consistent == o.consistent &&
         invalid_model == o.invalid_model && mc == o.mc && oracle == o.oracle &&
         annotations == o.annotations && error == o.error && seed == o.seed;
}

std::size_t SweepResult::inconsistent() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const SweepRecord& r) { return !r.consistent; }));
}

bool SweepResult::same_results(const SweepResult& o) const {
  // thread counts never change results
  auto a = spec, b = o.spec;
  a.mc.threads = b.mc.threads = 0;
  if (!(a == b) || records.size() != o.records.size()) return false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].same_results(o.records[i])) return false;
  }
  return true;
}

SweepResult phase_sweep(const ExperimentSpec& spec) {
  validate_spec(spec);
  const auto started = std::chrono::steady_clock::now();
  const auto points = expand_grid(spec);

  SweepResult out;
  out.spec = spec;
  out.records.resize(points.size());
  const unsigned workers = worker_count(spec.mc.threads, points.size());
  // a single point gets the whole thread budget for its ensemble
  const unsigned mc_threads = points.size() == 1 ? spec.mc.threads : 1;

  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < points.size(); i += workers) {
      out.records[i] = evaluate_point(spec, i, points[i], mc_threads);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  out.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

ExperimentSpec example_spec(int id) {
  ExperimentSpec s;
  s.example = id;
  s.name = "example" + std::to_string(id);
  switch (id) {
    case 1:
      s.family = Family::PowerLaw;
      s.rho.clear();
      for (int k = 1; k <= 19; ++k) {
        if (k != 10) s.rho.push_back(k / 20.0);
      }
      s.alpha = {1.0};
      s.beta = {1.0};
      break;
    case 2:
      s.family = Family::PowerLaw;
      s.rho = {1.0};
      s.alpha.clear();
      s.beta.clear();
      for (int i = -10; i <= 15; ++i) s.alpha.push_back(i / 10.0);
      for (int j = 0; j <= 15; ++j) s.beta.push_back(j / 10.0);
      s.beta_above_alpha = true;
      break;
    case 3:
      s.family = Family::Boundary;
      s.rho = {0.05, 0.1, 0.15, 0.2, 0.3, 0.35, 0.4, 0.45};
      s.alpha = {-1.0, -0.5, 0.0, 0.5, 1.0};
      s.beta.clear();
      break;
    case 4:
      s.family = Family::Exponential;
      s.rho.clear();
      s.alpha = {0.5, 1.0, 2.0};
      s.beta = {0.1, 1.0};
      break;
    default:
      throw std::invalid_argument("example: id must be 1..4, got " + std::to_string(id));
  }
  return s;
}

SweepResult run_example(int id, const ExampleOverrides& ov) {
  auto spec = example_spec(id);
  if (ov.rho) spec.rho = *ov.rho;
  if (ov.alpha) spec.alpha = *ov.alpha;
  if (ov.beta) spec.beta = *ov.beta;
  if (ov.scan) spec.scan = *ov.scan;
  if (ov.mc) spec.mc = *ov.mc;
  return phase_sweep(spec);
}

std::size_t EvidenceReport::conflicts() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const EvidenceEntry& e) { return e.conflict; }));
}

EvidenceReport evidence_report(const SweepResult& sweep, double sigmas) {
  EvidenceReport rep;
  const bool any_mc = std::any_of(sweep.records.begin(), sweep.records.end(),
                                  [](const SweepRecord& r) { return r.mc.has_value(); });
  if (any_mc) {
    rep.symmetric_reference =
        monte_carlo(DriftFunction::constant(0.0), sweep.spec.mc,
                    split_seed(sweep.spec.mc.seed, std::numeric_limits<std::uint64_t>::max()),
                    sweep.spec.mc.threads);
  }

  for (const auto& r : sweep.records) {
    if (!r.verdict) continue;
    EvidenceEntry e;
    e.index = r.index;
    e.label = r.verdict->label;
    if (e.label == Label::Inconclusive) {
      e.statement = "inconclusive";
      rep.entries.push_back(std::move(e));
      continue;
    }
    if (!r.mc) {
      e.statement = "no Monte Carlo evidence";
      rep.entries.push_back(std::move(e));
      continue;
    }
    const auto& ref = *rep.symmetric_reference;
    const double diff = r.mc->return_frequency.value - ref.return_frequency.value;
    const double se = std::hypot(r.mc->return_frequency.se, ref.return_frequency.se);
    const double z = se > 0 ? diff / se : (diff == 0 ? 0.0 : std::copysign(INFINITY, diff));
    e.z_vs_symmetric = z;

    std::ostringstream d;
    d.imbue(std::locale::classic());
    d.precision(6);
    d << "return frequency " << r.mc->return_frequency.value << " (se " << r.mc->return_frequency.se
      << "), symmetric walk " << ref.return_frequency.value << " (se " << ref.return_frequency.se
      << "); by horizon/16 " << r.mc->early_return_frequency.value << "; escape to "
      << r.mc->escape_level / 4 << " " << r.mc->quarter_escape_frequency.value << ", to "
      << r.mc->escape_level << " " << r.mc->escape_frequency.value;
    e.detail = d.str();

    if (e.label == Label::Transient) {
      if (z > sigmas) {
        e.conflict = true;
        e.statement = "CONFLICT: returns more often than the symmetric walk";
      } else if (z < -sigmas) {
        e.statement = "consistent with transience";
      } else {
        e.statement = "inconclusive: return frequency within noise of the symmetric walk";
      }
    } else {
      e.statement = r.mc->return_frequency.value >= r.mc->early_return_frequency.value
                        ? "consistent with recurrence"
                        : "inconclusive";
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace bdwalk
