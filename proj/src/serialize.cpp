#include "bdwalk/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bdwalk::io {
namespace {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string mode_name(Mode m) { return m == Mode::Discrete ? "discrete" : "continuous"; }
std::string timing_name(RateTiming t) { return t == RateTiming::Frozen ? "frozen" : "at_event"; }

double label_code(const SweepRecord& r) {
  if (!r.verdict) return std::nan("");
  switch (r.verdict->label) {
    case Label::Recurrent:
      return 1;
    case Label::Transient:
      return -1;
    case Label::Inconclusive:
      return 0;
  }
  return 0;
}

void axis(Json& j, const char* key, double x) { j[key] = number_or_null(x); }

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json to_json(const DriftFunction& f) {
  Json j;
  j["family"] = f.family();
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          j["rho"] = p.rho;
          j["alpha"] = p.alpha;
          j["beta"] = p.beta;
        } else if constexpr (std::is_same_v<T, Boundary>) {
          j["rho"] = p.rho;
          j["alpha"] = p.alpha;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          j["alpha"] = p.alpha;
          j["beta"] = p.beta;
        } else if constexpr (std::is_same_v<T, Constant>) {
          j["value"] = p.value;
        } else {
          j["n"] = p.n_values;
          j["t"] = p.t_values;
          j["phi"] = p.phi;
          j["tail"] = p.tail == TailRule::Zero ? "zero" : "constant";
        }
      },
      f.variant());
  return j;
}

DriftFunction drift_from_json(const Json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "power_law") {
    return DriftFunction::power_law(j.at("rho").get<double>(), j.at("alpha").get<double>(),
                                    j.at("beta").get<double>());
  }
  if (family == "boundary") {
    return DriftFunction::boundary(j.at("rho").get<double>(), j.at("alpha").get<double>());
  }
  if (family == "exponential") {
    return DriftFunction::exponential(j.at("alpha").get<double>(), j.at("beta").get<double>());
  }
  if (family == "constant") return DriftFunction::constant(j.at("value").get<double>());
  if (family == "tabulated") {
    Tabulated t;
    t.n_values = j.at("n").get<std::vector<std::int64_t>>();
    t.t_values = j.at("t").get<std::vector<double>>();
    t.phi = j.at("phi").get<std::vector<double>>();
    t.tail = j.value("tail", std::string("constant")) == "zero" ? TailRule::Zero : TailRule::ConstantExtend;
    return DriftFunction::tabulated(std::move(t));
  }
  throw std::invalid_argument("family: unknown family '" + family + "'");
}

Json to_json(const ScanSettings& s) {
  return Json{{"n_lo", s.n_lo},
              {"n_hi", s.n_hi},
              {"margin", s.margin},
              {"samples_per_octave", s.samples_per_octave},
              {"dense_octaves", s.dense_octaves}};
}

Json to_json(const Verdict& v) {
  Json j;
  j["label"] = to_string(v.label);
  j["criterion"] = to_string(v.criterion);
  j["c"] = v.witness_c ? number_or_null(*v.witness_c) : Json(nullptr);
  j["n0"] = optional_json(v.witness_n0);
  j["valid_from"] = v.valid_from;
  Json stats = Json::array();
  for (const auto& o : v.stats) {
    stats.push_back({{"n_begin", o.n_begin},
                     {"n_end", o.n_end},
                     {"min", number_or_null(o.min)},
                     {"max", number_or_null(o.max)},
                     {"samples", o.samples}});
  }
  j["stats"] = std::move(stats);
  j["notes"] = v.notes;
  return j;
}

Verdict verdict_from_json(const Json& j) {
  Verdict v;
  v.label = label_from_string(j.at("label").get<std::string>());
  const auto crit = j.value("criterion", std::string("diagonal"));
  v.criterion = crit == "ratio" ? Criterion::Ratio : crit == "series" ? Criterion::Series : Criterion::Diagonal;
  if (j.contains("c") && !j["c"].is_null()) v.witness_c = j["c"].get<double>();
  if (j.contains("n0") && !j["n0"].is_null()) v.witness_n0 = j["n0"].get<std::int64_t>();
  v.valid_from = j.value("valid_from", std::int64_t{1});
  if (j.contains("stats")) {
    for (const auto& o : j["stats"]) {
      auto val = [&o](const char* k, double missing) {
        return o.at(k).is_null() ? missing : o.at(k).get<double>();
      };
      v.stats.push_back({o.at("n_begin").get<std::int64_t>(), o.at("n_end").get<std::int64_t>(),
                         val("min", INFINITY), val("max", -INFINITY), o.at("samples").get<std::int64_t>()});
    }
  }
  if (j.contains("notes")) v.notes = j["notes"].get<std::vector<std::string>>();
  return v;
}

Json to_json(const StationaryDistribution& d, const BalanceResidual& residual) {
  return Json{{"truncation", d.truncation},
              {"tail_bound", d.tail_bound},
              {"residual", {{"interior", residual.interior}, {"boundary", residual.boundary}, {"max", residual.max()}}},
              {"p", d.p}};
}

Json to_json(const ReturnEstimate& e) {
  return Json{{"level", e.level},
              {"escape", e.escape},
              {"escape_at_double", e.escape_at_double},
              {"return_probability", e.return_probability},
              {"infinite_returns", e.infinite_returns}};
}

Json to_json(const Estimate& e) { return Json{{"value", e.value}, {"se", e.se}}; }

Json to_json(const McSettings& m) {
  return Json{{"replicas", m.replicas},
              {"horizon", m.horizon},
              {"escape_level", m.escape_level},
              {"seed", m.seed},
              {"mode", mode_name(m.mode)},
              {"timing", timing_name(m.timing)},
              {"start_state", m.start_state},
              {"start_time", m.start_time},
              {"stop_at_escape", m.stop_at_escape},
              {"stop_at_return", m.stop_at_return},
              {"sample_times", m.sample_times},
              {"threads", m.threads}};
}

Json to_json(const TrajectoryStats& s) {
  Json j;
  j["returns_to_zero"] = s.returns_to_zero;
  j["first_return_time"] = optional_json(s.first_return_time);
  j["max_state"] = s.max_state;
  j["final_state"] = s.final_state;
  j["pre_return_max"] = s.pre_return_max;
  j["hit_upper"] = s.hit_upper ? Json{{"level", s.hit_upper->level}, {"time", s.hit_upper->time}} : Json(nullptr);
  j["time_at_zero"] = s.time_at_zero;
  j["end_time"] = s.end_time;
  j["steps"] = s.steps;
  j["uniforms"] = s.uniforms;
  if (!s.sampled_states.empty()) j["sampled_states"] = s.sampled_states;
  if (!s.path.empty()) {
    Json path = Json::array();
    for (const auto& p : s.path) path.push_back({p.time, p.state});
    j["path"] = std::move(path);
  }
  return j;
}

Json to_json(const EnsembleStats& e, bool per_replica) {
  Json j;
  j["replicas"] = e.replicas;
  j["master_seed"] = e.master_seed;
  j["escape_level"] = e.escape_level;
  j["return_frequency"] = to_json(e.return_frequency);
  j["mean_returns"] = to_json(e.mean_returns);
  j["escape_frequency"] = to_json(e.escape_frequency);
  Json curve = Json::array();
  for (const auto& p : e.mean_state_by_time) curve.push_back({{"t", p.time}, {"mean", p.mean}, {"se", p.se}});
  j["mean_state_by_time"] = std::move(curve);
  if (per_replica) {
    Json runs = Json::array();
    for (std::size_t i = 0; i < e.runs.size(); ++i) {
      Json r = to_json(e.runs[i]);
      r["seed"] = e.seeds[i];
      runs.push_back(std::move(r));
    }
    j["runs"] = std::move(runs);
  }
  return j;
}

Json to_json(const McSummary& m) {
  return Json{{"replicas", m.replicas},
              {"horizon", m.horizon},
              {"escape_level", m.escape_level},
              {"seed", m.seed},
              {"return_frequency", to_json(m.return_frequency)},
              {"early_return_frequency", to_json(m.early_return_frequency)},
              {"escape_frequency", to_json(m.escape_frequency)},
              {"quarter_escape_frequency", to_json(m.quarter_escape_frequency)},
              {"mean_returns", to_json(m.mean_returns)}};
}

Json to_json(const VanishingReport& r) {
  Json curve = Json::array();
  for (const auto& p : r.mean_phi) curve.push_back({{"t", p.time}, {"mean", p.mean}, {"se", p.se}});
  return Json{{"mean_phi", std::move(curve)},
              {"trend_slope", number_or_null(r.trend_slope)},
              {"threshold", r.threshold},
              {"vanishing_at_horizon", r.vanishing_at_horizon}};
}

Json to_json(const ExperimentSpec& s) {
  return Json{{"name", s.name},
              {"family", to_string(s.family)},
              {"rho", s.rho},
              {"alpha", s.alpha},
              {"beta", s.beta},
              {"beta_above_alpha", s.beta_above_alpha},
              {"band", s.band},
              {"classifier", to_json(s.scan)},
              {"simulation", to_json(s.mc)},
              {"oracle_level", s.oracle_level},
              {"outputs", s.outputs},
              {"example", s.example}};
}

Json to_json(const SweepResult& r, bool timing) {
  Json records = Json::array();
  std::map<std::string, std::size_t> by_label;
  std::size_t invalid = 0, errors = 0;
  for (const auto& rec : r.records) {
    Json j;
    j["index"] = rec.index;
    axis(j, "rho", rec.point.rho);
    axis(j, "alpha", rec.point.alpha);
    axis(j, "beta", rec.point.beta);
    j["seed"] = rec.seed;
    j["expected"] = rec.expected ? Json(to_string(*rec.expected)) : Json(nullptr);
    j["near_boundary"] = rec.near_boundary;
    j["consistent"] = rec.consistent;
    j["invalid_model"] = rec.invalid_model;
    j["verdict"] = rec.verdict ? to_json(*rec.verdict) : Json(nullptr);
    if (rec.oracle) {
      j["oracle"] = {{"ratio_label", to_string(rec.oracle->ratio_label)},
                     {"level", rec.oracle->level},
                     {"escape", rec.oracle->escape},
                     {"infinite_returns", rec.oracle->infinite_returns},
                     {"agrees", rec.oracle->agrees}};
    } else {
      j["oracle"] = nullptr;
    }
    j["mc"] = rec.mc ? to_json(*rec.mc) : Json(nullptr);
    j["annotations"] = rec.annotations;
    j["error"] = rec.error.empty() ? Json(nullptr) : Json(rec.error);
    if (timing) j["runtime_s"] = rec.runtime;
    records.push_back(std::move(j));

    if (rec.verdict) ++by_label[to_string(rec.verdict->label)];
    invalid += rec.invalid_model ? 1 : 0;
    errors += rec.error.empty() ? 0 : 1;
  }
  Json summary;
  summary["points"] = r.records.size();
  summary["inconsistent"] = r.inconsistent();
  summary["invalid_model"] = invalid;
  summary["errors"] = errors;
  Json labels = Json::object();
  for (const auto& [k, v] : by_label) labels[k] = v;
  summary["labels"] = std::move(labels);

  Json j;
  j["name"] = r.spec.name;
  j["family"] = to_string(r.spec.family);
  j["summary"] = std::move(summary);
  j["records"] = std::move(records);
  if (timing) j["runtime_s"] = r.runtime;
  return j;
}

Json to_json(const EvidenceReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"index", e.index},
                       {"label", to_string(e.label)},
                       {"statement", e.statement},
                       {"z_vs_symmetric", e.z_vs_symmetric ? number_or_null(*e.z_vs_symmetric) : Json(nullptr)},
                       {"conflict", e.conflict},
                       {"detail", e.detail}});
  }
  return Json{{"symmetric_reference", r.symmetric_reference ? to_json(*r.symmetric_reference) : Json(nullptr)},
              {"conflicts", r.conflicts()},
              {"entries", std::move(entries)}};
}

Json manifest(const std::string& command, std::uint64_t seed, const Json& config) {
  return Json{{"tool", "bdwalk"}, {"version", BDWALK_VERSION}, {"command", command}, {"seed", seed}, {"config", config}};
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  auto cell = [](double x) { return std::isnan(x) ? std::string() : format_number(x); };
  out << "alpha,beta,rho,label,c,n0,mc_return_freq,mc_se\n";
  for (const auto& rec : r.records) {
    out << cell(rec.point.alpha) << ',' << cell(rec.point.beta) << ',' << cell(rec.point.rho) << ',';
    if (rec.verdict) {
      out << to_string(rec.verdict->label) << ',';
      out << (rec.verdict->witness_c ? format_number(*rec.verdict->witness_c) : "") << ',';
      out << (rec.verdict->witness_n0 ? std::to_string(*rec.verdict->witness_n0) : "") << ',';
    } else {
      out << (rec.invalid_model ? "InvalidModel" : "Error") << ",,,";
    }
    if (rec.mc) {
      out << format_number(rec.mc->return_frequency.value) << ',' << format_number(rec.mc->return_frequency.se);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_ensemble_csv(std::ostream& out, const EnsembleStats& e) {
  out << "kind,replica,seed,returns_to_zero,returned,first_return_time,max_state,final_state,escaped,"
         "time_at_zero,steps\n";
  double max_sum = 0, final_sum = 0, zero_sum = 0, steps_sum = 0;
  for (std::size_t i = 0; i < e.runs.size(); ++i) {
    const auto& r = e.runs[i];
    out << "replica," << i << ',' << e.seeds[i] << ',' << r.returns_to_zero << ','
        << (r.returns_to_zero > 0 ? 1 : 0) << ','
        << (r.first_return_time ? format_number(*r.first_return_time) : "") << ',' << r.max_state << ','
        << r.final_state << ',' << (r.escaped_before_return() ? 1 : 0) << ',' << format_number(r.time_at_zero)
        << ',' << r.steps << '\n';
    max_sum += static_cast<double>(r.max_state);
    final_sum += static_cast<double>(r.final_state);
    zero_sum += r.time_at_zero;
    steps_sum += static_cast<double>(r.steps);
  }
  const double n = e.runs.empty() ? 1.0 : static_cast<double>(e.runs.size());
  // column means over replicas
  out << "summary," << e.replicas << ',' << e.master_seed << ',' << format_number(e.mean_returns.value) << ','
      << format_number(e.return_frequency.value) << ",," << format_number(max_sum / n) << ','
      << format_number(final_sum / n) << ',' << format_number(e.escape_frequency.value) << ','
      << format_number(zero_sum / n) << ',' << format_number(steps_sum / n) << '\n';
}

void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path) {
  out << "t,state\n";
  for (const auto& p : path) out << format_number(p.time) << ',' << p.state << '\n';
}

void write_phase_data(std::ostream& out, const SweepResult& r) {
  out << "# alpha beta code (1 recurrent, -1 transient, 0 inconclusive, nan invalid)\n";
  std::map<double, std::vector<const SweepRecord*>> by_beta;
  for (const auto& rec : r.records) by_beta[rec.point.beta].push_back(&rec);
  double lo = INFINITY, hi = -INFINITY;
  bool first = true;
  for (const auto& [beta, recs] : by_beta) {
    if (!first) out << '\n';
    first = false;
    for (const auto* rec : recs) {
      out << format_number(rec->point.alpha) << ' ' << format_number(beta) << ' ' << format_number(label_code(*rec))
          << '\n';
    }
    if (std::isfinite(beta)) {
      lo = std::min(lo, beta);
      hi = std::max(hi, beta);
    }
  }
  if (!(lo <= hi)) return;
  const int steps = 50;
  out << "\n\n# curve alpha = 2 beta - 1 (beta < 1)\n";
  for (int i = 0; i <= steps; ++i) {
    const double b = lo + (std::min(hi, 1.0) - lo) * i / steps;
    if (b > 1.0) break;
    out << format_number(2 * b - 1) << ' ' << format_number(b) << '\n';
  }
  out << "\n\n# curve alpha = beta\n";
  for (int i = 0; i <= steps; ++i) {
    const double b = lo + (hi - lo) * i / steps;
    out << format_number(b) << ' ' << format_number(b) << '\n';
  }
}

}  // namespace bdwalk::io
