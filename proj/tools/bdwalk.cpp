// bdwalk: classify, simulate and cross-check birth-and-death walks.
//
// Exit codes: 0 success, 2 invalid input (the diagnostic names the field),
// 1 runtime failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "bdwalk/classifier.hpp"
#include "bdwalk/config.hpp"
#include "bdwalk/errors.hpp"
#include "bdwalk/experiments.hpp"
#include "bdwalk/oracle.hpp"
#include "bdwalk/serialize.hpp"
#include "bdwalk/simulator.hpp"

namespace fs = std::filesystem;
using namespace bdwalk;
using io::Json;

namespace {

struct Common {
  std::string config;
  std::string output;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  int verbose = 0;
};

// Flags that override fields of the experiment config.
struct SpecFlags {
  std::optional<std::string> name, family, mode, timing;
  std::vector<double> rho, alpha, beta;
  std::optional<std::int64_t> n_lo, n_hi, replicas, horizon, escape_level, start_state, start_time;
  std::optional<double> margin, band;
  std::optional<unsigned> threads;
  bool stop_at_return = false, stop_at_escape = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "JSON config, or a previous output to re-run");
  cmd->add_option("-o,--output", c.output, "Output file (default: $BDWALK_OUTPUT_DIR or stdout)");
  cmd->add_option("-f,--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_flag("-v,--verbose", c.verbose, "Progress on stderr");
}

void add_drift_flags(CLI::App* cmd, SpecFlags& f) {
  cmd->add_option("--family", f.family, "power_law, boundary, exponential or constant");
  cmd->add_option("--rho", f.rho, "Scale (constant: the drift value)")->delimiter(',');
  cmd->add_option("--alpha", f.alpha, "State exponent")->delimiter(',');
  cmd->add_option("--beta", f.beta, "Time exponent")->delimiter(',');
}

void add_scan_flags(CLI::App* cmd, SpecFlags& f) {
  cmd->add_option("--n-lo", f.n_lo, "First state scanned");
  cmd->add_option("--n-hi", f.n_hi, "Last state scanned");
  cmd->add_option("--margin", f.margin, "Margin around the critical constant");
}

void add_mc_flags(CLI::App* cmd, SpecFlags& f) {
  cmd->add_option("--replicas", f.replicas, "Walks per grid point");
  cmd->add_option("--horizon", f.horizon, "Last time index");
  cmd->add_option("--escape-level", f.escape_level, "Upper level (default: sqrt of the horizon)");
  cmd->add_option("--start-state", f.start_state);
  cmd->add_option("--start-time", f.start_time);
  cmd->add_option("--mode", f.mode, "discrete or continuous");
  cmd->add_option("--timing", f.timing, "frozen or at_event (continuous mode)");
  cmd->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  cmd->add_flag("--stop-at-return", f.stop_at_return, "End each walk at its first return");
  cmd->add_flag("--stop-at-escape", f.stop_at_escape, "End each walk at the upper level");
}

// Flags are merged into the document before validation so errors name
// config fields whichever way a value arrived.
void merge_flags(Json& doc, const SpecFlags& f, const Common& c) {
  auto put = [](Json& j, const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  put(doc, "name", f.name);
  put(doc, "family", f.family);
  if (!f.rho.empty()) doc["rho"] = f.rho;
  if (!f.alpha.empty()) doc["alpha"] = f.alpha;
  if (!f.beta.empty()) doc["beta"] = f.beta;
  put(doc, "band", f.band);
  Json scan = doc.contains("classifier") ? doc["classifier"] : Json::object();
  put(scan, "n_lo", f.n_lo);
  put(scan, "n_hi", f.n_hi);
  put(scan, "margin", f.margin);
  if (!scan.empty()) doc["classifier"] = scan;
  Json sim = doc.contains("simulation") ? doc["simulation"] : Json::object();
  put(sim, "replicas", f.replicas);
  put(sim, "horizon", f.horizon);
  put(sim, "escape_level", f.escape_level);
  put(sim, "start_state", f.start_state);
  put(sim, "start_time", f.start_time);
  put(sim, "mode", f.mode);
  put(sim, "timing", f.timing);
  put(sim, "threads", f.threads);
  put(sim, "seed", c.seed);
  if (f.stop_at_return) sim["stop_at_return"] = true;
  if (f.stop_at_escape) sim["stop_at_escape"] = true;
  if (!sim.empty()) doc["simulation"] = sim;
}

Json read_config(const Common& c) { return c.config.empty() ? Json::object() : load_document(c.config); }

ExperimentSpec resolve_spec(Json doc, const SpecFlags& f, const Common& c, ExperimentSpec base = {}) {
  merge_flags(doc, f, c);
  return config_from_json(doc, std::move(base));
}

fs::path output_path(const Common& c, const std::string& stem) {
  if (!c.output.empty()) return c.output;
  if (const char* dir = std::getenv("BDWALK_OUTPUT_DIR"); dir && *dir) {
    fs::create_directories(dir);
    return fs::path(dir) / (stem + "." + c.format);
  }
  return {};
}

// CSV outputs carry the manifest on line one.
std::string render(const std::string& format, const Json& manifest, const char* key, const Json& result,
                   const std::function<void(std::ostream&)>& csv) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  if (format == "csv") {
    out << "# " << Json{{"manifest", manifest}}.dump() << '\n';
    csv(out);
  } else {
    Json doc;
    doc["manifest"] = manifest;
    doc[key] = result;
    out << doc.dump(2) << '\n';
  }
  return out.str();
}

// An empty path means stdout.
void write_text(const fs::path& path, const std::string& text, int verbose) {
  if (path.empty()) {
    std::cout << text << std::flush;
    if (!std::cout) throw std::runtime_error("write to stdout failed");
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error(path.string() + ": cannot open for writing");
  file << text;
  file.flush();
  if (!file) throw std::runtime_error(path.string() + ": write failed");
  if (verbose) std::cerr << "wrote " << path.string() << '\n';
}

void emit(const Common& c, const std::string& stem, const Json& manifest, const char* key, const Json& result,
          const std::function<void(std::ostream&)>& csv) {
  write_text(output_path(c, stem), render(c.format, manifest, key, result, csv), c.verbose);
}

std::string csv_cell(double x) { return std::isnan(x) ? std::string() : io::format_number(x); }

Json point_json(const GridPoint& p) {
  auto axis = [](double x) { return std::isnan(x) ? Json(nullptr) : Json(x); };
  return Json{{"rho", axis(p.rho)}, {"alpha", axis(p.alpha)}, {"beta", axis(p.beta)}};
}

// classify ------------------------------------------------------------------

struct ClassifyArgs {
  Common common;
  SpecFlags flags;
  std::string table;
  std::string tail = "constant";
};

int run_classify(const ClassifyArgs& a) {
  Json doc = read_config(a.common);
  std::string table = a.table;
  std::string tail = a.tail;
  if (doc.is_object() && doc.contains("table")) {
    if (table.empty()) table = doc["table"].get<std::string>();
    if (doc.contains("tail") && a.tail == "constant") tail = doc["tail"].get<std::string>();
    doc.erase("table");
    doc.erase("tail");
  }
  const auto spec = resolve_spec(doc, a.flags, a.common);

  struct Row {
    GridPoint point;
    DriftFunction drift;
    std::optional<Verdict> verdict;
    std::string error;
  };
  std::vector<Row> rows;
  if (!table.empty()) {
    if (tail != "constant" && tail != "zero") throw ConfigError("tail", "tail: expected 'constant' or 'zero'");
    DriftFunction f = DriftFunction::constant(0.0);
    try {
      f = DriftFunction::load_csv(table, tail == "zero" ? TailRule::Zero : TailRule::ConstantExtend);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("table", std::string("table: ") + e.what());
    }
    rows.push_back({{NAN, NAN, NAN}, f, std::nullopt, {}});
  } else {
    for (const auto& p : expand_grid(spec)) rows.push_back({p, make_drift(spec.family, p), std::nullopt, {}});
  }
  for (auto& r : rows) {
    try {
      r.verdict = classify_diagonal(r.drift, spec.scan);
    } catch (const DomainError& e) {
      if (rows.size() == 1) throw;
      r.error = std::string("invalid model: ") + e.what();
    }
    if (a.common.verbose) std::cerr << io::to_json(r.drift).dump() << " -> "
                                    << (r.verdict ? to_string(r.verdict->label) : r.error) << '\n';
  }

  Json config = io::to_json(spec);
  if (!table.empty()) {
    config = Json{{"table", table}, {"tail", tail}, {"classifier", io::to_json(spec.scan)}};
  }
  Json results = Json::array();
  for (const auto& r : rows) {
    Json j = point_json(r.point);
    j["drift"] = io::to_json(r.drift);
    j["verdict"] = r.verdict ? io::to_json(*r.verdict) : Json(nullptr);
    j["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
    results.push_back(std::move(j));
  }
  emit(a.common, "classify", io::manifest("classify", spec.mc.seed, config), "verdicts", results,
       [&](std::ostream& out) {
         out << "alpha,beta,rho,label,criterion,c,n0,valid_from\n";
         for (const auto& r : rows) {
           out << csv_cell(r.point.alpha) << ',' << csv_cell(r.point.beta) << ',' << csv_cell(r.point.rho) << ',';
           if (r.verdict) {
             const auto& v = *r.verdict;
             out << to_string(v.label) << ',' << to_string(v.criterion) << ','
                 << (v.witness_c ? io::format_number(*v.witness_c) : "") << ','
                 << (v.witness_n0 ? std::to_string(*v.witness_n0) : "") << ',' << v.valid_from << '\n';
           } else {
             out << "InvalidModel,,,,\n";
           }
         }
       });
  return 0;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  SpecFlags flags;
  bool per_replica = false;
  std::string path_csv;
  std::vector<double> sample_times;
};

int run_simulate(const SimulateArgs& a) {
  Json doc = read_config(a.common);
  if (!a.sample_times.empty()) doc["simulation"]["sample_times"] = a.sample_times;
  ExperimentSpec base;
  base.mc.replicas = 1000;
  auto spec = resolve_spec(doc, a.flags, a.common, base);
  if (spec.mc.replicas < 1) throw ConfigError("simulation.replicas", "simulation.replicas: must be >= 1");

  const auto points = expand_grid(spec);
  std::vector<std::pair<GridPoint, EnsembleStats>> runs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto f = make_drift(spec.family, points[i]);
    const auto cfg = walk_config(f, spec.mc, split_seed(spec.mc.seed, i));
    const auto t0 = std::chrono::steady_clock::now();
    runs.emplace_back(points[i], run_ensemble(cfg, spec.mc.replicas, spec.mc.resolved_escape_level(),
                                              spec.mc.threads));
    if (a.common.verbose) {
      std::cerr << io::to_json(f).dump() << ": " << spec.mc.replicas << " walks in "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    }
    if (i == 0 && !a.path_csv.empty()) {
      // replica 0 again, with its path
      auto one = cfg;
      one.seed = split_seed(cfg.seed, 0);
      one.path = PathCapture::Full;
      std::ofstream out(a.path_csv, std::ios::binary);
      if (!out) throw std::runtime_error(a.path_csv + ": cannot open for writing");
      out.imbue(std::locale::classic());
      io::write_path_csv(out, run_walk(one).path);
    }
  }

  Json results = Json::array();
  for (const auto& [p, e] : runs) {
    Json j = point_json(p);
    j["drift"] = io::to_json(make_drift(spec.family, p));
    j["stats"] = io::to_json(e, a.per_replica);
    results.push_back(std::move(j));
  }
  emit(a.common, "simulate", io::manifest("simulate", spec.mc.seed, io::to_json(spec)), "ensembles", results,
       [&](std::ostream& out) {
         for (const auto& [p, e] : runs) {
           if (runs.size() > 1) {
             out << "# rho=" << csv_cell(p.rho) << " alpha=" << csv_cell(p.alpha) << " beta=" << csv_cell(p.beta)
                 << '\n';
           }
           io::write_ensemble_csv(out, e);
         }
       });
  return 0;
}

// oracle --------------------------------------------------------------------

struct OracleArgs {
  Common common;
  SpecFlags flags;
  bool symmetric = false;
  std::optional<double> birth, death, ratio_c;
  std::optional<std::int64_t> a, b, k;
  std::optional<std::int64_t> n, level;
};

ChainSpec chain_from_json(const Json& j) {
  static const std::vector<std::string> keys{"kind", "birth", "death", "c", "drift", "valid_from"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    const auto hint = suggest_key(key, keys);
    throw ConfigError("chain." + key,
                      "chain." + key + ": unknown key" + (hint.empty() ? "" : "; did you mean 'chain." + hint + "'?"));
  }
  const auto kind = j.value("kind", std::string());
  if (kind == "symmetric") return ChainSpec::constant(0.5, 0.5);
  if (kind == "constant") return ChainSpec::constant(j.at("birth").get<double>(), j.at("death").get<double>());
  if (kind == "ratio") {
    const double c = j.at("c").get<double>();
    // mu/lambda = 1 + c/n with lambda + mu = 1
    return ChainSpec::from_ratio([c](std::int64_t n) { return 1.0 + c / static_cast<double>(n); });
  }
  if (kind == "diagonal") {
    return ChainSpec::diagonal(io::drift_from_json(j.at("drift")), j.value("valid_from", std::int64_t{1}));
  }
  throw ConfigError("chain.kind", "chain.kind: expected symmetric, constant, ratio or diagonal");
}

int run_oracle(const std::string& query, const OracleArgs& a) {
  Json doc = read_config(a.common);
  if (!doc.is_object()) throw ConfigError("", "config: expected a JSON object");
  static const std::vector<std::string> keys{"query", "chain", "a", "b", "k", "n", "level"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    const auto hint = suggest_key(key, keys);
    throw ConfigError(key, key + ": unknown key" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
  }

  // chain: flags win over the config
  const auto& f = a.flags;
  const int sources = int(a.symmetric) + int(a.birth || a.death) + int(a.ratio_c.has_value()) +
                      int(f.family.has_value() || !f.rho.empty() || !f.alpha.empty() || !f.beta.empty());
  if (sources > 1) {
    throw ConfigError("chain", "chain: give one of --symmetric, --birth/--death, --ratio-c or drift flags");
  }
  if (a.symmetric) {
    doc["chain"] = {{"kind", "symmetric"}};
  } else if (a.birth || a.death) {
    if (!a.birth || !a.death) throw ConfigError("chain", "chain: --birth and --death go together");
    doc["chain"] = {{"kind", "constant"}, {"birth", *a.birth}, {"death", *a.death}};
  } else if (a.ratio_c) {
    doc["chain"] = {{"kind", "ratio"}, {"c", *a.ratio_c}};
  } else if (sources == 1) {
    Json spec_doc = Json::object();
    merge_flags(spec_doc, f, Common{});
    const auto spec = config_from_json(spec_doc);
    const auto points = expand_grid(spec);
    if (points.size() != 1) throw ConfigError("rho", "rho: the oracle takes a single drift");
    const auto drift = make_drift(spec.family, points[0]);
    const auto v = classify_diagonal(drift, spec.scan);
    doc["chain"] = {{"kind", "diagonal"}, {"drift", io::to_json(drift)}, {"valid_from", v.valid_from}};
  }
  if (!doc.contains("chain")) throw ConfigError("chain", "chain: no chain given (try --symmetric)");
  doc["query"] = query;
  if (a.a) doc["a"] = *a.a;
  if (a.b) doc["b"] = *a.b;
  if (a.k) doc["k"] = *a.k;
  if (a.n) doc["n"] = *a.n;
  if (a.level) doc["level"] = *a.level;

  auto need = [&](const char* key) -> std::int64_t {
    if (!doc.contains(key)) throw ConfigError(key, std::string(key) + ": required for oracle " + query);
    if (!doc[key].is_number_integer()) throw ConfigError(key, std::string(key) + ": expected an integer");
    return doc[key].get<std::int64_t>();
  };
  const auto chain = chain_from_json(doc["chain"]);
  const Json manifest = io::manifest("oracle " + query, 0, doc);

  if (query == "hit") {
    const HittingProblem p{need("k"), need("a"), need("b")};
    if (!(p.lower < p.upper)) throw ConfigError("b", "b: must exceed a");
    if (p.start < p.lower || p.start > p.upper) throw ConfigError("k", "k: must lie in [a, b]");
    const double prob = hit_probability(chain, p);
    emit(a.common, "oracle-hit", manifest, "result", Json{{"probability", prob}}, [&](std::ostream& out) {
      out << "a,b,k,probability\n"
          << p.lower << ',' << p.upper << ',' << p.start << ',' << io::format_number(prob) << '\n';
    });
  } else if (query == "stationary") {
    if (!doc.contains("n")) doc["n"] = 1000;
    const auto n = need("n");
    if (n < 1) throw ConfigError("n", "n: must be >= 1");
    const auto dist = stationary(chain, n);
    const auto res = balance_residuals(dist, chain);
    emit(a.common, "oracle-stationary", io::manifest("oracle " + query, 0, doc), "result", io::to_json(dist, res),
         [&](std::ostream& out) {
           out << "n,p\n";
           for (std::size_t i = 0; i < dist.p.size(); ++i) out << i << ',' << io::format_number(dist.p[i]) << '\n';
         });
  } else {
    if (!doc.contains("level")) doc["level"] = 1000;
    const auto level = need("level");
    if (level < 2) throw ConfigError("level", "level: must be >= 2");
    const auto e = expected_returns(chain, level);
    emit(a.common, "oracle-returns", io::manifest("oracle " + query, 0, doc), "result", io::to_json(e),
         [&](std::ostream& out) {
           out << "level,escape,escape_at_double,return_probability,infinite_returns\n"
               << e.level << ',' << io::format_number(e.escape) << ',' << io::format_number(e.escape_at_double)
               << ',' << io::format_number(e.return_probability) << ',' << (e.infinite_returns ? 1 : 0) << '\n';
         });
  }
  return 0;
}

// sweep / example -----------------------------------------------------------

struct SweepArgs {
  Common common;
  SpecFlags flags;
  int example = 0;
  std::string phase_data;
  bool timing = false;
};

int run_sweep(const std::string& command, const SweepArgs& a) {
  Json doc = read_config(a.common);
  ExperimentSpec base;
  if (command == "example") {
    try {
      base = example_spec(a.example);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("example", e.what());
    }
    // an example's grid replaces, not merges with, a config's
    doc.erase("example");
  }
  const auto spec = resolve_spec(doc, a.flags, a.common, base);
  if (a.common.verbose) std::cerr << expand_grid(spec).size() << " grid points\n";

  const auto result = phase_sweep(spec);
  if (a.common.verbose) {
    std::cerr << "sweep finished in " << result.runtime << " s, " << result.inconsistent()
              << " inconsistent point(s)\n";
  }
  auto phase = [&] {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    io::write_phase_data(out, result);
    return out.str();
  };
  if (!a.phase_data.empty()) write_text(a.phase_data, phase(), a.common.verbose);

  Json body = io::to_json(result, a.timing);
  const bool any_mc = std::any_of(result.records.begin(), result.records.end(),
                                  [](const SweepRecord& r) { return r.mc.has_value(); });
  if (any_mc) body["evidence"] = io::to_json(evidence_report(result));
  const std::string stem = command == "example" ? "example" + std::to_string(a.example) : spec.name;
  const Json manifest = io::manifest(command, spec.mc.seed, io::to_json(spec));
  auto csv = [&](std::ostream& out) { io::write_sweep_csv(out, result); };
  const auto main_path = output_path(a.common, stem);
  write_text(main_path, render(a.common.format, manifest, "sweep", body, csv), a.common.verbose);

  // further formats requested by the config go next to the main output
  const fs::path dir = main_path.empty() ? fs::path() : main_path.parent_path();
  const std::string file_stem = main_path.empty() ? stem : main_path.stem().string();
  for (const auto& o : spec.outputs) {
    if (o == a.common.format) continue;
    if (main_path.empty()) {
      if (a.common.verbose) std::cerr << "output '" << o << "' skipped: no output directory\n";
      continue;
    }
    if (o == "phase") {
      write_text(dir / (file_stem + ".dat"), phase(), a.common.verbose);
    } else {
      write_text(dir / (file_stem + "." + o), render(o, manifest, "sweep", body, csv), a.common.verbose);
    }
  }
  return 0;
}

// validate ------------------------------------------------------------------

struct ValidateArgs {
  Common common;
  SpecFlags flags;
};

int run_validate(const ValidateArgs& a) {
  const auto spec = resolve_spec(read_config(a.common), a.flags, a.common);
  const auto points = expand_grid(spec);
  Json checks = Json::array();
  for (const auto& p : points) {
    const auto f = make_drift(spec.family, p);
    std::size_t range = 0, monotone = 0;
    for (const auto& v : validate(f, 4096, 1 << 24, {.wedge_only = true, .wedge_offset = 0})) {
      (v.which == Invariant::Range ? range : monotone) += 1;
    }
    Json j = point_json(p);
    j["range_violations"] = range;
    j["monotone_violations"] = monotone;
    checks.push_back(std::move(j));
  }
  Json result{{"valid", true}, {"points", points.size()}, {"drift_checks", checks}};
  emit(a.common, "validate", io::manifest("validate", spec.mc.seed, io::to_json(spec)), "result", result,
       [&](std::ostream& out) {
         out << "alpha,beta,rho,range_violations,monotone_violations\n";
         for (const auto& j : checks) {
           auto cell = [](const Json& x) { return x.is_null() ? std::string() : io::format_number(x.get<double>()); };
           out << cell(j["alpha"]) << ',' << cell(j["beta"]) << ',' << cell(j["rho"]) << ','
               << j["range_violations"].get<std::size_t>() << ',' << j["monotone_violations"].get<std::size_t>()
               << '\n';
         }
       });
  return 0;
}

int fail(int code, const std::string& kind, const std::string& what) {
  std::cerr << "bdwalk: " << kind << ": " << what << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrence and transience of time-inhomogeneous birth-and-death walks"};
  app.set_version_flag("--version", std::string("bdwalk ") + BDWALK_VERSION);
  app.require_subcommand(1, 1);

  ClassifyArgs classify;
  auto* cmd_classify = app.add_subcommand("classify", "Diagonal-criterion verdicts for a drift or a grid");
  add_common(cmd_classify, classify.common);
  add_drift_flags(cmd_classify, classify.flags);
  add_scan_flags(cmd_classify, classify.flags);
  cmd_classify->add_option("--table", classify.table, "Tabulated drift: CSV with columns n,t,phi");
  cmd_classify->add_option("--tail", classify.tail, "Beyond the table: constant or zero");

  SimulateArgs simulate;
  auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo ensembles of the walk");
  add_common(cmd_simulate, simulate.common);
  add_drift_flags(cmd_simulate, simulate.flags);
  add_mc_flags(cmd_simulate, simulate.flags);
  cmd_simulate->add_flag("--per-replica", simulate.per_replica, "Include every replica in the JSON output");
  cmd_simulate->add_option("--path-csv", simulate.path_csv, "Write the path of the first replica (t,state)");
  cmd_simulate->add_option("--sample-times", simulate.sample_times, "Times at which to average the state")
      ->delimiter(',');

  OracleArgs oracle;
  auto* cmd_oracle = app.add_subcommand("oracle", "Exact answers for homogeneous chains");
  cmd_oracle->require_subcommand(1, 1);
  auto chain_flags = [&oracle](CLI::App* q) {
    add_common(q, oracle.common);
    add_drift_flags(q, oracle.flags);
    q->add_flag("--symmetric", oracle.symmetric, "birth = death = 1/2");
    q->add_option("--birth", oracle.birth, "Constant birth rate");
    q->add_option("--death", oracle.death, "Constant death rate");
    q->add_option("--ratio-c", oracle.ratio_c, "death/birth = 1 + c/n");
  };
  auto* q_hit = cmd_oracle->add_subcommand("hit", "P(reach b before a | start k)");
  chain_flags(q_hit);
  q_hit->add_option("--a", oracle.a, "Lower barrier");
  q_hit->add_option("--b", oracle.b, "Upper barrier");
  q_hit->add_option("--k", oracle.k, "Start state");
  auto* q_stat = cmd_oracle->add_subcommand("stationary", "Stationary distribution on 0..n");
  chain_flags(q_stat);
  q_stat->add_option("--n", oracle.n, "Truncation (default 1000)");
  auto* q_ret = cmd_oracle->add_subcommand("returns", "Escape and return probabilities from state 1");
  chain_flags(q_ret);
  q_ret->add_option("--level", oracle.level, "Escape level (default 1000)");

  SweepArgs sweep;
  auto* cmd_sweep = app.add_subcommand("sweep", "Parameter sweep with oracle and Monte Carlo evidence");
  add_common(cmd_sweep, sweep.common);
  add_drift_flags(cmd_sweep, sweep.flags);
  add_scan_flags(cmd_sweep, sweep.flags);
  add_mc_flags(cmd_sweep, sweep.flags);
  cmd_sweep->add_option("--name", sweep.flags.name, "Experiment name");
  cmd_sweep->add_option("--band", sweep.flags.band, "Distance to a region boundary treated as undecided");
  cmd_sweep->add_option("--phase-data", sweep.phase_data, "Write gnuplot phase-diagram data");
  cmd_sweep->add_flag("--runtimes", sweep.timing, "Include runtimes (output no longer reproducible)");

  SweepArgs example;
  auto* cmd_example = app.add_subcommand("example", "One of the four worked examples (1-4)");
  cmd_example->add_option("id", example.example, "Example number")->required();
  add_common(cmd_example, example.common);
  add_drift_flags(cmd_example, example.flags);
  add_scan_flags(cmd_example, example.flags);
  add_mc_flags(cmd_example, example.flags);
  cmd_example->add_option("--phase-data", example.phase_data, "Write gnuplot phase-diagram data");
  cmd_example->add_flag("--runtimes", example.timing, "Include runtimes (output no longer reproducible)");

  ValidateArgs validate_args;
  auto* cmd_validate = app.add_subcommand("validate", "Check a config and its drifts without running");
  add_common(cmd_validate, validate_args.common);
  add_drift_flags(cmd_validate, validate_args.flags);
  add_scan_flags(cmd_validate, validate_args.flags);
  add_mc_flags(cmd_validate, validate_args.flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_classify) return run_classify(classify);
    if (*cmd_simulate) return run_simulate(simulate);
    if (*cmd_oracle) {
      for (auto* q : {q_hit, q_stat, q_ret}) {
        if (*q) return run_oracle(q->get_name(), oracle);
      }
    }
    if (*cmd_sweep) return run_sweep("sweep", sweep);
    if (*cmd_example) return run_sweep("example", example);
    if (*cmd_validate) return run_validate(validate_args);
  } catch (const ConfigError& e) {
    return fail(2, "invalid input", e.what());
  } catch (const DomainError& e) {
    return fail(2, "invalid input", std::string("drift: ") + e.what());
  } catch (const NotNormalizable& e) {
    return fail(2, "invalid input", std::string("chain: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(2, "invalid input", e.what());
  } catch (const Json::exception& e) {
    return fail(2, "invalid input", e.what());
  } catch (const std::exception& e) {
    return fail(1, "error", e.what());
  }
  return 1;
}
