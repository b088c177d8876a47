#include "bdwalk/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bdwalk/errors.hpp"

namespace bdwalk {
namespace {

using io::Json;

const std::vector<std::string> kTopKeys{"name",         "family",  "rho",     "alpha",
                                        "beta",         "beta_above_alpha", "band", "classifier",
                                        "simulation",   "oracle_level",     "outputs", "example"};
const std::vector<std::string> kScanKeys{"n_lo", "n_hi", "margin", "samples_per_octave", "dense_octaves"};
const std::vector<std::string> kSimKeys{"replicas",     "horizon",        "escape_level",   "seed",
                                        "mode",         "timing",         "start_state",    "start_time",
                                        "stop_at_escape", "stop_at_return", "sample_times", "threads"};

struct Problem {
  std::string field;
  std::string message;
};

class Reader {
 public:
  std::vector<Problem> problems;

  void bad(const std::string& field, const std::string& message) { problems.push_back({field, message}); }

  void check_keys(const Json& obj, const std::string& prefix, const std::vector<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(known.begin(), known.end(), key) != known.end()) continue;
      std::string msg = "unknown key";
      const auto hint = suggest_key(key, known);
      if (!hint.empty()) msg += "; did you mean '" + prefix + hint + "'?";
      bad(prefix + key, msg);
    }
  }

  void read(const Json& obj, const char* key, const std::string& field, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if (!v.is_number()) return bad(field, "expected a number");
    out = v.get<double>();
  }

  void read(const Json& obj, const char* key, const std::string& field, std::int64_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if (v.is_number_integer()) {
      out = v.get<std::int64_t>();
    } else if (v.is_number_float() && std::isfinite(v.get<double>()) &&
               std::floor(v.get<double>()) == v.get<double>() && std::abs(v.get<double>()) < 9.0e18) {
      out = static_cast<std::int64_t>(v.get<double>());
    } else {
      bad(field, "expected an integer");
    }
  }

  void read(const Json& obj, const char* key, const std::string& field, int& out) {
    std::int64_t wide = out;
    read(obj, key, field, wide);
    if (wide < INT32_MIN || wide > INT32_MAX) return bad(field, "out of range");
    out = static_cast<int>(wide);
  }

  void read(const Json& obj, const char* key, const std::string& field, std::uint64_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else {
      bad(field, "expected a non-negative integer");
    }
  }

  void read(const Json& obj, const char* key, const std::string& field, unsigned& out) {
    std::uint64_t wide = out;
    read(obj, key, field, wide);
    if (wide > UINT32_MAX) return bad(field, "out of range");
    out = static_cast<unsigned>(wide);
  }

  void read(const Json& obj, const char* key, const std::string& field, bool& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_boolean()) return bad(field, "expected true or false");
    out = obj[key].get<bool>();
  }

  void read(const Json& obj, const char* key, const std::string& field, std::string& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_string()) return bad(field, "expected a string");
    out = obj[key].get<std::string>();
  }

  // A number or an array of numbers.
  void read(const Json& obj, const char* key, const std::string& field, std::vector<double>& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (!v.is_array()) return bad(field, "expected a number or an array of numbers");
    std::vector<double> xs;
    for (const auto& x : v) {
      if (!x.is_number()) return bad(field, "expected a number or an array of numbers");
      xs.push_back(x.get<double>());
    }
    out = std::move(xs);
  }

  void read(const Json& obj, const char* key, const std::string& field, std::vector<std::string>& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if (v.is_string()) {
      out = {v.get<std::string>()};
      return;
    }
    if (!v.is_array()) return bad(field, "expected a string or an array of strings");
    std::vector<std::string> xs;
    for (const auto& x : v) {
      if (!x.is_string()) return bad(field, "expected a string or an array of strings");
      xs.push_back(x.get<std::string>());
    }
    out = std::move(xs);
  }
};

const Json& unwrap_output(const Json& root) {
  // a previous output: {"manifest": {..., "config": {...}}, ...}
  if (root.is_object() && root.contains("manifest") && root["manifest"].is_object() &&
      root["manifest"].contains("config")) {
    return root["manifest"]["config"];
  }
  // a bare manifest
  if (root.is_object() && root.contains("tool") && root.contains("config")) return root["config"];
  return root;
}

}  // namespace

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string suggest_key(const std::string& key, const std::vector<std::string>& known) {
  std::string best;
  std::size_t best_d = 3;
  for (const auto& k : known) {
    const auto d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

ExperimentSpec config_from_json(const Json& root, ExperimentSpec spec) {
  const Json& j = unwrap_output(root);
  if (!j.is_object()) throw ConfigError("", "config: expected a JSON object at the top level");

  Reader r;
  r.check_keys(j, "", kTopKeys);
  r.read(j, "name", "name", spec.name);
  if (j.contains("family")) {
    std::string fam;
    r.read(j, "family", "family", fam);
    if (!fam.empty()) {
      try {
        spec.family = family_from_string(fam);
      } catch (const std::invalid_argument&) {
        std::string msg = "unknown family '" + fam + "'";
        const auto hint = suggest_key(fam, {"power_law", "boundary", "exponential", "constant"});
        if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
        r.bad("family", msg);
      }
    }
  }
  r.read(j, "rho", "rho", spec.rho);
  r.read(j, "alpha", "alpha", spec.alpha);
  r.read(j, "beta", "beta", spec.beta);
  r.read(j, "beta_above_alpha", "beta_above_alpha", spec.beta_above_alpha);
  r.read(j, "band", "band", spec.band);
  r.read(j, "oracle_level", "oracle_level", spec.oracle_level);
  r.read(j, "outputs", "outputs", spec.outputs);
  r.read(j, "example", "example", spec.example);

  if (j.contains("classifier")) {
    const auto& c = j["classifier"];
    if (!c.is_object()) {
      r.bad("classifier", "expected an object");
    } else {
      r.check_keys(c, "classifier.", kScanKeys);
      r.read(c, "n_lo", "classifier.n_lo", spec.scan.n_lo);
      r.read(c, "n_hi", "classifier.n_hi", spec.scan.n_hi);
      r.read(c, "margin", "classifier.margin", spec.scan.margin);
      r.read(c, "samples_per_octave", "classifier.samples_per_octave", spec.scan.samples_per_octave);
      r.read(c, "dense_octaves", "classifier.dense_octaves", spec.scan.dense_octaves);
    }
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    if (!s.is_object()) {
      r.bad("simulation", "expected an object");
    } else {
      auto& m = spec.mc;
      r.check_keys(s, "simulation.", kSimKeys);
      r.read(s, "replicas", "simulation.replicas", m.replicas);
      r.read(s, "horizon", "simulation.horizon", m.horizon);
      r.read(s, "escape_level", "simulation.escape_level", m.escape_level);
      r.read(s, "seed", "simulation.seed", m.seed);
      r.read(s, "start_state", "simulation.start_state", m.start_state);
      r.read(s, "start_time", "simulation.start_time", m.start_time);
      r.read(s, "stop_at_escape", "simulation.stop_at_escape", m.stop_at_escape);
      r.read(s, "stop_at_return", "simulation.stop_at_return", m.stop_at_return);
      r.read(s, "sample_times", "simulation.sample_times", m.sample_times);
      r.read(s, "threads", "simulation.threads", m.threads);
      std::string mode, timing;
      r.read(s, "mode", "simulation.mode", mode);
      if (mode == "discrete") {
        m.mode = Mode::Discrete;
      } else if (mode == "continuous") {
        m.mode = Mode::ContinuousEmbedding;
      } else if (!mode.empty()) {
        r.bad("simulation.mode", "expected 'discrete' or 'continuous', got '" + mode + "'");
      }
      r.read(s, "timing", "simulation.timing", timing);
      if (timing == "frozen") {
        m.timing = RateTiming::Frozen;
      } else if (timing == "at_event") {
        m.timing = RateTiming::AtEvent;
      } else if (!timing.empty()) {
        r.bad("simulation.timing", "expected 'frozen' or 'at_event', got '" + timing + "'");
      }
    }
  }

  for (const auto& v : spec_violations(spec)) {
    const auto colon = v.find(": ");
    r.bad(v.substr(0, colon), colon == std::string::npos ? v : v.substr(colon + 2));
  }
  if (!r.problems.empty()) {
    std::string msg;
    for (const auto& p : r.problems) {
      if (!msg.empty()) msg += "\n";
      msg += p.field + ": " + p.message;
    }
    throw ConfigError(r.problems.front().field, msg);
  }
  return spec;
}

Json parse_document(const std::string& input, const std::string& source) {
  // CSV outputs carry their manifest on a leading "# " line
  std::string text = input;
  if (text.rfind('#', 0) == 0) {
    const auto eol = text.find('\n');
    text = text.substr(1, eol == std::string::npos ? std::string::npos : eol - 1);
  }
  Json j;
  try {
    j = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": parse error: " << e.what();
    throw ConfigError("", msg.str());
  }
  return unwrap_output(j);
}

ExperimentSpec parse_config(const std::string& text, const std::string& source) {
  return config_from_json(parse_document(text, source));
}

Json load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path.string());
}

ExperimentSpec load_config(const std::filesystem::path& path) { return config_from_json(load_document(path)); }

}  // namespace bdwalk
