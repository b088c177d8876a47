#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bdwalk/chain.hpp"
#include "bdwalk/classifier.hpp"
#include "bdwalk/config.hpp"
#include "bdwalk/errors.hpp"
#include "bdwalk/experiments.hpp"
#include "bdwalk/oracle.hpp"
#include "bdwalk/serialize.hpp"
#include "bdwalk/simulator.hpp"

namespace py = pybind11;
using namespace bdwalk;
using io::Json;

namespace {

py::object to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& x : j) out.append(to_py(x));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
    default:
      return py::none();
  }
}

// dicts go through the json module; strings are parsed as config text
Json from_py(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return parse_document(obj.cast<std::string>());
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::dict sweep_output(const std::string& command, const ExperimentSpec& spec, const SweepResult& r) {
  Json doc;
  doc["manifest"] = io::manifest(command, spec.mc.seed, io::to_json(spec));
  doc["sweep"] = io::to_json(r);
  const bool any_mc =
      std::any_of(r.records.begin(), r.records.end(), [](const SweepRecord& x) { return x.mc.has_value(); });
  if (any_mc) doc["sweep"]["evidence"] = io::to_json(evidence_report(r));
  return to_py(doc);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Recurrence and transience of time-inhomogeneous birth-and-death walks";
  m.attr("__version__") = BDWALK_VERSION;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NotNormalizable>(m, "NotNormalizable", PyExc_RuntimeError);
  // the module keeps the type alive
  static PyObject* config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::object err = py::reinterpret_borrow<py::object>(config_error)(e.what());
      err.attr("field") = e.field();
      PyErr_SetObject(config_error, err.ptr());
    }
  });

  py::enum_<Label>(m, "Label")
      .value("Recurrent", Label::Recurrent)
      .value("Transient", Label::Transient)
      .value("Inconclusive", Label::Inconclusive);

  py::class_<DriftFunction>(m, "DriftFunction")
      .def_static("power_law", &DriftFunction::power_law, py::arg("rho"), py::arg("alpha"), py::arg("beta"),
                  "phi = rho n^alpha / (2 t^beta)")
      .def_static("boundary", &DriftFunction::boundary, py::arg("rho"), py::arg("alpha"),
                  "phi = rho n^alpha / t^((1 + alpha) / 2)")
      .def_static("exponential", &DriftFunction::exponential, py::arg("alpha"), py::arg("beta"),
                  "phi = exp(alpha n - beta t)")
      .def_static("constant", &DriftFunction::constant, py::arg("value"))
      .def_static(
          "tabulated",
          [](std::vector<std::int64_t> n, std::vector<double> t, std::vector<double> phi, const std::string& tail) {
            Tabulated tab;
            tab.n_values = std::move(n);
            tab.t_values = std::move(t);
            tab.phi = std::move(phi);
            tab.tail = tail == "zero" ? TailRule::Zero : TailRule::ConstantExtend;
            return DriftFunction::tabulated(std::move(tab));
          },
          py::arg("n"), py::arg("t"), py::arg("phi"), py::arg("tail") = "constant",
          "Row-major phi over the grid n x t")
      .def_static(
          "load_csv",
          [](const std::filesystem::path& path, const std::string& tail) {
            return DriftFunction::load_csv(path, tail == "zero" ? TailRule::Zero : TailRule::ConstantExtend);
          },
          py::arg("path"), py::arg("tail") = "constant")
      .def("__call__", &DriftFunction::evaluate, py::arg("n"), py::arg("t"))
      .def("diagonal", &DriftFunction::diagonal, py::arg("n"))
      .def_property_readonly("family", &DriftFunction::family)
      .def("to_dict", [](const DriftFunction& f) { return to_py(io::to_json(f)); })
      .def("__eq__", [](const DriftFunction& a, const DriftFunction& b) { return a == b; })
      .def("__repr__", [](const DriftFunction& f) { return "DriftFunction(" + io::to_json(f).dump() + ")"; });

  py::class_<ScanSettings>(m, "ScanSettings")
      .def(py::init([](std::int64_t n_lo, std::int64_t n_hi, double margin, int samples, int dense) {
             ScanSettings s;
             s.n_lo = n_lo;
             s.n_hi = n_hi;
             s.margin = margin;
             s.samples_per_octave = samples;
             s.dense_octaves = dense;
             return s;
           }),
           py::arg("n_lo") = ScanSettings{}.n_lo, py::arg("n_hi") = ScanSettings{}.n_hi,
           py::arg("margin") = ScanSettings{}.margin, py::arg("samples_per_octave") = ScanSettings{}.samples_per_octave,
           py::arg("dense_octaves") = ScanSettings{}.dense_octaves)
      .def_readwrite("n_lo", &ScanSettings::n_lo)
      .def_readwrite("n_hi", &ScanSettings::n_hi)
      .def_readwrite("margin", &ScanSettings::margin)
      .def_readwrite("samples_per_octave", &ScanSettings::samples_per_octave)
      .def_readwrite("dense_octaves", &ScanSettings::dense_octaves);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("label", &Verdict::label)
      .def_property_readonly("criterion", [](const Verdict& v) { return to_string(v.criterion); })
      .def_readonly("witness_c", &Verdict::witness_c)
      .def_readonly("witness_n0", &Verdict::witness_n0)
      .def_readonly("valid_from", &Verdict::valid_from)
      .def_readonly("notes", &Verdict::notes)
      .def("to_dict", [](const Verdict& v) { return to_py(io::to_json(v)); })
      .def("__repr__", [](const Verdict& v) { return "Verdict(" + to_string(v.label) + ")"; });

  py::class_<ChainSpec>(m, "ChainSpec")
      .def_static("constant", &ChainSpec::constant, py::arg("birth"), py::arg("death"))
      .def_static(
          "from_ratio",
          [](std::function<double(std::int64_t)> ratio, double birth0) { return ChainSpec::from_ratio(ratio, birth0); },
          py::arg("ratio"), py::arg("birth0") = 0.5, "lambda_n / mu_n = ratio(n) with lambda_n + mu_n = 1")
      .def_static("diagonal", &ChainSpec::diagonal, py::arg("drift"), py::arg("valid_from") = 1)
      .def_static("tabulated", &ChainSpec::tabulated, py::arg("birth"), py::arg("death"))
      .def("birth", &ChainSpec::birth, py::arg("n"))
      .def("death", &ChainSpec::death, py::arg("n"))
      .def("__repr__", [](const ChainSpec& c) { return "ChainSpec(" + c.description() + ")"; });

  m.def("classify_diagonal", &classify_diagonal, py::arg("drift"), py::arg("scan") = ScanSettings{},
        py::call_guard<py::gil_scoped_release>());
  m.def("classify_ratio", &classify_ratio, py::arg("chain"), py::arg("scan") = ScanSettings{});
  m.def("classify_series", &classify_series, py::arg("chain"), py::arg("n_terms"), py::arg("scan") = ScanSettings{});

  m.def(
      "hit_probability",
      [](const ChainSpec& chain, std::int64_t start, std::int64_t lower, std::int64_t upper) {
        return hit_probability(chain, {start, lower, upper});
      },
      py::arg("chain"), py::arg("start"), py::arg("lower"), py::arg("upper"),
      "P(reach upper before lower | start)");
  m.def(
      "stationary",
      [](const ChainSpec& chain, std::int64_t n) {
        const auto d = stationary(chain, n);
        return to_py(io::to_json(d, balance_residuals(d, chain)));
      },
      py::arg("chain"), py::arg("n_trunc"));
  m.def(
      "expected_returns",
      [](const ChainSpec& chain, std::int64_t level) { return to_py(io::to_json(expected_returns(chain, level))); },
      py::arg("chain"), py::arg("level"));

  m.def(
      "simulate",
      [](const DriftFunction& drift, std::int64_t replicas, std::int64_t horizon, std::uint64_t seed,
         std::int64_t escape_level, const std::string& mode, const std::string& timing, std::int64_t start_state,
         std::int64_t start_time, bool stop_at_escape, bool stop_at_return, std::vector<double> sample_times,
         unsigned threads, bool per_replica) {
        WalkConfig cfg;
        cfg.drift = drift;
        cfg.horizon = horizon;
        cfg.seed = seed;
        if (mode != "discrete" && mode != "continuous") throw ConfigError("mode", "mode: discrete or continuous");
        if (timing != "frozen" && timing != "at_event") throw ConfigError("timing", "timing: frozen or at_event");
        cfg.mode = mode == "discrete" ? Mode::Discrete : Mode::ContinuousEmbedding;
        cfg.timing = timing == "frozen" ? RateTiming::Frozen : RateTiming::AtEvent;
        cfg.start_state = start_state;
        cfg.start_time = start_time;
        cfg.stop_at_escape = stop_at_escape;
        cfg.stop_at_return = stop_at_return;
        cfg.sample_times = std::move(sample_times);
        McSettings mc;
        mc.horizon = horizon;
        mc.escape_level = escape_level;
        EnsembleStats e;
        {
          py::gil_scoped_release release;
          e = run_ensemble(cfg, replicas, mc.resolved_escape_level(), threads);
        }
        return to_py(io::to_json(e, per_replica));
      },
      py::arg("drift"), py::arg("replicas"), py::arg("horizon") = 1000, py::arg("seed") = 0,
      py::arg("escape_level") = 0, py::arg("mode") = "discrete", py::arg("timing") = "frozen",
      py::arg("start_state") = 0, py::arg("start_time") = 1, py::arg("stop_at_escape") = false,
      py::arg("stop_at_return") = false, py::arg("sample_times") = std::vector<double>{}, py::arg("threads") = 0,
      py::arg("per_replica") = false, "Monte Carlo ensemble; escape_level 0 means floor(sqrt(horizon))");

  m.def(
      "parse_config", [](const py::object& config) { return to_py(io::to_json(config_from_json(from_py(config)))); },
      py::arg("config"), "Validated config with defaults filled in");
  m.def(
      "sweep",
      [](const py::object& config) {
        const auto spec = config_from_json(from_py(config));
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = phase_sweep(spec);
        }
        return sweep_output("sweep", spec, r);
      },
      py::arg("config") = py::dict(), "Parameter sweep; the output embeds a manifest that re-runs it");
  m.def(
      "example_config", [](int id) { return to_py(io::to_json(example_spec(id))); }, py::arg("id"),
      "Config of a worked example, without running it");
  m.def(
      "example",
      [](int id) {
        const auto spec = example_spec(id);
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = phase_sweep(spec);
        }
        return sweep_output("example", spec, r);
      },
      py::arg("id"));
}
