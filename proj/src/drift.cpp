#include "bdwalk/drift.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bdwalk/errors.hpp"

namespace bdwalk {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// pow with exact shortcuts for the exponents that dominate the examples
inline double power(double x, double e) {
  if (e == 1.0) return x;
  if (e == 0.0) return 1.0;
  if (e == 0.5) return std::sqrt(x);
  if (e == -1.0) return 1.0 / x;
  return std::pow(x, e);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_params(const DriftFunction::Variant& v) {
  std::visit(
      Overloaded{
          [](const PowerLaw& p) {
            require(std::isfinite(p.rho) && p.rho >= 0, "power_law: rho must be >= 0");
            require(std::isfinite(p.alpha), "power_law: alpha must be finite");
            require(std::isfinite(p.beta) && p.beta >= 0, "power_law: beta must be >= 0");
          },
          [](const Boundary& b) {
            require(std::isfinite(b.rho) && b.rho >= 0, "boundary: rho must be >= 0");
            require(std::isfinite(b.alpha) && b.alpha >= -1,
                    "boundary: alpha must be >= -1 so the time exponent is >= 0");
          },
          [](const Exponential& e) {
            require(std::isfinite(e.alpha), "exponential: alpha must be finite");
            require(std::isfinite(e.beta) && e.beta > 0, "exponential: beta must be > 0");
          },
          [](const Constant& c) {
            require(std::isfinite(c.value), "constant: value must be finite");
          },
          [](const Tabulated& t) {
            require(!t.n_values.empty() && !t.t_values.empty(), "tabulated: empty grid");
            require(t.phi.size() == t.n_values.size() * t.t_values.size(),
                    "tabulated: phi size does not match grid");
            require(std::adjacent_find(t.n_values.begin(), t.n_values.end(),
                                       std::greater_equal<>()) == t.n_values.end(),
                    "tabulated: n values must be strictly increasing");
            require(std::adjacent_find(t.t_values.begin(), t.t_values.end(),
                                       std::greater_equal<>()) == t.t_values.end(),
                    "tabulated: t values must be strictly increasing");
          },
      },
      v);
}

double lookup(const Tabulated& tab, std::int64_t n, double t) {
  const bool beyond_n = n > tab.n_values.back();
  const bool beyond_t = t > tab.t_values.back();
  if ((beyond_n || beyond_t) && tab.tail == TailRule::Zero) return 0.0;

  auto ni = std::upper_bound(tab.n_values.begin(), tab.n_values.end(), n);
  auto ti = std::upper_bound(tab.t_values.begin(), tab.t_values.end(), t);
  const std::size_t i = ni == tab.n_values.begin() ? 0 : (ni - tab.n_values.begin()) - 1;
  const std::size_t j = ti == tab.t_values.begin() ? 0 : (ti - tab.t_values.begin()) - 1;
  return tab.phi[i * tab.t_values.size() + j];
}

template <class T>
T parse_number(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::invalid_argument("drift csv: bad number '" + std::string(field) + "' on line " +
                                std::to_string(line));
  }
  return value;
}

}  // namespace

DriftFunction::DriftFunction(Variant v) : v_(std::move(v)) { check_params(v_); }

DriftFunction DriftFunction::power_law(double rho, double alpha, double beta) {
  return DriftFunction(PowerLaw{rho, alpha, beta});
}
DriftFunction DriftFunction::boundary(double rho, double alpha) {
  return DriftFunction(Boundary{rho, alpha});
}
DriftFunction DriftFunction::exponential(double alpha, double beta) {
  return DriftFunction(Exponential{alpha, beta});
}
DriftFunction DriftFunction::constant(double value) { return DriftFunction(Constant{value}); }
DriftFunction DriftFunction::tabulated(Tabulated table) { return DriftFunction(std::move(table)); }

DriftFunction DriftFunction::load_csv(const std::filesystem::path& path, TailRule tail) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("drift csv: cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::map<std::pair<std::int64_t, double>, double> cells;
  std::set<std::int64_t> ns;
  std::set<double> ts;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    if (line_no == 1 && line.rfind("n,", 0) == 0) continue;  // header
    std::string_view view(line);
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw std::invalid_argument("drift csv: expected n,t,phi on line " + std::to_string(line_no));
    }
    const auto n = parse_number<std::int64_t>(view.substr(0, c1), line_no);
    const auto t = parse_number<double>(view.substr(c1 + 1, c2 - c1 - 1), line_no);
    const auto phi = parse_number<double>(view.substr(c2 + 1), line_no);
    if (!cells.emplace(std::pair{n, t}, phi).second) {
      throw std::invalid_argument("drift csv: duplicate cell on line " + std::to_string(line_no));
    }
    ns.insert(n);
    ts.insert(t);
  }

  Tabulated tab;
  tab.n_values.assign(ns.begin(), ns.end());
  tab.t_values.assign(ts.begin(), ts.end());
  tab.tail = tail;
  tab.phi.reserve(ns.size() * ts.size());
  for (auto n : tab.n_values) {
    for (auto t : tab.t_values) {
      auto it = cells.find({n, t});
      if (it == cells.end()) {
        std::ostringstream msg;
        msg << "drift csv: grid is not rectangular, missing (n=" << n << ", t=" << t << ")";
        throw std::invalid_argument(msg.str());
      }
      tab.phi.push_back(it->second);
    }
  }
  return DriftFunction(std::move(tab));
}

double DriftFunction::formula(std::int64_t n, double t) const noexcept {
  if (n == 0) return 0.0;
  const double x = static_cast<double>(n);
  return std::visit(
      Overloaded{
          [&](const PowerLaw& p) { return p.rho * power(x, p.alpha) / (2.0 * power(t, p.beta)); },
          [&](const Boundary& b) {
            return b.rho * power(x, b.alpha) / power(t, 0.5 * (1.0 + b.alpha));
          },
          [&](const Exponential& e) { return std::exp(e.alpha * x - e.beta * t); },
          [&](const Constant& c) { return c.value; },
          [&](const Tabulated& tab) { return lookup(tab, n, t); },
      },
      v_);
}

double DriftFunction::try_evaluate(std::int64_t n, double t) const noexcept {
  if (n < 0 || !(t > 0)) return std::numeric_limits<double>::quiet_NaN();
  const double phi = formula(n, t);
  if (!(phi >= 0.0 && phi < 0.5)) return std::numeric_limits<double>::quiet_NaN();
  return phi;
}

double DriftFunction::evaluate(std::int64_t n, double t) const {
  const double phi = try_evaluate(n, t);
  if (std::isnan(phi)) {
    std::ostringstream msg;
    msg.precision(17);
    if (n < 0 || !(t > 0)) {
      msg << family() << ": (n=" << n << ", t=" << t << ") outside the domain n >= 0, t > 0";
    } else {
      msg << family() << ": phi(" << n << ", " << t << ") = " << formula(n, t)
          << " outside [0, 1/2)";
    }
    throw DomainError(msg.str());
  }
  return phi;
}

double DriftFunction::diagonal(std::int64_t n) const {
  const double x = static_cast<double>(n);
  return evaluate(n, x * x);
}

std::string DriftFunction::family() const {
  return std::visit(Overloaded{
                        [](const PowerLaw&) { return std::string("power_law"); },
                        [](const Boundary&) { return std::string("boundary"); },
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Constant&) { return std::string("constant"); },
                        [](const Tabulated&) { return std::string("tabulated"); },
                    },
                    v_);
}

bool DriftFunction::monotone_by_construction() const noexcept {
  return !std::holds_alternative<Tabulated>(v_);
}

std::vector<Violation> validate(const DriftFunction& f, std::int64_t n_max, double t_max,
                                ValidateOptions options) {
  if (n_max < 1 || !(t_max >= 1)) throw std::invalid_argument("validate: need n_max >= 1, t_max >= 1");

  std::vector<double> grid;
  for (double t = 1.0; t < t_max; t *= 2.0) grid.push_back(t);
  grid.push_back(t_max);

  std::vector<Violation> out;
  std::vector<double> ts;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    ts.clear();
    const double x = static_cast<double>(n + options.wedge_offset);
    for (double t : grid) {
      if (!options.wedge_only || t >= x) ts.push_back(t);
    }
    // the wedge edge is where the walk's drift is largest
    if (options.wedge_only && x <= t_max) {
      ts.insert(std::lower_bound(ts.begin(), ts.end(), x), x);
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }

    double previous = std::numeric_limits<double>::quiet_NaN();
    for (double t : ts) {
      const double phi = f.try_evaluate(n, t);
      if (std::isnan(phi)) {
        out.push_back({n, t, f.formula(n, t), Invariant::Range});
      } else if (!std::isnan(previous) && phi > previous) {
        out.push_back({n, t, phi, Invariant::Monotone});
      }
      previous = phi;
    }
  }
  return out;
}

std::string to_string(Invariant inv) {
  switch (inv) {
    case Invariant::Range:
      return "range";
    case Invariant::Monotone:
      return "monotone";
  }
  return "unknown";
}

}  // namespace bdwalk
