#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bdwalk {

/// phi(n, t) = rho * n^alpha / (2 t^beta). The mean increment of the walk is
/// 2 phi = rho n^alpha / t^beta, so rho is the drift coefficient.
struct PowerLaw {
  double rho;
  double alpha;
  double beta;

  bool operator==(const PowerLaw&) const = default;
};

/// phi(n, t) = rho * n^alpha / t^((1 + alpha) / 2). Lies on the curve
/// alpha = 2 beta - 1, where phi(n, n^2) = rho / n.
struct Boundary {
  double rho;
  double alpha;

  bool operator==(const Boundary&) const = default;
};

/// phi(n, t) = exp(alpha n - beta t).
struct Exponential {
  double alpha;
  double beta;

  bool operator==(const Exponential&) const = default;
};

struct Constant {
  double value;

  bool operator==(const Constant&) const = default;
};

enum class TailRule { ConstantExtend, Zero };

/// Rectangular grid of phi values with nearest-lower-point lookup.
/// Queries below the first grid row/column clamp to it; queries beyond the
/// last row/column follow `tail`.
struct Tabulated {
  std::vector<std::int64_t> n_values;  // strictly increasing
  std::vector<double> t_values;        // strictly increasing
  std::vector<double> phi;             // row-major, phi[i * t_values.size() + j]
  TailRule tail = TailRule::ConstantExtend;

  bool operator==(const Tabulated&) const = default;
};

/// An immutable drift function phi(n, t) defining the up-probability
/// 1/2 + phi(n, t) of the walk at state n >= 1 and time t > 0.
///
/// At n = 0 the walk steps up with probability one and phi is never used;
/// `evaluate` returns 0 there for every family.
class DriftFunction {
 public:
  using Variant = std::variant<PowerLaw, Boundary, Exponential, Constant, Tabulated>;

  /// Throws std::invalid_argument on parameters outside the supported
  /// families (negative rho, negative beta, non-positive Exponential beta,
  /// malformed tables).
  explicit DriftFunction(Variant v);

  static DriftFunction power_law(double rho, double alpha, double beta);
  static DriftFunction boundary(double rho, double alpha);
  static DriftFunction exponential(double alpha, double beta);
  static DriftFunction constant(double value);
  static DriftFunction tabulated(Tabulated table);

  /// Reads a table from CSV with header `n,t,phi`. Every (n, t) pair of the
  /// rectangular grid spanned by the distinct n and t values must be present.
  static DriftFunction load_csv(const std::filesystem::path& path,
                                TailRule tail = TailRule::ConstantExtend);

  /// phi(n, t). Throws DomainError when the value is outside [0, 1/2) or t <= 0.
  double evaluate(std::int64_t n, double t) const;

  /// Same as `evaluate` but returns NaN instead of throwing.
  double try_evaluate(std::int64_t n, double t) const noexcept;

  /// The family's formula without range checks.
  double formula(std::int64_t n, double t) const noexcept;

  /// phi(n, n^2).
  double diagonal(std::int64_t n) const;

  const Variant& variant() const noexcept { return v_; }
  std::string family() const;

  /// Built-in parametric families are non-increasing in t by construction.
  bool monotone_by_construction() const noexcept;

  bool operator==(const DriftFunction&) const = default;

 private:
  Variant v_;
};

/// Up- and down-rates induced by a drift: birth = 1/2 + phi, death = 1/2 - phi.
class RateSchedule {
 public:
  explicit RateSchedule(DriftFunction drift) : drift_(std::move(drift)) {}

  double birth(std::int64_t n, double tau) const { return 0.5 + drift_.evaluate(n, tau); }
  double death(std::int64_t n, double tau) const { return 0.5 - drift_.evaluate(n, tau); }

  const DriftFunction& drift() const noexcept { return drift_; }

 private:
  DriftFunction drift_;
};

enum class Invariant { Range, Monotone };

struct Violation {
  std::int64_t n;
  double t;
  double value;
  Invariant which;
};

struct ValidateOptions {
  /// Only sample (n, t) with n <= t, the region where the walk lives.
  bool wedge_only = false;
  /// With wedge_only, sample t >= n + wedge_offset. A walk started at
  /// (0, 1) stays in t >= n + 1.
  std::int64_t wedge_offset = 0;
};

/// Samples n in 1..n_max and t on a ratio-2 geometric grid up to t_max and
/// reports every range or monotonicity violation found. Empty means valid.
std::vector<Violation> validate(const DriftFunction& f, std::int64_t n_max, double t_max,
                                ValidateOptions options = {});

std::string to_string(Invariant inv);

}  // namespace bdwalk
