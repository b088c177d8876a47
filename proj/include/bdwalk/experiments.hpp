#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdwalk/classifier.hpp"
#include "bdwalk/drift.hpp"
#include "bdwalk/simulator.hpp"

namespace bdwalk {

/// Monte Carlo settings shared by sweeps and the simulate command.
struct McSettings {
  /// 0 skips Monte Carlo evidence in sweeps.
  std::int64_t replicas = 0;
  std::int64_t horizon = 100000;
  /// 0 picks floor(sqrt(horizon)).
  std::int64_t escape_level = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Discrete;
  RateTiming timing = RateTiming::Frozen;
  std::int64_t start_state = 0;
  std::int64_t start_time = 1;
  bool stop_at_escape = false;
  bool stop_at_return = false;
  std::vector<double> sample_times;
  /// 0 = hardware concurrency. Never changes results.
  unsigned threads = 0;

  std::int64_t resolved_escape_level() const;
  bool operator==(const McSettings&) const = default;
};

/// Families a sweep can range over. Unused axes are NaN.
enum class Family { PowerLaw, Boundary, Exponential, Constant };

std::string to_string(Family f);
Family family_from_string(const std::string& s);
/// Which of (rho, alpha, beta) the family reads.
struct FamilyAxes {
  bool rho, alpha, beta;
};
FamilyAxes axes_of(Family f);

struct GridPoint {
  double rho;
  double alpha;
  double beta;
};

DriftFunction make_drift(Family family, const GridPoint& p);

struct ExperimentSpec {
  std::string name = "sweep";
  Family family = Family::PowerLaw;
  std::vector<double> rho{0.25};
  std::vector<double> alpha{1.0};
  std::vector<double> beta{1.0};
  /// Keep only grid points with beta > alpha.
  bool beta_above_alpha = false;
  /// Points this close to a region boundary may come out Inconclusive.
  double band = 0.05;
  ScanSettings scan;
  McSettings mc;
  /// Level b of the exact escape probability on the diagonal chain.
  std::int64_t oracle_level = 1 << 14;
  /// Any of json, csv, phase.
  std::vector<std::string> outputs{"json"};
  /// 1..4 when built by example_spec, 0 otherwise.
  int example = 0;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Every problem found, each as "field: message".
std::vector<std::string> spec_violations(const ExperimentSpec& spec);

/// Throws std::invalid_argument listing every violation.
void validate_spec(const ExperimentSpec& spec);

/// Grid points in (rho, alpha, beta) order, filtered by beta_above_alpha.
/// The boundary family derives beta = (1 + alpha) / 2.
std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

/// Label implied by the asymptotics of the diagonal statistic; empty on a
/// critical point.
std::optional<Label> expected_label(Family family, const GridPoint& p);

/// Whether p lies within `band` of a region boundary (or of the critical
/// rho on a boundary curve).
bool near_boundary(Family family, const GridPoint& p, double band, double margin);

struct McSummary {
  std::int64_t replicas = 0;
  std::int64_t horizon = 0;
  std::int64_t escape_level = 0;
  std::uint64_t seed = 0;
  Estimate return_frequency;
  /// Same, counting only returns by horizon / 16.
  Estimate early_return_frequency;
  Estimate escape_frequency;
  /// Escape frequency at a quarter of the escape level.
  Estimate quarter_escape_frequency;
  Estimate mean_returns;

  bool operator==(const McSummary&) const = default;
};

struct OracleCheck {
  Label ratio_label = Label::Inconclusive;
  std::int64_t level = 0;
  double escape = 0.0;
  bool infinite_returns = false;
  bool agrees = true;

  bool operator==(const OracleCheck&) const = default;
};

struct SweepRecord {
  std::size_t index = 0;
  GridPoint point{};
  std::optional<Verdict> verdict;
  std::optional<Label> expected;
  bool near_boundary = false;
  /// Expected label matched, or no expectation, or an Inconclusive inside
  /// the boundary band.
  bool consistent = true;
  /// The drift leaves [0, 1/2) on the diagonal tail; no verdict.
  bool invalid_model = false;
  std::optional<McSummary> mc;
  std::optional<OracleCheck> oracle;
  std::vector<std::string> annotations;
  std::string error;
  std::uint64_t seed = 0;
  /// Wall-clock seconds. Excluded from equality and, by default, from output.
  double runtime = 0.0;

  bool same_results(const SweepRecord& other) const;
};

struct SweepResult {
  ExperimentSpec spec;
  std::vector<SweepRecord> records;
  double runtime = 0.0;

  std::size_t inconsistent() const;
  bool same_results(const SweepResult& other) const;
};

/// Classifies every grid point and, when requested, attaches Monte Carlo
/// and oracle evidence. Per-point errors are recorded and the sweep goes on.
SweepResult phase_sweep(const ExperimentSpec& spec);

/// Defaults for the four worked examples.
ExperimentSpec example_spec(int id);

struct ExampleOverrides {
  std::optional<std::vector<double>> rho, alpha, beta;
  std::optional<ScanSettings> scan;
  std::optional<McSettings> mc;
};

SweepResult run_example(int id, const ExampleOverrides& overrides = {});

struct EvidenceEntry {
  std::size_t index = 0;
  Label label = Label::Inconclusive;
  /// "consistent with ...", "inconclusive", or "no Monte Carlo evidence".
  std::string statement;
  /// Distance of the return frequency from the symmetric reference, in
  /// combined standard errors (negative: fewer returns).
  std::optional<double> z_vs_symmetric;
  bool conflict = false;
  std::string detail;
};

struct EvidenceReport {
  std::optional<McSummary> symmetric_reference;
  std::vector<EvidenceEntry> entries;

  std::size_t conflicts() const;
};

/// Compares Monte Carlo evidence with each conclusive verdict. A Transient
/// point conflicts when its return frequency exceeds the symmetric walk's
/// by more than `sigmas` combined standard errors.
EvidenceReport evidence_report(const SweepResult& sweep, double sigmas = 5.0);

/// Runs the ensemble behind one sweep point.
/// The walk described by `mc` under drift `f`, seeded with `seed`.
WalkConfig walk_config(const DriftFunction& f, const McSettings& mc, std::uint64_t seed);

McSummary monte_carlo(const DriftFunction& f, const McSettings& mc, std::uint64_t seed,
                      unsigned threads);

}  // namespace bdwalk
