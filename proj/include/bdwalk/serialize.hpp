#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdwalk/classifier.hpp"
#include "bdwalk/drift.hpp"
#include "bdwalk/experiments.hpp"
#include "bdwalk/oracle.hpp"
#include "bdwalk/simulator.hpp"

namespace bdwalk::io {

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips, independent of the global locale.
/// NaN and infinities print as nan, inf and -inf.
std::string format_number(double x);

Json to_json(const DriftFunction& f);
/// Inverse of to_json(DriftFunction). Tabulated drifts are not accepted.
DriftFunction drift_from_json(const Json& j);

Json to_json(const ScanSettings& s);
Json to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);
Json to_json(const StationaryDistribution& d, const BalanceResidual& residual);
Json to_json(const ReturnEstimate& e);
Json to_json(const Estimate& e);
Json to_json(const McSettings& m);
Json to_json(const TrajectoryStats& s);
/// Summary plus, when `per_replica`, one object per replica.
Json to_json(const EnsembleStats& e, bool per_replica = false);
Json to_json(const McSummary& m);
Json to_json(const VanishingReport& r);
/// The configuration schema read by load_config.
Json to_json(const ExperimentSpec& spec);
/// Runtime fields only with `timing`, so identical runs give identical text.
Json to_json(const SweepResult& r, bool timing = false);
Json to_json(const EvidenceReport& r);

/// {"tool", "version", "command", "seed", "config"}. Feeding the output back
/// as a config re-runs the same computation.
Json manifest(const std::string& command, std::uint64_t seed, const Json& config);

/// alpha,beta,rho,label,c,n0,mc_return_freq,mc_se; one row per grid point.
void write_sweep_csv(std::ostream& out, const SweepResult& r);
/// One row per replica followed by a summary row.
void write_ensemble_csv(std::ostream& out, const EnsembleStats& e);
/// t,state
void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path);
/// gnuplot data: one block per beta with columns alpha beta code (1
/// recurrent, -1 transient, 0 inconclusive, nan invalid), then the boundary
/// curves alpha = 2 beta - 1 and alpha = beta as separate indexed blocks.
void write_phase_data(std::ostream& out, const SweepResult& r);

}  // namespace bdwalk::io
