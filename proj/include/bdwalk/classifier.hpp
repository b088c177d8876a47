#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdwalk/chain.hpp"
#include "bdwalk/drift.hpp"

namespace bdwalk {

enum class Label { Recurrent, Transient, Inconclusive };

enum class Criterion { Diagonal, Ratio, Series };

std::string to_string(Label label);
std::string to_string(Criterion criterion);
Label label_from_string(const std::string& s);

/// Extremes of a test statistic over one octave [n_begin, n_end] of the scan.
struct OctaveStat {
  std::int64_t n_begin;
  std::int64_t n_end;
  double min;
  double max;
  std::int64_t samples;

  bool operator==(const OctaveStat&) const = default;
};

/// Recurrence verdict with its witness.
///
/// A conclusive label means the test inequality held at every sampled n in
/// [witness_n0, n_hi] with constant witness_c: c < 1 for Recurrent under the
/// diagonal criterion (c <= 1 under the ratio and series criteria, which
/// accept lambda/mu <= 1 + 1/n), c > 1 for Transient.
struct Verdict {
  Label label = Label::Inconclusive;
  Criterion criterion = Criterion::Diagonal;
  std::optional<double> witness_c;
  std::optional<std::int64_t> witness_n0;
  /// First n at which the statistic was computable; points below it lie
  /// outside the drift's asymptotic regime and were skipped.
  std::int64_t valid_from = 1;
  std::vector<OctaveStat> stats;
  std::vector<std::string> notes;

  bool operator==(const Verdict&) const = default;
};

struct ScanSettings {
  std::int64_t n_lo = 16;
  std::int64_t n_hi = std::int64_t{1} << 20;
  double margin = 0.05;
  /// Evenly spaced samples per octave outside the dense tail.
  int samples_per_octave = 64;
  /// Octaves at the top of the range evaluated at every n.
  int dense_octaves = 2;

  bool operator==(const ScanSettings&) const = default;
};

/// Diagonal test: s(n) = 4 n phi(n, n^2). Recurrent if a tail has
/// sup s <= 1 - margin, Transient if a tail has inf s >= 1 + margin.
///
/// Points where phi(n, n^2) falls outside [0, 1/2) are treated as lying
/// before the asymptotic regime and skipped. Throws DomainError when such
/// points reach into the dense tail.
Verdict classify_diagonal(const DriftFunction& f, const ScanSettings& settings = {});

/// Ratio test on r(n) = n (lambda_n / mu_n - 1): Transient if a tail has
/// r >= 1 + margin, Recurrent if a tail has r <= 1.
Verdict classify_ratio(const ChainSpec& chain, const ScanSettings& settings = {});

/// Partial sums S_m = sum_{n=1}^{m} prod_{k=1}^{n} mu_k / lambda_k, m = 1..N,
/// accumulated in log space.
struct PartialSums {
  /// log_terms[m-1] = log prod_{k=1}^{m} mu_k / lambda_k
  std::vector<double> log_terms;
  /// log_sums[m-1] = log S_m
  std::vector<double> log_sums;

  std::size_t size() const noexcept { return log_sums.size(); }
  /// S_m for 1 <= m <= size(); may be +inf for strongly recurrent chains.
  double sum(std::size_t m) const;
};

PartialSums karlin_mcgregor_partial_sums(const ChainSpec& chain, std::int64_t n_terms);

/// Raabe statistic R(n) = n (a_n / a_{n+1} - 1), a_n = prod_{k<=n} mu_k / lambda_k,
/// evaluated from the log products.
double raabe_statistic(const ChainSpec& chain, std::int64_t n);

/// Series criterion: Raabe tail scan over [settings.n_lo, n_terms - 1] combined
/// with the growth of the partial sums over the last two octaves. A conclusive
/// Raabe result is downgraded to Inconclusive when the partial sums disagree.
/// `settings.n_hi` is ignored.
Verdict classify_series(const ChainSpec& chain, std::int64_t n_terms, ScanSettings settings = {});

}  // namespace bdwalk
