#include "bdwalk/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bdwalk/errors.hpp"
#include "bdwalk/numeric.hpp"

namespace bdwalk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative slack on the recurrent "r(n) <= 1" branch so chains with exactly
// lambda/mu = 1 + 1/n are not lost to the last bit of rounding.
constexpr double kRoundingAllowance = 1e-9;

struct Scan {
  std::vector<OctaveStat> octaves;
  std::vector<std::int64_t> last_invalid;  // per octave, -1 when clean
};

void check_settings(const ScanSettings& s) {
  if (s.n_lo < 1 || s.n_hi <= s.n_lo) {
    throw std::invalid_argument("scan: need 1 <= n_lo < n_hi");
  }
  if (!(s.margin > 0)) throw std::invalid_argument("scan: margin must be > 0");
  if (s.samples_per_octave < 2) throw std::invalid_argument("scan: samples_per_octave must be >= 2");
  if (s.dense_octaves < 1) throw std::invalid_argument("scan: dense_octaves must be >= 1");
}

std::int64_t dense_start(const ScanSettings& s) {
  return std::max<std::int64_t>(s.n_lo, s.n_hi >> s.dense_octaves);
}

// Evaluates `stat` over [n_lo, n_hi] split into octaves. NaN marks an
// invalid point.
template <class Stat>
Scan scan(Stat&& stat, const ScanSettings& s) {
  Scan out;
  const std::int64_t dense_from = dense_start(s);
  for (std::int64_t begin = s.n_lo; begin <= s.n_hi; begin *= 2) {
    const std::int64_t end = std::min(2 * begin - 1, s.n_hi);
    OctaveStat o{begin, end, kInf, -kInf, 0};
    std::int64_t bad = -1;
    auto visit = [&](std::int64_t n) {
      const double v = stat(n);
      if (std::isnan(v)) {
        bad = std::max(bad, n);
        return;
      }
      o.min = std::min(o.min, v);
      o.max = std::max(o.max, v);
      ++o.samples;
    };
    if (end >= dense_from || end - begin + 1 <= s.samples_per_octave) {
      for (std::int64_t n = begin; n <= end; ++n) visit(n);
    } else {
      const double span = static_cast<double>(end - begin);
      std::int64_t previous = -1;
      for (int i = 0; i < s.samples_per_octave; ++i) {
        const auto n = begin + static_cast<std::int64_t>(
                                   std::llround(span * i / (s.samples_per_octave - 1)));
        if (n != previous) visit(n);
        previous = n;
      }
    }
    out.octaves.push_back(o);
    out.last_invalid.push_back(bad);
    if (end == s.n_hi) break;
  }
  return out;
}

struct Thresholds {
  double recurrent_max;  // tail sup must not exceed this
  double transient_min;  // tail inf must reach this
};

// Picks the widest tail (smallest octave start n0 <= n_hi / 4) satisfying
// either inequality.
Verdict decide(Scan&& sc, const ScanSettings& s, const Thresholds& th, Criterion criterion) {
  Verdict v;
  v.criterion = criterion;
  const std::int64_t dense_from = dense_start(s);
  const std::size_t k = sc.octaves.size();

  std::int64_t last_bad = -1;
  for (auto b : sc.last_invalid) last_bad = std::max(last_bad, b);
  v.valid_from = std::max<std::int64_t>(s.n_lo, last_bad + 1);

  // suffix extremes
  std::vector<double> suf_max(k + 1, -kInf), suf_min(k + 1, kInf);
  std::vector<bool> suf_clean(k + 1, true);
  for (std::size_t j = k; j-- > 0;) {
    suf_max[j] = std::max(suf_max[j + 1], sc.octaves[j].max);
    suf_min[j] = std::min(suf_min[j + 1], sc.octaves[j].min);
    suf_clean[j] = suf_clean[j + 1] && sc.last_invalid[j] < 0 && sc.octaves[j].samples > 0;
  }

  for (std::size_t j = 0; j < k; ++j) {
    const auto& o = sc.octaves[j];
    if (o.n_begin > dense_from) break;
    if (!suf_clean[j]) continue;
    if (suf_max[j] <= th.recurrent_max) {
      v.label = Label::Recurrent;
      v.witness_c = suf_max[j];
      v.witness_n0 = o.n_begin;
      break;
    }
    if (suf_min[j] >= th.transient_min) {
      v.label = Label::Transient;
      v.witness_c = suf_min[j];
      v.witness_n0 = o.n_begin;
      break;
    }
  }
  if (v.label == Label::Inconclusive) {
    std::ostringstream note;
    note.precision(6);
    note << "no tail cleared the thresholds (recurrent <= " << th.recurrent_max
         << ", transient >= " << th.transient_min << ")";
    v.notes.push_back(note.str());
  }
  if (last_bad >= 0) {
    v.notes.push_back("statistic undefined up to n=" + std::to_string(last_bad) +
                      "; scan starts at n=" + std::to_string(v.valid_from));
  }
  v.stats = std::move(sc.octaves);
  return v;
}

// Prefix log products L[0] = 0, L[n] = sum_{k=1}^{n} log(mu_k / lambda_k).
std::vector<double> log_products(const ChainSpec& chain, std::int64_t n_max) {
  std::vector<double> L(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (std::int64_t n = 1; n <= n_max; ++n) {
    L[static_cast<std::size_t>(n)] = L[static_cast<std::size_t>(n - 1)] + chain.log_ratio(n);
  }
  return L;
}

}  // namespace

std::string to_string(Label label) {
  switch (label) {
    case Label::Recurrent:
      return "Recurrent";
    case Label::Transient:
      return "Transient";
    case Label::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::Diagonal:
      return "diagonal";
    case Criterion::Ratio:
      return "ratio";
    case Criterion::Series:
      return "series";
  }
  return "diagonal";
}

Label label_from_string(const std::string& s) {
  if (s == "Recurrent") return Label::Recurrent;
  if (s == "Transient") return Label::Transient;
  if (s == "Inconclusive") return Label::Inconclusive;
  throw std::invalid_argument("unknown label '" + s + "'");
}

Verdict classify_diagonal(const DriftFunction& f, const ScanSettings& settings) {
  check_settings(settings);
  auto sc = scan(
      [&f](std::int64_t n) {
        const double x = static_cast<double>(n);
        const double phi = f.try_evaluate(n, x * x);
        return 4.0 * x * phi;
      },
      settings);

  const std::int64_t dense_from = dense_start(settings);
  for (std::size_t j = 0; j < sc.octaves.size(); ++j) {
    if (sc.last_invalid[j] >= dense_from) {
      // reproduce the evaluation error for the caller
      f.diagonal(sc.last_invalid[j]);
    }
  }
  return decide(std::move(sc), settings,
                {1.0 - settings.margin, 1.0 + settings.margin}, Criterion::Diagonal);
}

Verdict classify_ratio(const ChainSpec& chain, const ScanSettings& settings) {
  check_settings(settings);
  auto sc = scan(
      [&chain](std::int64_t n) {
        const double lam = chain.birth(n);
        const double mu = chain.death(n);
        if (!(lam > 0) || !(mu > 0) || !std::isfinite(lam) || !std::isfinite(mu)) {
          chain.log_ratio(n);  // throws InvalidChain with the offending rates
        }
        return static_cast<double>(n) * (lam / mu - 1.0);
      },
      settings);
  return decide(std::move(sc), settings, {1.0 + kRoundingAllowance, 1.0 + settings.margin},
                Criterion::Ratio);
}

double PartialSums::sum(std::size_t m) const {
  if (m < 1 || m > log_sums.size()) throw std::out_of_range("PartialSums::sum");
  return std::exp(log_sums[m - 1]);
}

PartialSums karlin_mcgregor_partial_sums(const ChainSpec& chain, std::int64_t n_terms) {
  if (n_terms < 1) throw std::invalid_argument("karlin_mcgregor_partial_sums: N must be >= 1");
  PartialSums ps;
  ps.log_terms.reserve(static_cast<std::size_t>(n_terms));
  ps.log_sums.reserve(static_cast<std::size_t>(n_terms));
  double log_term = 0.0;
  double log_sum = -kInf;
  for (std::int64_t n = 1; n <= n_terms; ++n) {
    log_term += chain.log_ratio(n);
    log_sum = log_add(log_sum, log_term);
    ps.log_terms.push_back(log_term);
    ps.log_sums.push_back(log_sum);
  }
  return ps;
}

double raabe_statistic(const ChainSpec& chain, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("raabe_statistic: n must be >= 1");
  double log_a = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) log_a += chain.log_ratio(k);
  const double log_next = log_a + chain.log_ratio(n + 1);
  return static_cast<double>(n) * std::expm1(log_a - log_next);
}

Verdict classify_series(const ChainSpec& chain, std::int64_t n_terms, ScanSettings settings) {
  if (n_terms < 100) throw std::invalid_argument("classify_series: N must be >= 100");
  settings.n_hi = n_terms - 1;
  check_settings(settings);

  const auto L = log_products(chain, n_terms);
  auto sc = scan(
      [&L](std::int64_t n) {
        const auto i = static_cast<std::size_t>(n);
        return static_cast<double>(n) * std::expm1(L[i] - L[i + 1]);
      },
      settings);
  Verdict v = decide(std::move(sc), settings, {1.0 + kRoundingAllowance, 1.0 + settings.margin},
                     Criterion::Series);

  // Growth of S over the last two octaves: increments shrink for a convergent
  // series (ratio ~ 2^{1-c} < 1) and do not shrink for a divergent one.
  const auto N = static_cast<std::size_t>(n_terms);
  const std::size_t half = N / 2, quarter = N / 4;
  double log_inc_hi = -kInf, log_inc_lo = -kInf;
  for (std::size_t n = half + 1; n <= N; ++n) log_inc_hi = log_add(log_inc_hi, L[n]);
  for (std::size_t n = quarter + 1; n <= half; ++n) log_inc_lo = log_add(log_inc_lo, L[n]);
  const double octave_ratio = std::exp(log_inc_hi - log_inc_lo);
  {
    std::ostringstream note;
    note.precision(17);
    note << "partial-sum octave growth ratio " << octave_ratio;
    v.notes.push_back(note.str());
  }

  if (v.label == Label::Transient && !(octave_ratio < 1.0)) {
    v.notes.push_back("Raabe indicates convergence but partial sums are not settling");
    v.label = Label::Inconclusive;
  } else if (v.label == Label::Recurrent && !(octave_ratio > std::exp2(-settings.margin))) {
    v.notes.push_back("Raabe indicates divergence but partial sums are settling");
    v.label = Label::Inconclusive;
  }
  if (v.label == Label::Inconclusive) {
    v.witness_c.reset();
    v.witness_n0.reset();
  }
  return v;
}

}  // namespace bdwalk
