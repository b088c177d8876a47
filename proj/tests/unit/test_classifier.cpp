#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "bdwalk/classifier.hpp"
#include "bdwalk/errors.hpp"

using namespace bdwalk;

namespace {

ChainSpec ratio_chain(double c) {
  return ChainSpec::from_ratio([c](std::int64_t n) { return 1.0 + c / static_cast<double>(n); });
}

// 1 + c / max(n, 4): positive for c > -4
ChainSpec shifted_chain(double c) {
  return ChainSpec::from_ratio(
      [c](std::int64_t n) { return 1.0 + c / static_cast<double>(std::max<std::int64_t>(n, 4)); });
}

ScanSettings quick() {
  ScanSettings s;
  s.n_hi = 1 << 16;
  return s;
}

}  // namespace

TEST_CASE("classify_diagonal: worked examples") {
  SUBCASE("linear drift below threshold") {
    auto v = classify_diagonal(DriftFunction::power_law(0.25, 1, 1));
    CHECK(v.label == Label::Recurrent);
    REQUIRE(v.witness_c);
    CHECK(*v.witness_c == doctest::Approx(0.5));
    CHECK(*v.witness_c < 1.0);
    CHECK(v.witness_n0 == 16);
  }
  SUBCASE("linear drift above threshold") {
    auto v = classify_diagonal(DriftFunction::power_law(0.75, 1, 1));
    CHECK(v.label == Label::Transient);
    CHECK(*v.witness_c == doctest::Approx(1.5));
  }
  SUBCASE("boundary family above 1/4") {
    CHECK(classify_diagonal(DriftFunction::boundary(0.3, 0)).label == Label::Transient);
    CHECK(classify_diagonal(DriftFunction::boundary(0.2, 0)).label == Label::Recurrent);
  }
  SUBCASE("exponential") {
    auto v = classify_diagonal(DriftFunction::exponential(1, 1));
    CHECK(v.label == Label::Recurrent);
    CHECK(*v.witness_c < 1e-100);
  }
  SUBCASE("symmetric walk") {
    auto v = classify_diagonal(DriftFunction::constant(0));
    CHECK(v.label == Label::Recurrent);
    CHECK(*v.witness_c == 0.0);
  }
  SUBCASE("critical drift is inconclusive") {
    auto v = classify_diagonal(DriftFunction::power_law(0.5, 1, 1));
    CHECK(v.label == Label::Inconclusive);
    CHECK_FALSE(v.witness_c);
    CHECK_FALSE(v.notes.empty());
  }
  SUBCASE("inside the margin band is inconclusive") {
    CHECK(classify_diagonal(DriftFunction::power_law(0.49, 1, 1)).label == Label::Inconclusive);
    CHECK(classify_diagonal(DriftFunction::power_law(0.52, 1, 1)).label == Label::Inconclusive);
  }
}

TEST_CASE("classify_diagonal: non-asymptotic prefix is skipped") {
  // exp(2n - 0.1 n^2) >= 1/2 up to n = 20
  auto v = classify_diagonal(DriftFunction::exponential(2, 0.1));
  CHECK(v.label == Label::Recurrent);
  CHECK(v.valid_from == 21);
  CHECK(*v.witness_n0 == 32);
}

TEST_CASE("classify_diagonal: invalid tail raises DomainError") {
  CHECK_THROWS_AS(classify_diagonal(DriftFunction::constant(0.6)), DomainError);
  CHECK_THROWS_AS(classify_diagonal(DriftFunction::power_law(1.2, 0, 0)), DomainError);
}

TEST_CASE("classify_diagonal: settings are validated") {
  ScanSettings s;
  s.n_lo = 100;
  s.n_hi = 50;
  CHECK_THROWS_AS(classify_diagonal(DriftFunction::constant(0), s), std::invalid_argument);
  s = {};
  s.margin = 0;
  CHECK_THROWS_AS(classify_diagonal(DriftFunction::constant(0), s), std::invalid_argument);
}

TEST_CASE("classify_ratio: worked examples") {
  CHECK(classify_ratio(ratio_chain(2.0)).label == Label::Transient);
  CHECK(classify_ratio(ChainSpec::constant(0.5, 0.5)).label == Label::Recurrent);
  auto v = classify_ratio(ratio_chain(1.0));
  CHECK(v.label == Label::Recurrent);
  CHECK(*v.witness_c <= 1.0 + 1e-9);
  CHECK(classify_ratio(ratio_chain(1.02)).label == Label::Inconclusive);
}

TEST_CASE("classify_ratio: non-positive rates") {
  auto bad = ChainSpec::tabulated({0.5, 0.5}, {0.0, 0.5, 0.0});
  CHECK_THROWS_AS(classify_ratio(bad), InvalidChain);
}

TEST_CASE("karlin_mcgregor_partial_sums: closed forms") {
  SUBCASE("equal rates give S_m = m") {
    auto ps = karlin_mcgregor_partial_sums(ChainSpec::constant(0.3, 0.3), 1000);
    for (std::size_t m : {1u, 10u, 500u, 1000u}) CHECK(ps.sum(m) == doctest::Approx(double(m)));
  }
  SUBCASE("ratio 1 + 2/k converges to 1") {
    const std::int64_t M = 1000000;
    auto ps = karlin_mcgregor_partial_sums(ratio_chain(2.0), M);
    // brute-force accumulation of prod_{j<=n} j / (j + 2)
    double prod = 1.0, sum = 0.0;
    for (std::int64_t n = 1; n <= M; ++n) {
      prod *= static_cast<double>(n) / static_cast<double>(n + 2);
      sum += prod;
    }
    CHECK(ps.sum(M) == doctest::Approx(sum).epsilon(1e-9));
    CHECK(std::abs(ps.sum(M) - 1.0) < 2e-6);
    CHECK(ps.sum(10) == doctest::Approx(1.0 - 2.0 / 12.0).epsilon(1e-12));
  }
  SUBCASE("ratio 1 + 1/k gives harmonic sums") {
    const std::int64_t M = 100000;
    auto ps = karlin_mcgregor_partial_sums(ratio_chain(1.0), M);
    double h = 1.0;  // H_1
    for (std::int64_t n = 1; n <= M; ++n) {
      h += 1.0 / static_cast<double>(n + 1);
      if (n % 9973 == 0 || n == M) CHECK(ps.sum(n) == doctest::Approx(h - 1.0).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(karlin_mcgregor_partial_sums(ratio_chain(1.0), 0), std::invalid_argument);
}

TEST_CASE("raabe_statistic") {
  CHECK(raabe_statistic(ChainSpec::constant(0.5, 0.5), 17) == 0.0);
  CHECK(raabe_statistic(ratio_chain(2.0), 1000) == doctest::Approx(2000.0 / 1001.0).epsilon(1e-11));
  for (std::int64_t n : {1, 5, 50, 400}) {
    const double r = raabe_statistic(ratio_chain(1.0), n);
    CHECK(r == doctest::Approx(double(n) / double(n + 1)).epsilon(1e-11));
    CHECK(r < 1.0);
  }
}

TEST_CASE("classify_series agrees with classify_ratio on the worked chains") {
  for (double c : {2.0, 1.0, 0.0, -1.0, 3.0}) {
    auto chain = shifted_chain(c);
    CAPTURE(c);
    auto a = classify_ratio(chain);
    auto b = classify_series(chain, 1 << 16);
    CHECK(a.label == b.label);
    CHECK(b.label != Label::Inconclusive);
  }
  CHECK(classify_series(ChainSpec::constant(0.5, 0.5), 1000).label == Label::Recurrent);
  CHECK_THROWS_AS(classify_series(ratio_chain(1.0), 99), std::invalid_argument);
}

TEST_CASE("property: series and ratio criteria never disagree") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> cdist(-3.0, 3.0);
  int conclusive = 0;
  for (int i = 0; i < 60; ++i) {
    const double c = cdist(gen);
    auto chain = shifted_chain(c);
    auto a = classify_ratio(chain, quick());
    auto b = classify_series(chain, 1 << 16, quick());
    if (a.label != Label::Inconclusive && b.label != Label::Inconclusive) {
      ++conclusive;
      CAPTURE(c);
      CHECK(a.label == b.label);
    }
  }
  CHECK(conclusive > 40);
}

TEST_CASE("property: diagonal test matches the ratio test on the diagonal chain") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> rho(0.05, 1.6), alpha(-1.0, 1.0), beta(0.0, 1.2);
  int compared = 0;
  for (int i = 0; i < 60; ++i) {
    const auto f = DriftFunction::power_law(rho(gen), alpha(gen), beta(gen));
    Verdict d;
    try {
      d = classify_diagonal(f, quick());
    } catch (const DomainError&) {
      continue;
    }
    auto r = classify_ratio(ChainSpec::diagonal(f, d.valid_from), quick());
    if (d.label != Label::Inconclusive && r.label != Label::Inconclusive) {
      ++compared;
      CHECK(d.label == r.label);
    }
  }
  CHECK(compared > 30);
}

TEST_CASE("property: partial sums strictly increase") {
  for (double c : {-2.0, 0.0, 1.5, 3.0}) {
    auto ps = karlin_mcgregor_partial_sums(shifted_chain(c), 5000);
    for (std::size_t m = 1; m < ps.size(); ++m) REQUIRE(ps.log_sums[m] > ps.log_sums[m - 1]);
  }
}

TEST_CASE("property: scaling every rate changes no verdict or Raabe statistic") {
  for (double c : {-1.0, 0.5, 1.0, 2.5}) {
    auto chain = shifted_chain(c);
    for (double k : {4.0, 0.125, 3.7}) {
      auto scaled = chain.scaled(k);
      CHECK(classify_ratio(chain, quick()).label == classify_ratio(scaled, quick()).label);
      CHECK(classify_series(chain, 4096).label == classify_series(scaled, 4096).label);
      for (std::int64_t n : {1, 10, 100}) {
        const double a = raabe_statistic(chain, n), b = raabe_statistic(scaled, n);
        CHECK(b == doctest::Approx(a).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("property: Raabe statistic from products matches the local ratio") {
  for (double c : {2.0, 0.3, -0.7}) {
    auto chain = ChainSpec::from_ratio(
        [c](std::int64_t n) { return 1.0 + c / static_cast<double>(n + 1); });
    const std::int64_t stride = c == 2.0 ? 1 : 7;
    for (std::int64_t n = 1; n <= 10000; n += stride) {
      const double local = static_cast<double>(n) * (chain.birth(n + 1) / chain.death(n + 1) - 1.0);
      REQUIRE(std::abs(raabe_statistic(chain, n) - local) <= 1e-10 * std::abs(local));
    }
  }
}
