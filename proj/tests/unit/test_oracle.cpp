#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bdwalk/classifier.hpp"
#include "bdwalk/errors.hpp"
#include "bdwalk/oracle.hpp"
#include "oracles.hpp"

using namespace bdwalk;

namespace {

ChainSpec ratio_chain(double c) {
  return ChainSpec::from_ratio([c](std::int64_t n) { return 1.0 + c / static_cast<double>(n); });
}

ChainSpec random_chain(std::mt19937_64& gen, std::size_t len, double lo, double hi) {
  std::uniform_real_distribution<double> rate(lo, hi);
  std::vector<double> birth(len), death(len);
  for (std::size_t i = 0; i < len; ++i) {
    birth[i] = rate(gen);
    death[i] = rate(gen);
  }
  return ChainSpec::tabulated(birth, death);
}

}  // namespace

TEST_CASE("hit_probability: worked examples") {
  const auto sym = ChainSpec::constant(0.5, 0.5);
  CHECK(std::abs(hit_probability(sym, {10, 0, 50}) - 0.2) < 1e-12);

  // lambda_1 / mu_1 = 2
  const auto two = ChainSpec::tabulated({0.5, 2.0 / 3.0}, {0.0, 1.0 / 3.0});
  const double h = hit_probability(two, {1, 0, 2});
  CHECK(h == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // h_1 = lambda_1 h_2 + mu_1 h_0 with h_0 = 0, h_2 = 1
  CHECK(h == doctest::Approx(two.birth(1) / (two.birth(1) + two.death(1))).epsilon(1e-14));

  CHECK(hit_probability(sym, {0, 0, 50}) == 0.0);
  CHECK(hit_probability(sym, {50, 0, 50}) == 1.0);
  CHECK(hit_probability(two, {3, 3, 9}) == 0.0);
  CHECK(hit_probability(two, {9, 3, 9}) == 1.0);
}

TEST_CASE("hit_probability: argument and rate errors") {
  const auto sym = ChainSpec::constant(0.5, 0.5);
  CHECK_THROWS_AS(hit_probability(sym, {5, 10, 10}), std::invalid_argument);
  CHECK_THROWS_AS(hit_probability(sym, {11, 0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(hit_probability(sym, {1, -1, 10}), std::invalid_argument);
  const auto dead = ChainSpec::tabulated({0.5, 0.5, 0.0}, {0.0, 0.5, 0.5});
  CHECK_THROWS_AS(hit_probability(dead, {1, 0, 10}), InvalidChain);
}

TEST_CASE("hit_probability: strongly biased chains stay finite") {
  // products span ~ 10^300 over the range
  const auto down = ChainSpec::constant(0.2, 0.8);
  const double h = hit_probability(down, {1, 0, 500});
  CHECK(h >= 0.0);
  CHECK(h < 1e-290);
  const double up = hit_probability(ChainSpec::constant(0.8, 0.2), {1, 0, 500});
  CHECK(up == doctest::Approx(0.75).epsilon(1e-12));  // 1 - mu/lambda
}

TEST_CASE("property: hit_probability matches the linear system and is monotone in start") {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<std::int64_t> lower(0, 5), width(2, 30);
  for (int i = 0; i < 80; ++i) {
    const auto chain = random_chain(gen, 40, 0.05, 0.95);
    const std::int64_t a = lower(gen), b = a + width(gen);
    const auto ref = testing::hitting_by_linear_system(
        [&](std::int64_t n) { return chain.birth(n); }, [&](std::int64_t n) { return chain.death(n); },
        a, b);
    double prev = -1.0;
    for (std::int64_t k = a; k <= b; ++k) {
      const double h = hit_probability(chain, {k, a, b});
      REQUIRE(h >= prev);
      CHECK(std::abs(h - ref[static_cast<std::size_t>(k - a)]) < 1e-10);
      prev = h;
    }
  }
}

TEST_CASE("stationary: geometric closed form") {
  const auto mm1 = ChainSpec::constant(0.25, 0.5);
  const auto d = stationary(mm1, 100);
  CHECK(d.truncation == 100);
  REQUIRE(d.p.size() == 101);
  CHECK(std::abs(d.p[0] - 0.5) < 1e-12);
  CHECK(std::abs(d.p[1] - 0.25) < 1e-12);
  for (std::size_t n = 0; n <= 40; ++n) CHECK(std::abs(d.p[n] - 0.5 * std::pow(0.5, double(n))) < 1e-12);
  CHECK(balance_residual(d, mm1) < 1e-12);
  CHECK(d.tail_bound > 0.0);
  CHECK(d.tail_bound < 1e-29);
}

TEST_CASE("stationary: errors") {
  CHECK_THROWS_AS(stationary(ChainSpec::constant(0.5, 0.5), 1000), NotNormalizable);
  CHECK_THROWS_AS(stationary(ChainSpec::constant(0.6, 0.4), 1000), NotNormalizable);
  CHECK_THROWS_AS(stationary(ChainSpec::constant(0.25, 0.5), 1), std::invalid_argument);
  CHECK_THROWS_AS(stationary(ChainSpec::tabulated({0.5, 0.0}, {0.0, 0.5}), 10), InvalidChain);
}

TEST_CASE("balance_residual") {
  SUBCASE("uniform distribution on a symmetric segment") {
    StationaryDistribution u;
    u.truncation = 20;
    u.p.assign(21, 1.0 / 21.0);
    const auto r = balance_residuals(u, ChainSpec::constant(0.5, 0.5));
    CHECK(r.interior == 0.0);
    CHECK(r.boundary == 0.0);
  }
  SUBCASE("perturbed P_0") {
    const auto mm1 = ChainSpec::constant(0.25, 0.5);
    auto d = stationary(mm1, 100);
    d.p[0] += 0.01;
    const double total = std::accumulate(d.p.begin(), d.p.end(), 0.0);
    for (double& x : d.p) x /= total;
    // both the boundary and the n = 1 equation pick up 0.01 * lambda / total
    const double expected = 0.01 * 0.25 / total;
    const auto r = balance_residuals(d, mm1);
    CHECK(r.boundary == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.interior == doctest::Approx(expected).epsilon(1e-9));
    CHECK(balance_residual(d, mm1) > 1e-3);
  }
}

TEST_CASE("property: stationary matches the linear system and balances") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> up(0.05, 0.45), down(0.5, 0.95);
  for (int i = 0; i < 40; ++i) {
    std::vector<double> birth(30), death(30);
    for (std::size_t k = 0; k < 30; ++k) {
      birth[k] = up(gen);
      death[k] = down(gen);
    }
    const auto chain = ChainSpec::tabulated(birth, death);
    const std::int64_t N = 25;
    const auto d = stationary(chain, N);
    const auto ref = testing::stationary_by_linear_system(
        [&](std::int64_t n) { return chain.birth(n); }, [&](std::int64_t n) { return chain.death(n); },
        N);
    double total = 0.0;
    for (std::size_t n = 0; n < d.p.size(); ++n) {
      CHECK(d.p[n] >= 0.0);
      CHECK(std::abs(d.p[n] - ref[n]) < 1e-12);
      total += d.p[n];
    }
    CHECK(total <= 1.0 + 1e-12);
    CHECK(total >= 1.0 - d.tail_bound - 1e-12);
    CHECK(balance_residual(d, chain) < 1e-12);
  }
}

TEST_CASE("expected_returns: worked examples") {
  SUBCASE("symmetric chain") {
    const auto e = expected_returns(ChainSpec::constant(0.5, 0.5), 1000000);
    CHECK(e.escape == doctest::Approx(1e-6).epsilon(1e-9));
    CHECK(e.return_probability == doctest::Approx(1.0));
    CHECK(e.escape_at_double == doctest::Approx(5e-7).epsilon(1e-9));
  }
  SUBCASE("ratio 1 + 2/n: escape tends to 1 / (1 + S_inf) = 1/2") {
    const auto chain = ratio_chain(2.0);
    const auto e = expected_returns(chain, 1000);
    const auto ps = karlin_mcgregor_partial_sums(chain, 999);
    CHECK(e.escape == doctest::Approx(1.0 / (1.0 + ps.sum(999))).epsilon(1e-12));
    CHECK(e.escape == doctest::Approx(hit_probability(chain, {1, 0, 1000})).epsilon(1e-15));
    CHECK(std::abs(e.escape - 0.5) < 1e-3);
    CHECK_FALSE(e.infinite_returns);
  }
  SUBCASE("ratio 1 + 1/n: escape decays like 1 / H_b") {
    const auto e = expected_returns(ratio_chain(1.0), 1000);
    double h = 0.0;
    for (int k = 1; k <= 1000; ++k) h += 1.0 / k;
    CHECK(e.escape == doctest::Approx(1.0 / h).epsilon(1e-11));
    CHECK(e.escape_at_double < e.escape);
  }
  SUBCASE("strongly recurrent chain is flagged") {
    const auto e = expected_returns(ChainSpec::constant(0.3, 0.7), 40);
    CHECK(e.escape < 1e-6);
    CHECK(e.infinite_returns);
  }
  CHECK_THROWS_AS(expected_returns(ChainSpec::constant(0.5, 0.5), 1), std::invalid_argument);
}

TEST_CASE("property: escape equals 1 / (1 + S_{b-1})") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> cdist(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double c = cdist(gen);
    const auto chain = ChainSpec::from_ratio(
        [c](std::int64_t n) { return 1.0 + c / static_cast<double>(std::max<std::int64_t>(n, 4)); });
    const auto ps = karlin_mcgregor_partial_sums(chain, 999);
    const double want = 1.0 / (1.0 + ps.sum(999));
    CAPTURE(c);
    CHECK(std::abs(expected_returns(chain, 1000).escape - want) <= 1e-10 * want);
  }
}

TEST_CASE("property: scaling every rate changes no oracle output") {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> birth(30), death(30);
    std::uniform_real_distribution<double> up(0.05, 0.45), down(0.5, 0.95);
    for (std::size_t k = 0; k < 30; ++k) {
      birth[k] = up(gen);
      death[k] = down(gen);
    }
    const auto chain = ChainSpec::tabulated(birth, death);
    for (double s : {0.01, 3.7, 250.0}) {
      const auto scaled = chain.scaled(s);
      CHECK(hit_probability(scaled, {4, 1, 20}) ==
            doctest::Approx(hit_probability(chain, {4, 1, 20})).epsilon(1e-12));
      const auto a = stationary(chain, 60), b = stationary(scaled, 60);
      for (std::size_t n = 0; n < a.p.size(); ++n) CHECK(b.p[n] == doctest::Approx(a.p[n]).epsilon(1e-11));
      CHECK(expected_returns(scaled, 20).escape ==
            doctest::Approx(expected_returns(chain, 20).escape).epsilon(1e-12));
    }
  }
}
