#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bdwalk/experiments.hpp"

using namespace bdwalk;

namespace {

const SweepRecord* find(const SweepResult& s, double rho, double alpha, double beta) {
  auto eq = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || std::abs(a - b) < 1e-12; };
  for (const auto& r : s.records) {
    if (eq(r.point.rho, rho) && eq(r.point.alpha, alpha) && eq(r.point.beta, beta)) return &r;
  }
  return nullptr;
}

// Region labels as stated for the power-law grid.
std::optional<Label> stated_region(double a, double b) {
  if (a < std::min(b, 2 * b - 1)) return Label::Recurrent;
  if (0 <= b && b < 1 && 2 * b - 1 < a && a < b) return Label::Transient;
  return std::nullopt;
}

double distance_to_curves(double a, double b) {
  return std::min(std::abs(a - 2 * b + 1) / std::sqrt(5.0), std::abs(a - b) / std::sqrt(2.0));
}

}  // namespace

TEST_CASE("example 1: threshold at rho = 1/2") {
  const auto s = run_example(1);
  CHECK(s.records.size() == 18);
  CHECK(s.inconsistent() == 0);
  for (const auto& r : s.records) {
    REQUIRE(r.verdict);
    CHECK(r.verdict->label == (r.point.rho < 0.5 ? Label::Recurrent : Label::Transient));
  }
  const auto* r = find(s, 0.3, 1, 1);
  REQUIRE(r);
  CHECK(r->verdict->label == Label::Recurrent);
  CHECK(r->oracle->ratio_label == Label::Recurrent);
}

TEST_CASE("example 2: phase diagram matches the stated regions") {
  const auto s = run_example(2);
  std::size_t expected_points = 0;
  for (int i = -10; i <= 15; ++i)
    for (int j = 0; j <= 15; ++j) expected_points += j > i;
  CHECK(s.records.size() == expected_points);
  CHECK(s.inconsistent() == 0);
  for (const auto& r : s.records) {
    REQUIRE(r.verdict);
    const double a = r.point.alpha, b = r.point.beta;
    const auto want = stated_region(a, b);
    if (distance_to_curves(a, b) > 0.05) {
      REQUIRE(want);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(r.verdict->label == *want);
    }
    if (b >= 1.0) CHECK_FALSE(r.annotations.empty());
  }
  CHECK(find(s, 1, 0.5, 0.6)->verdict->label == Label::Transient);
  CHECK(find(s, 1, 0.0, 0.75) == nullptr);  // off the 0.1 grid
}

TEST_CASE("phase_sweep: single points") {
  ExperimentSpec spec;
  spec.rho = {1.0};
  spec.alpha = {0.0};
  spec.beta = {0.75};
  auto s = phase_sweep(spec);
  REQUIRE(s.records.size() == 1);
  CHECK(s.records[0].verdict->label == Label::Recurrent);

  // on the curve alpha = 2 beta - 1 the drift is rho / (2n) on the diagonal
  spec.alpha = {-1.0};
  spec.beta = {0.0};
  spec.rho = {0.4, 0.5, 0.6};
  s = phase_sweep(spec);
  REQUIRE(s.records.size() == 3);
  CHECK(s.records[0].verdict->label == Label::Recurrent);
  CHECK(s.records[1].verdict->label == Label::Inconclusive);
  CHECK(s.records[1].near_boundary);
  CHECK_FALSE(s.records[1].expected);
  CHECK(s.records[2].verdict->label == Label::Transient);
}

TEST_CASE("phase_sweep: invalid models get no verdict") {
  ExperimentSpec spec;
  spec.family = Family::Constant;
  spec.rho = {0.6, 0.1};
  auto s = phase_sweep(spec);
  REQUIRE(s.records.size() == 2);
  CHECK(s.records[0].invalid_model);
  CHECK_FALSE(s.records[0].verdict);
  CHECK(s.records[0].consistent);
  CHECK(s.records[1].verdict->label == Label::Transient);

  spec = {};
  spec.rho = {1.2};
  spec.alpha = {0};
  spec.beta = {0};
  s = phase_sweep(spec);
  CHECK(s.records[0].invalid_model);
}

TEST_CASE("example 3: threshold at rho = 1/4 for every alpha") {
  const auto s = run_example(3);
  CHECK(s.records.size() == 40);
  CHECK(s.inconsistent() == 0);
  CHECK(find(s, 0.2, 0.5, 0.75)->verdict->label == Label::Recurrent);
  ExampleOverrides ov;
  ov.rho = std::vector<double>{0.3};
  const auto t = run_example(3, ov);
  REQUIRE(t.records.size() == 5);
  for (const auto& r : t.records) CHECK(r.verdict->label == Label::Transient);
}

TEST_CASE("example 4: exponential drift is recurrent") {
  const auto s = run_example(4);
  CHECK(s.records.size() == 6);
  for (const auto& r : s.records) CHECK(r.verdict->label == Label::Recurrent);
  CHECK(find(s, NAN, 2, 0.1)->verdict->label == Label::Recurrent);
  CHECK_THROWS_AS(run_example(5), std::invalid_argument);
}

TEST_CASE("spec validation lists every violation") {
  ExperimentSpec spec;
  spec.rho = {-1};
  spec.beta = {-0.5};
  spec.mc.horizon = 0;
  const auto v = spec_violations(spec);
  CHECK(v.size() == 3);
  CHECK_THROWS_WITH_AS(phase_sweep(spec), doctest::Contains("rho: -1"), std::invalid_argument);
}

TEST_CASE("expected_label and near_boundary") {
  CHECK(expected_label(Family::PowerLaw, {1, 0.5, 0.6}) == Label::Transient);
  CHECK(expected_label(Family::PowerLaw, {1, 0, 0.75}) == Label::Recurrent);
  CHECK_FALSE(expected_label(Family::PowerLaw, {0.5, 1, 1}));
  CHECK(expected_label(Family::Boundary, {0.2, 1, 1}) == Label::Recurrent);
  CHECK(expected_label(Family::Exponential, {NAN, 2, 0.1}) == Label::Recurrent);
  CHECK(near_boundary(Family::PowerLaw, {1, 0.9, 1.0}, 0.05, 0.05));
  CHECK_FALSE(near_boundary(Family::PowerLaw, {1, 0.0, 0.75}, 0.05, 0.05));
  CHECK(near_boundary(Family::Boundary, {0.26, 0, 0.5}, 0.05, 0.05));
}

TEST_CASE("sweeps with Monte Carlo evidence are reproducible") {
  ExperimentSpec spec = example_spec(1);
  spec.rho = {0.25, 0.75};
  spec.mc.replicas = 200;
  spec.mc.horizon = 5000;
  spec.mc.seed = 17;
  spec.mc.threads = 1;
  const auto a = phase_sweep(spec);
  spec.mc.threads = 3;
  const auto b = phase_sweep(spec);
  CHECK(a.same_results(b));
  CHECK(a.same_results(phase_sweep(spec)));
  for (const auto& r : a.records) {
    REQUIRE(r.mc);
    CHECK(r.mc->seed == r.seed);
    CHECK(r.mc->replicas == 200);
  }
}

TEST_CASE("evidence_report") {
  SUBCASE("empty sweep") {
    SweepResult empty;
    const auto rep = evidence_report(empty);
    CHECK(rep.entries.empty());
    CHECK_FALSE(rep.symmetric_reference);
  }
  SUBCASE("linear drift above and below the threshold") {
    ExperimentSpec spec = example_spec(1);
    spec.rho = {0.25, 0.75};
    spec.mc.replicas = 300;
    spec.mc.horizon = 1000000;
    spec.mc.stop_at_return = true;
    spec.mc.seed = 3;
    const auto s = phase_sweep(spec);
    const auto& low = *s.records[0].mc;
    const auto& high = *s.records[1].mc;
    const double se = std::hypot(low.return_frequency.se, high.return_frequency.se);
    CHECK(low.return_frequency.value - high.return_frequency.value > 5 * se);

    const auto rep = evidence_report(s);
    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.conflicts() == 0);
    CHECK(rep.entries[0].statement == "consistent with recurrence");
    CHECK(rep.entries[1].statement == "consistent with transience");
    CHECK(*rep.entries[1].z_vs_symmetric < -5);
  }
  SUBCASE("exponential drift returns almost surely") {
    ExperimentSpec spec = example_spec(4);
    spec.alpha = {1.0};
    spec.beta = {1.0};
    spec.mc.replicas = 300;
    spec.mc.horizon = 1000000;
    spec.mc.stop_at_return = true;
    const auto s = phase_sweep(spec);
    REQUIRE(s.records[0].mc);
    CHECK(s.records[0].mc->return_frequency.value >= 0.99);
    CHECK(evidence_report(s).entries[0].statement == "consistent with recurrence");
  }
  SUBCASE("mislabelled points are flagged") {
    ExperimentSpec spec = example_spec(1);
    spec.rho = {0.75};
    spec.mc.replicas = 4000;
    spec.mc.horizon = 100;
    spec.mc.stop_at_return = true;
    auto s = phase_sweep(spec);
    // a Transient point whose walks all returned
    s.records[0].mc->return_frequency = {1.0, 0.0};
    const auto rep = evidence_report(s);
    REQUIRE(rep.symmetric_reference);
    CHECK(rep.symmetric_reference->return_frequency.value < 0.95);
    CHECK(rep.conflicts() == 1);
    CHECK(rep.entries[0].statement.rfind("CONFLICT", 0) == 0);
  }
}
