// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "expseek/errors.hpp"
#include "expseek/trigger.hpp"

using namespace expseek;

namespace {

std::vector<std::pair<double, int>> two_clusters(double lo_center,
                                                 double hi_center,
                                                 std::size_t n, double spread) {
  std::vector<std::pair<double, int>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double offset =
        spread * (static_cast<double>(i) / static_cast<double>(n) - 0.5);
    out.emplace_back(lo_center + offset, 0);
    out.emplace_back(hi_center + offset, 1);
  }
  return out;
}

// Dense grid search over (w, b), the acceptance oracle in miniature.
std::pair<double, double> grid_fit(
    const std::vector<std::pair<double, int>>& samples) {
  double best_w = 0.0;
  double best_b = 0.0;
  double best = 1e300;
  for (double w = -10.0; w <= 30.0; w += 0.25) {
    for (double b = -20.0; b <= 10.0; b += 0.25) {
      const double f = logistic_objective(samples, w, b);
      if (f < best) {
        best = f;
        best_w = w;
        best_b = b;
      }
    }
  }
  return {best_w, best_b};
}

}  // namespace

TEST_CASE("logistic fit separates two entropy clusters") {
  const auto samples = two_clusters(0.3, 0.9, 40, 0.1);
  const LogisticModel model = fit_logistic(samples);
  CHECK(model.w > 0.0);
  const double boundary = decision_boundary(model);
  CHECK(boundary > 0.35);
  CHECK(boundary < 0.85);
  // The fitted optimum beats a coarse grid sweep of the same objective.
  const auto [gw, gb] = grid_fit(samples);
  CHECK(logistic_objective(samples, model.w, model.b) <=
        logistic_objective(samples, gw, gb) + 1e-9);
}

TEST_CASE("single-class data is rejected") {
  std::vector<std::pair<double, int>> samples = {{0.1, 0}, {0.2, 0}};
  CHECK_THROWS_AS(fit_logistic(samples), Error);
}

TEST_CASE("decision boundary guards the slope") {
  CHECK_THROWS_AS(decision_boundary({1e-9, 0.0}), Error);
  CHECK_THROWS_AS(decision_boundary({-2.0, 1.0}), Error);
  CHECK(decision_boundary({2.0, -1.0}) == doctest::Approx(0.5));
}

TEST_CASE("bootstrap interval brackets the symmetric midpoint") {
  std::vector<double> correct;
  std::vector<double> incorrect;
  for (int i = 0; i < 60; ++i) {
    correct.push_back(0.30 + 0.002 * (i % 10));
    incorrect.push_back(0.70 - 0.002 * (i % 10));
  }
  Rng rng(42);
  const ThresholdInterval iv =
      estimate_interval(correct, incorrect, 1000, 0.95, rng);
  CHECK(iv.lower < 0.509);
  CHECK(iv.upper > 0.491);
  CHECK(iv.upper - iv.lower < 0.05);
  CHECK(iv.n_bootstrap >= 30);

  Rng rng2(42);
  const ThresholdInterval again =
      estimate_interval(correct, incorrect, 1000, 0.95, rng2);
  CHECK(iv.lower == again.lower);  // bit-exact reproducibility
  CHECK(iv.upper == again.upper);
}

TEST_CASE("degenerate single-value clusters give a zero-width interval") {
  const std::vector<double> correct(100, 0.2);
  const std::vector<double> incorrect(100, 0.8);
  Rng rng(7);
  const ThresholdInterval iv =
      estimate_interval(correct, incorrect, 100, 0.95, rng);
  CHECK(iv.upper == iv.lower);
}

TEST_CASE("too few accepted iterates raise insufficient-bootstrap") {
  const std::vector<double> correct(10, 0.4);
  const std::vector<double> incorrect(10, 0.6);
  Rng rng(3);
  CHECK_THROWS_AS(estimate_interval(correct, incorrect, 10, 0.95, rng), Error);
}

TEST_CASE("intervention probability on the published fixture intervals") {
  const ThresholdInterval p8{0.314, 0.413, StepKind::Process, 1000};
  const ThresholdInterval a8{0.225, 0.257, StepKind::Answer, 1000};
  const ThresholdInterval p32{0.877, 1.384, StepKind::Process, 1000};

  for (const auto& iv : {p8, a8, p32}) {
    const double mid = 0.5 * (iv.lower + iv.upper);
    CHECK(intervention_probability(iv.lower - 0.05, iv) == 0.0);
    CHECK(intervention_probability(iv.upper + 0.05, iv) == 1.0);
    CHECK(intervention_probability(mid, iv) ==
          (mid - iv.lower) / (iv.upper - iv.lower));
  }
}

TEST_CASE("zero-width interval degenerates to a step function") {
  const ThresholdInterval iv{0.5, 0.5, StepKind::Process, 1};
  CHECK(intervention_probability(0.499, iv) == 0.0);
  CHECK(intervention_probability(0.5, iv) == 1.0);
  CHECK(intervention_probability(0.501, iv) == 1.0);
}

TEST_CASE("sampled trigger honors silence and tracks the probability") {
  Rng rng(11);
  const TriggerDecision silent = sample_trigger(1.0, 0.9, true, rng);
  CHECK_FALSE(silent.intervene);
  CHECK(silent.suppressed_by_silence);

  std::size_t fires = 0;
  for (int i = 0; i < 10000; ++i) {
    if (sample_trigger(0.37, 0.5, false, rng).intervene) ++fires;
  }
  const double rate = static_cast<double>(fires) / 10000.0;
  CHECK(std::abs(rate - 0.37) < 0.02);
  CHECK_THROWS_AS(sample_trigger(1.5, 0.0, false, rng), Error);
}

TEST_CASE("threshold artifact JSON round-trip") {
  ThresholdArtifact artifact;
  artifact.model_name = "qwen3-8b";
  artifact.process = {0.314, 0.413, StepKind::Process, 1000};
  artifact.answer = {0.225, 0.257, StepKind::Answer, 1000};
  artifact.seed = 99;
  artifact.created_at = "2026-01-01T00:00:00Z";
  const ThresholdArtifact back =
      threshold_artifact_from_json(to_json(artifact));
  CHECK(back.model_name == artifact.model_name);
  CHECK(back.process.lower == artifact.process.lower);
  CHECK(back.answer.upper == artifact.answer.upper);
  CHECK(back.seed == 99);

  CHECK_THROWS_AS(
      threshold_artifact_from_json(
          R"({"model_name":"x","process":{"step_kind":"process","lower":1.0,"upper":0.5},)"
          R"("answer":{"step_kind":"answer","lower":0.1,"upper":0.2}})"),
      Error);
}
