// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "expseek/entropy.hpp"
#include "expseek/rng.hpp"

using namespace expseek;

namespace {

TokenDistribution uniform_dist(std::size_t k) {
  TokenDistribution d;
  d.token_id = 0;
  d.logprob = -std::log(static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    d.alternatives.emplace_back(static_cast<std::int64_t>(i), d.logprob);
  }
  return d;
}

// Independent oracle: entropy via p*log(1/p) accumulation in long double.
double oracle_entropy(const TokenDistribution& d) {
  long double h = 0.0L;
  long double mass = 0.0L;
  for (const auto& [id, lp] : d.alternatives) {
    (void)id;
    const long double p = std::exp(static_cast<long double>(lp));
    if (p > 0.0L) h += p * std::log(1.0L / p);
    mass += p;
  }
  const long double tail = 1.0L - mass;
  if (tail > 1e-12L) h += tail * std::log(1.0L / tail);
  return static_cast<double>(h);
}

}  // namespace

TEST_CASE("uniform distributions have entropy ln K") {
  for (std::size_t k = 2; k <= 64; ++k) {
    const TokenEntropy h = token_entropy(uniform_dist(k));
    CHECK(std::abs(h.value - std::log(static_cast<double>(k))) < 1e-9);
    CHECK_FALSE(h.approximated);
  }
}

TEST_CASE("tail bucket is applied when reported mass falls short") {
  TokenDistribution d;
  d.token_id = 0;
  d.logprob = std::log(0.25);
  d.alternatives = {{0, std::log(0.25)}, {1, std::log(0.25)}};
  const TokenEntropy h = token_entropy(d);
  CHECK(h.approximated);
  const double expected =
      -2.0 * 0.25 * std::log(0.25) - 0.5 * std::log(0.5);
  CHECK(h.value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("token entropy matches the independent oracle on random inputs") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + rng.next_index(12);
    std::vector<double> weights;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      weights.push_back(rng.next_double() + 1e-3);
      total += weights.back();
    }
    // Random unreported tail in [0, 0.3).
    const double tail = 0.3 * rng.next_double();
    TokenDistribution d;
    d.token_id = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = weights[i] / total * (1.0 - tail);
      d.alternatives.emplace_back(static_cast<std::int64_t>(i), std::log(p));
    }
    d.logprob = d.alternatives[0].second;
    const TokenEntropy h = token_entropy(d);
    CHECK(h.value == doctest::Approx(oracle_entropy(d)).epsilon(1e-9));
  }
}

TEST_CASE("step entropy is the mean of per-token entropies") {
  std::vector<TokenDistribution> tokens = {uniform_dist(2), uniform_dist(4),
                                           uniform_dist(8)};
  const StepEntropy s = step_entropy(tokens);
  const double expected =
      (std::log(2.0) + std::log(4.0) + std::log(8.0)) / 3.0;
  CHECK(s.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(s.token_count == 3);
  CHECK_FALSE(s.approximation);
}

TEST_CASE("empty token list is rejected") {
  CHECK_THROWS_AS(step_entropy({}), Error);
}

TEST_CASE("malformed distributions are rejected by validate") {
  TokenDistribution d = uniform_dist(4);
  SUBCASE("positive alternative logprob") {
    d.alternatives[1].second = 0.5;
    CHECK_THROWS_AS(d.validate(), Error);
  }
  SUBCASE("sampled token missing") {
    d.token_id = 99;
    CHECK_THROWS_AS(d.validate(), Error);
  }
  SUBCASE("mass above one") {
    for (auto& [id, lp] : d.alternatives) lp = std::log(0.5);
    CHECK_THROWS_AS(d.validate(), Error);
  }
  SUBCASE("no alternatives") {
    d.alternatives.clear();
    CHECK_THROWS_AS(d.validate(), Error);
  }
  SUBCASE("well formed passes") {
    CHECK_NOTHROW(uniform_dist(4).validate());
  }
}

TEST_CASE("histogram splits counts by label and covers the range") {
  std::vector<EntropyRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back({"q", 0, StepKind::Process, 0.1 * i,
                       i % 2 == 0 ? Correctness::Correct
                                  : Correctness::Incorrect});
  }
  const auto bins = entropy_histogram(records, 5);
  REQUIRE(bins.size() == 5);
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  for (const auto& b : bins) {
    correct += b.count_correct;
    incorrect += b.count_incorrect;
  }
  CHECK(correct == 5);
  CHECK(incorrect == 5);
  CHECK(bins.front().lower == doctest::Approx(0.0));
  CHECK(bins.back().upper == doctest::Approx(0.9));
}

TEST_CASE("entropy records round-trip through JSONL") {
  std::vector<EntropyRecord> records = {
      {"q1", 0, StepKind::Process, 0.25, Correctness::Correct},
      {"q1", 1, StepKind::Answer, 0.75, Correctness::Incorrect}};
  const auto loaded = entropy_records_from_jsonl(to_jsonl(records));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].query_id == "q1");
  CHECK(loaded[1].step_kind == StepKind::Answer);
  CHECK(loaded[1].entropy == doctest::Approx(0.75));
  CHECK(loaded[1].correctness == Correctness::Incorrect);
}
