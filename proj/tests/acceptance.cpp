// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, exit status is the
// number of failing criteria. Each criterion is self-contained and uses its
// own independent oracle where one is called for.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "expseek/agent.hpp"
#include "expseek/entropy.hpp"
#include "expseek/errors.hpp"
#include "expseek/evaluation.hpp"
#include "expseek/experience.hpp"
#include "expseek/gateway.hpp"
#include "expseek/guidance.hpp"
#include "expseek/rng.hpp"
#include "expseek/stats.hpp"
#include "expseek/trajectory.hpp"
#include "expseek/trigger.hpp"

using namespace expseek;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool expect(bool ok, const std::string& what, std::string& detail) {
  if (!ok && detail.empty()) detail = what;
  return ok;
}

// ---------------------------------------------------------------- criterion 1

bool entropy_analytics(std::string& detail) {
  bool ok = true;
  for (std::size_t k = 2; k <= 64; ++k) {
    TokenDistribution d;
    d.token_id = 0;
    d.logprob = -std::log(static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
      d.alternatives.emplace_back(static_cast<std::int64_t>(i), d.logprob);
    }
    const double h = token_entropy(d).value;
    ok &= expect(std::abs(h - std::log(static_cast<double>(k))) < 1e-9,
                 "uniform K=" + std::to_string(k), detail);
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> hdist(0.01, 4.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> profile;
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) profile.push_back(hdist(rng));
    const double mean =
        std::accumulate(profile.begin(), profile.end(), 0.0) / profile.size();
    const StepEntropy s = step_entropy(entropy_profile_to_distributions(profile));
    ok &= expect(std::abs(s.value - mean) < 1e-9, "profile mean", detail);
    ok &= expect(s.token_count == n, "token count", detail);
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 2

double oracle_quantile(const std::vector<double>& values, double p) {
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

double oracle_ks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> grid = a;
  grid.insert(grid.end(), b.begin(), b.end());
  double sup = 0.0;
  for (double x : grid) {
    const auto cdf = [x](const std::vector<double>& v) {
      std::size_t c = 0;
      for (double y : v) c += (y <= x) ? 1 : 0;
      return static_cast<double>(c) / static_cast<double>(v.size());
    };
    sup = std::max(sup, std::abs(cdf(a) - cdf(b)));
  }
  return sup;
}

double oracle_auc(const std::vector<double>& incorrect,
                  const std::vector<double>& correct) {
  double wins = 0.0;
  for (double i : incorrect) {
    for (double c : correct) {
      if (i > c) wins += 1.0;
      else if (i == c) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(incorrect.size()) *
                 static_cast<double>(correct.size()));
}

bool statistical_oracles(std::string& detail) {
  std::mt19937_64 rng(23);
  bool ok = true;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto draw = [&rng](std::size_t n) {
      std::vector<double> v;
      for (std::size_t i = 0; i < n; ++i) {
        v.push_back(static_cast<double>(rng() % 13) / 4.0);  // tie-heavy grid
      }
      return v;
    };
    std::vector<double> a = draw(1 + rng() % 8);
    std::vector<double> b = draw(1 + rng() % 8);

    std::vector<double> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    const double p = static_cast<double>(rng() % 101) / 100.0;
    ok &= expect(empirical_quantile(sorted, p) == oracle_quantile(sorted, p),
                 "quantile mismatch rep " + std::to_string(rep), detail);
    ok &= expect(ks_statistic(a, b).statistic == oracle_ks(a, b),
                 "ks mismatch rep " + std::to_string(rep), detail);
    ok &= expect(auc(a, b) == oracle_auc(a, b),
                 "auc mismatch rep " + std::to_string(rep), detail);
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 3

std::pair<double, double> grid_fit(
    const std::vector<std::pair<double, int>>& samples) {
  double best_w = 0.0, best_b = 0.0;
  double best = std::numeric_limits<double>::infinity();
  double w_lo = 0.0, w_hi = 12.0, b_lo = -10.0, b_hi = 2.0, step = 0.05;
  for (int level = 0; level < 4; ++level) {
    best = std::numeric_limits<double>::infinity();
    for (double w = w_lo; w <= w_hi + step / 2; w += step) {
      for (double b = b_lo; b <= b_hi + step / 2; b += step) {
        const double obj = logistic_objective(samples, w, b);
        if (obj < best) {
          best = obj;
          best_w = w;
          best_b = b;
        }
      }
    }
    w_lo = best_w - 2 * step;
    w_hi = best_w + 2 * step;
    b_lo = best_b - 2 * step;
    b_hi = best_b + 2 * step;
    step /= 20.0;
  }
  return {best_w, best_b};
}

bool logistic_fit_oracle(std::string& detail) {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed);
    std::vector<std::pair<double, int>> samples;
    for (int i = 0; i < 40; ++i) {
      samples.emplace_back(0.15 + 0.40 * rng.next_double(), 0);
      samples.emplace_back(0.45 + 0.40 * rng.next_double(), 1);
    }
    const LogisticModel model = fit_logistic(samples);
    const double boundary = decision_boundary(model);
    const auto [gw, gb] = grid_fit(samples);
    const double grid_boundary = -gb / gw;
    ok &= expect(std::abs(boundary - grid_boundary) <= 1e-3,
                 "seed " + std::to_string(seed) + ": boundary " +
                     std::to_string(boundary) + " vs grid " +
                     std::to_string(grid_boundary),
                 detail);
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 4

bool bootstrap_behavior(std::string& detail) {
  std::vector<double> correct, incorrect;
  for (int i = 0; i < 120; ++i) {
    const double v = 0.30 + 0.15 * static_cast<double>(i) / 119.0;
    correct.push_back(v);
    incorrect.push_back(1.0 - v);
  }
  Rng rng_a(42);
  const ThresholdInterval a =
      estimate_interval(correct, incorrect, 1000, 0.95, rng_a);
  Rng rng_b(42);
  const ThresholdInterval b =
      estimate_interval(correct, incorrect, 1000, 0.95, rng_b);

  bool ok = true;
  ok &= expect(a.lower < 0.5 && 0.5 < a.upper, "interval misses 0.5", detail);
  ok &= expect(a.upper - a.lower < 0.05, "interval too wide", detail);
  ok &= expect(a.lower == b.lower && a.upper == b.upper,
               "not bit-reproducible", detail);

  const std::vector<double> one_correct(50, 0.4);
  const std::vector<double> one_incorrect(50, 0.6);
  Rng rng_c(42);
  const ThresholdInterval degenerate =
      estimate_interval(one_correct, one_incorrect, 200, 0.95, rng_c);
  ok &= expect(degenerate.upper == degenerate.lower,
               "degenerate interval has width", detail);
  return ok;
}

// ---------------------------------------------------------------- criterion 5

bool trigger_function(std::string& detail) {
  bool ok = true;
  const std::vector<std::pair<double, double>> fixtures = {
      {0.314, 0.413}, {0.225, 0.257}, {0.877, 1.384}};
  for (const auto& [lo, hi] : fixtures) {
    const ThresholdInterval interval{lo, hi, StepKind::Process, 1000};
    ok &= expect(intervention_probability(lo - 0.05, interval) == 0.0,
                 "below", detail);
    const double mid = lo + 0.5 * (hi - lo);
    ok &= expect(
        std::abs(intervention_probability(mid, interval) - 0.5) < 1e-9,
        "mid", detail);
    ok &= expect(intervention_probability(hi + 0.1, interval) == 1.0,
                 "above", detail);
  }

  const ThresholdInterval interval{0.3, 0.5, StepKind::Process, 1000};
  const double p = intervention_probability(0.374, interval);  // = 0.37
  Rng rng(1234);
  std::size_t fires = 0;
  for (int i = 0; i < 10000; ++i) {
    fires += sample_trigger(p, 0.374, false, rng).intervene ? 1 : 0;
  }
  const double rate = static_cast<double>(fires) / 10000.0;
  ok &= expect(std::abs(rate - p) <= 0.02,
               "empirical rate " + std::to_string(rate), detail);
  return ok;
}

// ---------------------------------------------------------------- criterion 6

std::string random_words(std::mt19937_64& rng, std::size_t max_words) {
  static const std::vector<std::string> vocab = {
      "oak",   "river", "search", "page", "date",  "answer",
      "tool",  "visit", "check",  "fact", "query", "source"};
  const std::size_t n = 1 + rng() % max_words;
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += " ";
    out += vocab[rng() % vocab.size()];
  }
  return out;
}

StepFragment random_fragment(std::mt19937_64& rng) {
  StepFragment f;
  f.reasoning = random_words(rng, 8);
  switch (rng() % 3 == 0 ? 2 : rng() % 2) {
    case 0: {
      f.kind = StepKind::Process;
      ToolCall call;
      call.tool = ToolKind::Search;
      const std::size_t n = 1 + rng() % kMaxSearchQueries;
      for (std::size_t i = 0; i < n; ++i) {
        call.queries.push_back(random_words(rng, 4));
      }
      f.tool_call = call;
      break;
    }
    case 1: {
      f.kind = StepKind::Process;
      ToolCall call;
      call.tool = ToolKind::Visit;
      call.url = "https://example.org/" + std::to_string(rng() % 1000);
      call.goal = random_words(rng, 6);
      f.tool_call = call;
      break;
    }
    default:
      f.kind = StepKind::Answer;
      f.answer = random_words(rng, 6);
  }
  return f;
}

bool parser_round_trip(std::string& detail) {
  std::mt19937_64 rng(99);
  bool ok = true;
  const std::vector<TagConvention> conventions = {TagConvention::thought_tags(),
                                                  TagConvention::think_tags()};
  for (int rep = 0; rep < 10000; ++rep) {
    const StepFragment f = random_fragment(rng);
    for (const auto& tags : conventions) {
      const StepFragment back = parse_response(render_fragment(f, tags), tags);
      ok &= expect(back == f, "round trip rep " + std::to_string(rep), detail);
    }
  }
  for (int rep = 0; rep < 10000; ++rep) {
    std::string raw;
    const std::size_t n = rng() % 64;
    for (std::size_t i = 0; i < n; ++i) {
      raw.push_back(static_cast<char>(rng() % 256));
    }
    try {
      (void)parse_response(raw, conventions[rep % 2]);
    } catch (const Error&) {
      // malformed input is rejected, not fatal
    } catch (...) {
      ok = expect(false, "non-domain exception rep " + std::to_string(rep),
                  detail);
    }
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 7

Trajectory scripted_trajectory(const std::string& qid, std::size_t run,
                               bool success) {
  Trajectory traj(qid, "question " + qid, run);
  Step process;
  process.kind = StepKind::Process;
  process.reasoning = "search first";
  process.tool_call = ToolCall{ToolKind::Search, {"the " + qid}, "", ""};
  process.observation = "results";
  process.entropy = {success ? 0.3 : 0.5, 4, false};
  traj.append_step(process);
  Step answer;
  answer.kind = StepKind::Answer;
  answer.reasoning = "answer now";
  answer.answer = success ? "right" : "wrong";
  answer.entropy = {success ? 0.2 : 0.9, 4, false};
  traj.append_step(answer);
  traj.finalize(Outcome::Success);
  return traj;
}

constexpr const char* kExtractionReply =
    "# STEP 1:\n"
    "## Triplet\n"
    "- None\n"
    "# STEP 2:\n"
    "## Triplet\n"
    "- Student's current state: answered without verifying the page evidence\n"
    "- Reason why this STEP leads to the final error: the fact was never "
    "confirmed on a source page\n"
    "- What to say before the next STEP to improve the current state: verify "
    "the candidate fact before answering\n"
    "# TOTAL: 2\n";

bool construction_pipeline(std::string& detail) {
  std::vector<QueryWithAnswer> queries;
  std::map<std::string, std::vector<JudgedRun>> runs;
  for (int q = 0; q < 6; ++q) {
    const std::string qid = "q" + std::to_string(q);
    queries.push_back({qid, "question " + qid, "right"});
    for (std::size_t r = 0; r < 5; ++r) {
      const bool success = r < 2;
      runs[qid].push_back({scripted_trajectory(qid, r, success), success});
    }
  }

  const std::string label_a =
      "the student answers immediately after a single shallow search and "
      "never verifies the candidate fact on the source page";
  const std::string label_b =
      "the student trusts an outdated snippet and commits to an answer "
      "without cross checking a second independent source";
  std::string induction_reply;
  for (int q = 0; q < 6; ++q) {
    for (int r = 2; r < 5; ++r) {
      induction_reply += "q" + std::to_string(q) + "-r" + std::to_string(r) +
                         "-s1 | " + (q % 2 == 0 ? label_a : label_b) + "\n";
    }
  }

  const auto build = [&] {
    std::vector<ScriptTurn> script(18,
                                   ScriptTurn{std::nullopt, kExtractionReply, {}});
    script.push_back({std::nullopt, induction_reply, {}});
    MockBackend tool_model(script);
    return build_experience_base(queries, runs, tool_model, "mock-agent", 7);
  };

  const ConstructionResult result = build();
  bool ok = true;
  ok &= expect(result.pair_count == 18, "pair count", detail);
  // Counting identity: 12 successful trajectories x 2 steps
  // + 18 labeled failed trajectories x 2 steps.
  ok &= expect(result.analyzed_step_count == 60, "analyzed count", detail);
  ok &= expect(result.entropy_samples.size() == 60, "sample count", detail);
  const auto incorrect = std::count_if(
      result.entropy_samples.begin(), result.entropy_samples.end(),
      [](const EntropySample& s) { return s.correctness == Correctness::Incorrect; });
  ok &= expect(incorrect == 18, "incorrect label count", detail);
  ok &= expect(result.warnings.empty(), "unexpected warnings", detail);
  ok &= expect(result.base.process.triplets.empty(), "process triplets", detail);
  ok &= expect(result.base.answer.triplets.size() == 18, "triplet count", detail);
  ok &= expect(result.base.answer.topics.size() == 2, "topic count", detail);
  if (result.base.answer.topics.size() == 2) {
    ok &= expect(result.base.answer.topics[0].member_ids.size() == 9 &&
                     result.base.answer.topics[1].member_ids.size() == 9,
                 "topic membership", detail);
  }

  const ConstructionResult again = build();
  ok &= expect(to_json(result.base) == to_json(again.base),
               "base not byte-reproducible", detail);
  ok &= expect(entropy_samples_to_jsonl(result.entropy_samples) ==
                   entropy_samples_to_jsonl(again.entropy_samples),
               "samples not byte-reproducible", detail);
  return ok;
}

// ------------------------------------------------------------ criteria 8..10

constexpr const char* kToolTurn =
    "<thought>search for the topic</thought>"
    "<tool_call>{\"search\": [\"oak tree\"]}</tool_call>";
constexpr const char* kGuidanceReply =
    "# Analysis combining student's current behavior to provide appropriate "
    "guidance for the present moment\nanalysis\n"
    "# Guidance Content\nConfirm the species on the page first.\n";

std::shared_ptr<ToolEnvironment> make_env() {
  SimulatedCorpus corpus;
  corpus.add_document({"https://a.example/oak", "Oak trees",
                       "The oak tree is a hardwood of the north."});
  std::vector<ScriptTurn> summarizer(8, ScriptTurn{std::nullopt, "summary", {}});
  return std::make_shared<SimulatedEnvironment>(
      corpus, ToolSettings{}, std::make_shared<MockBackend>(summarizer));
}

EpisodeConfig scripted_config() {
  EpisodeConfig config;
  config.process_interval = {0.314, 0.413, StepKind::Process, 1000};
  config.answer_interval = {0.225, 0.257, StepKind::Answer, 1000};
  config.seed = 5;
  return config;
}

EpisodeReport vanilla_episode(double tool_h, double answer_h,
                              const char* answer_turn) {
  MockBackend agent({{std::nullopt, kToolTurn, {tool_h}},
                     {std::nullopt, answer_turn, {answer_h}}});
  EpisodeConfig config = scripted_config();
  config.triggers_enabled = false;
  auto env = make_env();
  return run_episode({"q1", "what tree?"}, 0, config, agent, *env, nullptr);
}

EpisodeReport guided_episode(double wrong_h, double tool_h, double right_h) {
  MockBackend agent(
      {{std::nullopt,
        "<thought>guessing now</thought><answer>The pine</answer>", {wrong_h}},
       {std::nullopt, kToolTurn, {tool_h}},
       {std::nullopt,
        "<thought>confirmed now</thought><answer>The oak</answer>",
        {right_h}}});
  MockBackend experience({{std::nullopt, kGuidanceReply, {}}});
  GuidanceEngine engine(experience, nullptr);
  EpisodeConfig config = scripted_config();
  auto env = make_env();
  return run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
}

bool end_to_end_intervention(std::string& detail) {
  bool ok = true;

  const EpisodeReport vanilla = vanilla_episode(
      0.2, 0.2, "<thought>guessing now</thought><answer>The pine</answer>");
  MockBackend vanilla_judge({{std::nullopt, "Incorrect", {}}});
  ok &= expect(!judge("what tree?", "The oak", *vanilla.final_answer,
                      vanilla_judge).correct,
               "vanilla verdict should be false", detail);
  ok &= expect(vanilla.intervention_count == 0, "vanilla intervened", detail);

  const EpisodeReport guided = guided_episode(0.9, 0.2, 0.1);
  MockBackend guided_judge({{std::nullopt, "Correct", {}}});
  ok &= expect(guided.final_answer.has_value() &&
                   judge("what tree?", "The oak", *guided.final_answer,
                         guided_judge).correct,
               "guided verdict should be true", detail);
  ok &= expect(guided.intervention_count == 1, "intervention count", detail);

  // Silence invariant over the full log: no interventions on adjacent steps.
  try {
    guided.trajectory.validate();
  } catch (const Error& e) {
    ok = expect(false, std::string("trajectory invariant: ") + e.what(), detail);
  }
  const auto& steps = guided.trajectory.steps();
  for (std::size_t i = 1; i < steps.size(); ++i) {
    ok &= expect(!(steps[i - 1].intervention && steps[i].intervention),
                 "consecutive interventions", detail);
  }
  return ok;
}

bool ablation_semantics(std::string& detail) {
  bool ok = true;
  {  // process-only: a high-entropy answer step must not be intervened on
    MockBackend agent(
        {{std::nullopt,
          "<thought>guessing now</thought><answer>The pine</answer>", {0.9}}});
    MockBackend experience({});
    GuidanceEngine engine(experience, nullptr);
    EpisodeConfig config = scripted_config();
    config.answer_enabled = false;
    auto env = make_env();
    const EpisodeReport report =
        run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
    ok &= expect(report.intervention_count == 0, "process-only intervened",
                 detail);
    ok &= expect(experience.call_count() == 0, "process-only called model",
                 detail);
  }
  {  // answer-only: a high-entropy process step must not be intervened on
    MockBackend agent({{std::nullopt, kToolTurn, {0.9}},
                       {std::nullopt,
                        "<thought>the evidence is clear</thought>"
                        "<answer>The oak</answer>",
                        {0.1}}});
    MockBackend experience({});
    GuidanceEngine engine(experience, nullptr);
    EpisodeConfig config = scripted_config();
    config.process_enabled = false;
    auto env = make_env();
    const EpisodeReport report =
        run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
    ok &= expect(report.intervention_count == 0, "answer-only intervened",
                 detail);
    ok &= expect(experience.call_count() == 0, "answer-only called model",
                 detail);
  }
  return ok;
}

bool entropy_shift(std::string& detail) {
  const std::vector<EpisodeReport> vanilla = {vanilla_episode(
      0.2, 0.8, "<thought>guessing now</thought><answer>The pine</answer>")};
  const std::vector<EpisodeReport> treated = {guided_episode(0.9, 0.6, 0.1)};
  const EntropyShiftReport shift = entropy_shift_report(vanilla, treated);
  bool ok = true;
  ok &= expect(std::abs(shift.process_mean_vanilla - 0.2) < 1e-6 &&
                   std::abs(shift.process_mean_expseek - 0.6) < 1e-6,
               "process means", detail);
  // Superseded answer turns are included: (0.9 + 0.1) / 2 vs 0.8.
  ok &= expect(std::abs(shift.answer_mean_vanilla - 0.8) < 1e-6 &&
                   std::abs(shift.answer_mean_expseek - 0.5) < 1e-6,
               "answer means", detail);
  ok &= expect(shift.process_shift > 0.0 &&
                   std::abs(shift.process_shift - 0.4) < 1e-6,
               "process shift", detail);
  ok &= expect(shift.answer_shift < 0.0 &&
                   std::abs(shift.answer_shift + 0.3) < 1e-6,
               "answer shift", detail);
  ok &= expect(!shift.no_interventions, "interventions flag", detail);
  return ok;
}

// --------------------------------------------------------------- criterion 11

bool metrics(std::string& detail) {
  bool ok = true;
  {
    const VerdictTable v = {{"q1", {true, false, false}}};
    ok &= expect(std::abs(accuracy(v) - 1.0 / 3.0) < 1e-12, "accuracy 1/3",
                 detail);
    ok &= expect(pass_at_k(v, 3) == 1.0, "pass@3", detail);
  }
  {
    const VerdictTable v = {{"q1", {true, true, true}},
                            {"q2", {false, false, false}}};
    ok &= expect(accuracy(v) == 0.5, "accuracy 0.5", detail);
    ok &= expect(pass_at_k(v, 3) == 0.5, "pass@3 split", detail);
    ok &= expect(pass_at_k(v, 1) == 0.5, "pass@1 split", detail);
  }
  {
    // Rejection rate over armed checks only: (8 - 3) / 8.
    std::vector<EpisodeReport> reports;
    EpisodeReport a = vanilla_episode(
        0.2, 0.2, "<thought>the evidence is clear</thought>"
                  "<answer>The oak</answer>");
    a.trigger_checks = 5;
    a.trigger_fires = 2;
    EpisodeReport b = a;
    b.trigger_checks = 3;
    b.trigger_fires = 1;
    reports.push_back(a);
    reports.push_back(b);
    MockBackend judge_model({{std::nullopt, "Correct", {}},
                             {std::nullopt, "Correct", {}}});
    const MetricsReport m =
        evaluate_reports(reports, {{"q1", "The oak"}}, judge_model, 1);
    ok &= expect(std::abs(m.rejection_rate - 5.0 / 8.0) < 1e-12,
                 "rejection rate", detail);
    ok &= expect(m.accuracy == 1.0, "report accuracy", detail);
  }
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    VerdictTable v;
    for (int q = 0; q < 5; ++q) {
      std::vector<std::optional<bool>> runs;
      for (int r = 0; r < 5; ++r) runs.emplace_back(rng() % 4 == 0);
      v["q" + std::to_string(q)] = runs;
    }
    double prev = 0.0;
    for (std::size_t k = 1; k <= 5; ++k) {
      const double cur = pass_at_k(v, k);
      ok &= expect(cur >= prev - 1e-12, "pass@k monotonicity", detail);
      prev = cur;
    }
  }
  return ok;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"entropy analytics", entropy_analytics},
      {"statistical oracles", statistical_oracles},
      {"logistic-fit oracle", logistic_fit_oracle},
      {"bootstrap behavior", bootstrap_behavior},
      {"trigger function", trigger_function},
      {"parser round-trip and fuzz", parser_round_trip},
      {"construction pipeline", construction_pipeline},
      {"end-to-end intervention", end_to_end_intervention},
      {"ablation semantics", ablation_semantics},
      {"entropy-shift report", entropy_shift},
      {"metrics", metrics},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << (i + 1) << " (" << criteria[i].name
              << "): " << (ok ? "PASS" : "FAIL");
    if (!ok) {
      std::cout << " [" << detail << "]";
      ++failures;
    }
    std::cout << "\n";
  }
  return failures;
}
