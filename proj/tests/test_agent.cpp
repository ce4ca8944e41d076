// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "expseek/agent.hpp"
#include "expseek/errors.hpp"

using namespace expseek;

namespace {

constexpr const char* kToolTurn =
    "<thought>search for the topic</thought>"
    "<tool_call>{\"search\": [\"oak tree\"]}</tool_call>";
constexpr const char* kAnswerTurn =
    "<thought>the evidence is clear</thought><answer>The oak</answer>";
constexpr const char* kWrongAnswerTurn =
    "<thought>guessing now</thought><answer>The pine</answer>";
constexpr const char* kRightAnswerTurn =
    "<thought>now it is confirmed</thought><answer>The oak</answer>";
constexpr const char* kGuidanceReply =
    "# Analysis combining student's current behavior to provide appropriate "
    "guidance for the present moment\nanalysis\n"
    "# Guidance Content\nReview the core of the question.\n";

std::shared_ptr<ToolEnvironment> make_env() {
  SimulatedCorpus corpus;
  corpus.add_document({"https://a.example/oak", "Oak trees",
                       "The oak tree is a hardwood of the north."});
  std::vector<ScriptTurn> summarizer(8, ScriptTurn{std::nullopt, "summary", {}});
  return std::make_shared<SimulatedEnvironment>(
      corpus, ToolSettings{}, std::make_shared<MockBackend>(summarizer));
}

EpisodeConfig base_config() {
  EpisodeConfig config;
  config.process_interval = {0.314, 0.413, StepKind::Process, 1000};
  config.answer_interval = {0.225, 0.257, StepKind::Answer, 1000};
  config.seed = 17;
  return config;
}

}  // namespace

TEST_CASE("vanilla episode: tool step then answer") {
  MockBackend agent({{std::nullopt, kToolTurn, {0.1}},
                     {std::nullopt, kAnswerTurn, {0.1}}});
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  auto env = make_env();
  const EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, nullptr);

  CHECK(report.trajectory.outcome() == Outcome::Success);
  CHECK(report.step_count == 2);
  CHECK(report.intervention_count == 0);
  CHECK(report.trigger_checks == 0);
  CHECK(report.final_answer == "The oak");
  CHECK(report.usage.agent_calls == 2);
  CHECK(report.usage.tool_calls == 1);
  const auto& steps = report.trajectory.steps();
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].entropy.value == doctest::Approx(0.1));
  REQUIRE(steps[0].observation.has_value());
  CHECK(steps[0].observation->find("A Google search") != std::string::npos);
  CHECK_NOTHROW(report.trajectory.validate());
}

TEST_CASE("a malformed turn gets one corrective retry") {
  MockBackend agent({{std::nullopt, "total garbage", {0.1}},
                     {std::nullopt, kAnswerTurn, {0.1}}});
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  auto env = make_env();
  const EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, nullptr);
  CHECK(report.trajectory.outcome() == Outcome::Success);
  CHECK(report.usage.agent_calls == 2);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].find("parse retry") != std::string::npos);
}

TEST_CASE("two malformed turns fail the episode") {
  MockBackend agent({{std::nullopt, "garbage one", {0.1}},
                     {std::nullopt, "garbage two", {0.1}}});
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  auto env = make_env();
  const EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, nullptr);
  CHECK(report.trajectory.outcome() == Outcome::Failure);
  CHECK_FALSE(report.final_answer.has_value());
}

TEST_CASE("exceeding the step budget is a distinct outcome") {
  std::vector<ScriptTurn> turns(5, {std::nullopt, kToolTurn, {0.1}});
  MockBackend agent(turns);
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  config.max_steps = 3;
  auto env = make_env();
  const EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, nullptr);
  CHECK(report.trajectory.outcome() == Outcome::StepBudgetExhausted);
  CHECK(report.step_count == 3);
  CHECK_FALSE(report.final_answer.has_value());
}

TEST_CASE("high-entropy answer step triggers guidance and the agent recovers") {
  MockBackend agent({{std::nullopt, kWrongAnswerTurn, {0.9}},
                     {std::nullopt, kToolTurn, {0.1}},
                     {std::nullopt, kRightAnswerTurn, {0.1}}});
  MockBackend experience({{std::nullopt, kGuidanceReply, {}}});
  GuidanceEngine engine(experience, nullptr);  // direct route
  EpisodeConfig config = base_config();
  auto env = make_env();
  const EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);

  CHECK(report.trajectory.outcome() == Outcome::Success);
  CHECK(report.final_answer == "The oak");
  CHECK(report.intervention_count == 1);
  CHECK(report.step_count == 3);
  CHECK(report.trigger_checks == 2);  // step 1 is silenced
  CHECK(report.trigger_fires == 1);
  CHECK(report.usage.experience_calls == 1);

  const auto& steps = report.trajectory.steps();
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].kind == StepKind::Answer);
  CHECK(steps[0].superseded);
  REQUIRE(steps[0].intervention.has_value());
  CHECK(steps[0].intervention->guidance_text ==
        "Review the core of the question.");
  CHECK(steps[0].intervention->trigger_probability == 1.0);
  CHECK(steps[1].kind == StepKind::Process);
  CHECK_FALSE(steps[1].intervention.has_value());
  CHECK_FALSE(steps[2].superseded);
  CHECK_NOTHROW(report.trajectory.validate());
}

TEST_CASE("per-kind disablement blocks interventions of that kind") {
  SUBCASE("answer-kind disabled") {
    MockBackend agent({{std::nullopt, kWrongAnswerTurn, {0.9}}});
    MockBackend experience({});
    GuidanceEngine engine(experience, nullptr);
    EpisodeConfig config = base_config();
    config.answer_enabled = false;
    auto env = make_env();
    const EpisodeReport report =
        run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
    CHECK(report.intervention_count == 0);
    CHECK(report.final_answer == "The pine");
    CHECK(experience.call_count() == 0);
  }
  SUBCASE("process-kind disabled") {
    MockBackend agent({{std::nullopt, kToolTurn, {0.9}},
                       {std::nullopt, kAnswerTurn, {0.1}}});
    MockBackend experience({});
    GuidanceEngine engine(experience, nullptr);
    EpisodeConfig config = base_config();
    config.process_enabled = false;
    auto env = make_env();
    const EpisodeReport report =
        run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
    CHECK(report.intervention_count == 0);
    CHECK(experience.call_count() == 0);
  }
}

TEST_CASE("vanilla mode never touches the experience model") {
  MockBackend agent({{std::nullopt, kWrongAnswerTurn, {0.9}}});
  MockBackend experience({});
  GuidanceEngine engine(experience, nullptr);
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  auto env = make_env();
  (void)run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
  CHECK(experience.call_count() == 0);
}

TEST_CASE("aborted guidance keeps the answer terminal") {
  MockBackend agent({{std::nullopt, kWrongAnswerTurn, {0.9}}});
  MockBackend experience(
      {{std::nullopt, "junk", {}}, {std::nullopt, "junk", {}}});
  GuidanceEngine engine(experience, nullptr);
  EpisodeConfig config = base_config();
  auto env = make_env();
  const EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, &engine);
  CHECK(report.trajectory.outcome() == Outcome::Success);
  CHECK(report.final_answer == "The pine");
  CHECK(report.intervention_count == 0);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].find("intervention aborted") !=
        std::string::npos);
}

TEST_CASE("run_batch executes the grid deterministically") {
  const std::vector<QuerySpec> queries = {{"q1", "what tree?"},
                                          {"q2", "what river?"}};
  auto factory = [](const QuerySpec&, std::size_t) {
    EpisodeCollaborators c;
    c.agent_model = std::make_shared<MockBackend>(std::vector<ScriptTurn>{
        {std::nullopt, kToolTurn, {0.1}}, {std::nullopt, kAnswerTurn, {0.1}}});
    c.env = make_env();
    return c;
  };
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  const auto run_once = [&] {
    return run_batch(queries, 2, config, factory);
  };
  const auto reports = run_once();
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].trajectory.query_id() == "q1");
  CHECK(reports[1].trajectory.run_index() == 1);
  CHECK(reports[2].trajectory.query_id() == "q2");

  const auto again = run_once();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    CHECK(to_json(reports[i].trajectory) == to_json(again[i].trajectory));
  }
}

TEST_CASE("one broken episode does not poison the batch") {
  const std::vector<QuerySpec> queries = {{"q1", "a"}, {"q2", "b"}};
  auto factory = [](const QuerySpec& q, std::size_t) {
    EpisodeCollaborators c;
    if (q.query_id == "q1") {
      c.agent_model = std::make_shared<MockBackend>(std::vector<ScriptTurn>{});
    } else {
      c.agent_model = std::make_shared<MockBackend>(std::vector<ScriptTurn>{
          {std::nullopt, kAnswerTurn, {0.1}}});
    }
    c.env = make_env();
    return c;
  };
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  const auto reports = run_batch(queries, 1, config, factory);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].trajectory.outcome() == Outcome::Failure);
  CHECK(reports[1].trajectory.outcome() == Outcome::Success);
}

TEST_CASE("reports round-trip through JSONL") {
  MockBackend agent({{std::nullopt, kAnswerTurn, {0.1}}});
  EpisodeConfig config = base_config();
  config.triggers_enabled = false;
  auto env = make_env();
  EpisodeReport report =
      run_episode({"q1", "what tree?"}, 0, config, agent, *env, nullptr);
  report.judge_verdict = true;
  const EpisodeReport back = report_from_json(report_to_json(report));
  CHECK(to_json(back.trajectory) == to_json(report.trajectory));
  CHECK(back.final_answer == report.final_answer);
  CHECK(back.judge_verdict == true);
  CHECK(back.usage.agent_calls == report.usage.agent_calls);
}
