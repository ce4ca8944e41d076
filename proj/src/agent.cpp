// SPDX-License-Identifier: Apache-2.0
#include "expseek/agent.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"
#include "expseek/prompts.hpp"

namespace expseek {

namespace {

constexpr const char* kSearchFormat =
    "1. search: <tool_call>{\"search\": [\"query one\", \"query two\"]}"
    "</tool_call> — a JSON object whose \"search\" key holds a list of 1 to 4 "
    "query strings.";
constexpr const char* kVisitFormat =
    "2. visit: <tool_call>{\"visit\": {\"url\": \"https://site\", \"goal\": "
    "\"what to find out\"}}</tool_call> — a JSON object whose \"visit\" key "
    "holds the absolute url and the goal of the visit.";
constexpr const char* kExample =
    "user: Who wrote the novel adapted into the 1999 film mentioned in the "
    "question?\n"
    "assistant: <thought>I should search for the film first.</thought> "
    "<tool_call>{\"search\": [\"1999 film adaptation novel\"]}</tool_call>\n"
    "user: <tool_response>A Google search for '1999 film adaptation novel' "
    "found 2 results: ...</tool_response>\n"
    "assistant: <thought>The first result names the author; I can answer."
    "</thought> <answer>Jane Doe</answer>";

constexpr const char* kFormatReminder =
    "Your previous reply was not in the required format. Reply again with a "
    "<thought></thought> block followed by exactly one <tool_call></tool_call> "
    "or <answer></answer> block.";

std::string observation_message(const std::string& observation) {
  return "<tool_response>" + observation + "</tool_response>";
}

}  // namespace

void EpisodeConfig::validate() const {
  if (max_steps < 1) {
    throw Error(ErrorCode::ValidationError, "max_steps must be >= 1");
  }
  if (temperature < 0.0 || top_p <= 0.0 || top_p > 1.0) {
    throw Error(ErrorCode::ValidationError, "bad sampling parameters");
  }
}

std::string build_system_prompt() {
  const PromptAsset asset = load_prompt(prompt_names::kReactSystem);
  return render_prompt(asset, {{"search_format", kSearchFormat},
                               {"visit_format", kVisitFormat},
                               {"example", kExample}});
}

std::string render_history(const std::vector<Message>& messages) {
  std::ostringstream os;
  for (const auto& m : messages) {
    if (m.role == Role::System) continue;
    os << (m.role == Role::User ? "user: " : "assistant: ") << m.content
       << "\n";
  }
  return os.str();
}

EpisodeReport run_episode(const QuerySpec& query, std::size_t run_index,
                          const EpisodeConfig& config, Backend& agent_model,
                          ToolEnvironment& env,
                          const GuidanceEngine* guidance) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  EpisodeReport report;
  report.trajectory =
      Trajectory(query.query_id, query.question, run_index, config.max_steps);
  Trajectory& traj = report.trajectory;
  Rng rng(config.seed);

  std::vector<Message> messages;
  messages.push_back({Role::System, build_system_prompt()});
  messages.push_back({Role::User, query.question});

  // Step index of the most recent intervention, for the silence rule.
  std::optional<std::size_t> last_intervention;

  auto finish = [&](Outcome outcome) {
    if (!traj.finalized()) traj.finalize(outcome);
    report.step_count = traj.steps().size();
    report.intervention_count = traj.intervention_count();
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  };

  try {
    while (traj.steps().size() < config.max_steps) {
      ChatRequest req;
      req.messages = messages;
      req.temperature = config.temperature;
      req.top_p = config.top_p;
      req.want_logprobs = agent_model.supports_logprobs();
      req.top_k_alternatives = config.top_k_alternatives;

      ChatResponse resp = agent_model.complete(req);
      report.usage.agent_calls++;
      if (resp.tokens) report.usage.agent_tokens += resp.tokens->size();

      StepFragment frag;
      try {
        frag = parse_response(resp.text, config.tags);
      } catch (const ParseError& first) {
        report.diagnostics.push_back(std::string("parse retry: ") +
                                     first.what());
        messages.push_back({Role::Assistant, resp.text});
        messages.push_back({Role::User, kFormatReminder});
        ChatRequest retry_req = req;
        retry_req.messages = messages;
        resp = agent_model.complete(retry_req);
        report.usage.agent_calls++;
        if (resp.tokens) report.usage.agent_tokens += resp.tokens->size();
        try {
          frag = parse_response(resp.text, config.tags);
        } catch (const ParseError& second) {
          report.diagnostics.push_back(
              std::string("episode failed, unparsable turn: ") +
              second.what());
          finish(Outcome::Failure);
          return report;
        }
      }

      const StepEntropy entropy =
          resp.tokens ? step_entropy(*resp.tokens) : StepEntropy{};

      Step step;
      step.kind = frag.kind;
      step.reasoning = frag.reasoning;
      step.tool_call = frag.tool_call;
      step.answer = frag.answer;
      step.entropy = entropy;

      const std::size_t step_index = traj.steps().size();
      const bool kind_enabled = frag.kind == StepKind::Process
                                    ? config.process_enabled
                                    : config.answer_enabled;
      const bool armed =
          !last_intervention ||
          step_index - *last_intervention > config.silence_length;
      const bool under_cap =
          config.max_interventions == 0 ||
          traj.intervention_count() < config.max_interventions;

      bool fired = false;
      double probability = 0.0;
      if (config.triggers_enabled && kind_enabled && guidance != nullptr &&
          armed && under_cap) {
        const ThresholdInterval& interval = frag.kind == StepKind::Process
                                                ? config.process_interval
                                                : config.answer_interval;
        probability = intervention_probability(entropy.value, interval);
        report.trigger_checks++;
        const TriggerDecision decision =
            sample_trigger(probability, entropy.value, false, rng);
        fired = decision.intervene;
        if (fired) report.trigger_fires++;
      }

      messages.push_back({Role::Assistant, resp.text});

      if (frag.kind == StepKind::Process) {
        std::string observation;
        const ToolCall& call = *frag.tool_call;
        if (call.tool == ToolKind::Search) {
          observation = run_search(env, call.queries);
        } else {
          observation = run_visit(env, call.url, call.goal);
        }
        report.usage.tool_calls++;

        std::string user_turn = observation_message(observation);
        if (fired) {
          std::vector<Message> with_obs = messages;
          with_obs.push_back({Role::User, user_turn});
          GuidanceRequest greq{render_history(with_obs), StepKind::Process};
          try {
            const GuidanceResult g = guidance->generate(greq);
            report.usage.experience_calls++;
            step.intervention = InterventionRecord{
                g.guidance_text, g.selected_topic_ids, probability,
                entropy.value};
            observation = inject_into_observation(observation, g.guidance_text,
                                                  config.tags);
            user_turn = observation_message(observation);
            last_intervention = step_index;
          } catch (const Error& e) {
            report.diagnostics.push_back(
                std::string("intervention aborted: ") + e.what());
          }
        }
        step.observation = observation;
        traj.append_step(std::move(step));
        messages.push_back({Role::User, user_turn});
        continue;
      }

      // Answer step.
      if (fired) {
        GuidanceRequest greq{render_history(messages), StepKind::Answer};
        try {
          const GuidanceResult g = guidance->generate(greq);
          report.usage.experience_calls++;
          step.intervention = InterventionRecord{
              g.guidance_text, g.selected_topic_ids, probability,
              entropy.value};
          traj.append_step(std::move(step));
          traj.supersede_last_answer();
          last_intervention = step_index;
          // The answer turn stays an assistant turn; the guidance alone forms
          // the next environment turn.
          messages.push_back(
              {Role::User, wrap_guidance(g.guidance_text, config.tags)});
          continue;
        } catch (const Error& e) {
          report.diagnostics.push_back(std::string("intervention aborted: ") +
                                       e.what());
        }
      }
      report.final_answer = frag.answer;
      traj.append_step(std::move(step));
      finish(Outcome::Success);
      return report;
    }
    finish(Outcome::StepBudgetExhausted);
  } catch (const Error& e) {
    report.diagnostics.push_back(std::string("episode error: ") + e.what());
    finish(Outcome::Failure);
  }
  return report;
}

std::vector<EpisodeReport> run_batch(const std::vector<QuerySpec>& queries,
                                     std::size_t runs_per_query,
                                     const EpisodeConfig& config,
                                     const CollaboratorFactory& factory) {
  if (runs_per_query < 1) {
    throw Error(ErrorCode::ValidationError, "runs_per_query must be >= 1");
  }
  const Rng master(config.seed);
  std::vector<EpisodeReport> reports;
  reports.reserve(queries.size() * runs_per_query);
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    for (std::size_t run = 0; run < runs_per_query; ++run) {
      EpisodeConfig episode_config = config;
      episode_config.seed =
          master.substream(qi * runs_per_query + run).seed();
      EpisodeCollaborators collab = factory(queries[qi], run);
      try {
        reports.push_back(run_episode(queries[qi], run, episode_config,
                                      *collab.agent_model, *collab.env,
                                      collab.guidance.get()));
      } catch (const Error& e) {
        EpisodeReport failed;
        failed.trajectory = Trajectory(queries[qi].query_id,
                                       queries[qi].question, run,
                                       episode_config.max_steps);
        failed.trajectory.finalize(Outcome::Failure);
        failed.diagnostics.push_back(std::string("episode aborted: ") +
                                     e.what());
        reports.push_back(std::move(failed));
      }
    }
  }
  return reports;
}

std::string report_to_json(const EpisodeReport& report) {
  nlohmann::json j;
  j["trajectory"] = nlohmann::json::parse(to_json(report.trajectory));
  if (report.final_answer) j["final_answer"] = *report.final_answer;
  if (report.judge_verdict) j["judge_verdict"] = *report.judge_verdict;
  j["step_count"] = report.step_count;
  j["intervention_count"] = report.intervention_count;
  j["trigger_checks"] = report.trigger_checks;
  j["trigger_fires"] = report.trigger_fires;
  j["wall_time_s"] = report.wall_time_s;
  j["usage"] = {{"agent_calls", report.usage.agent_calls},
                {"agent_tokens", report.usage.agent_tokens},
                {"experience_calls", report.usage.experience_calls},
                {"tool_calls", report.usage.tool_calls}};
  j["diagnostics"] = report.diagnostics;
  return j.dump();
}

EpisodeReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EpisodeReport report;
  report.trajectory = trajectory_from_json(j.at("trajectory").dump());
  if (j.contains("final_answer")) {
    report.final_answer = j.at("final_answer").get<std::string>();
  }
  if (j.contains("judge_verdict")) {
    report.judge_verdict = j.at("judge_verdict").get<bool>();
  }
  report.step_count = j.value("step_count", std::size_t{0});
  report.intervention_count = j.value("intervention_count", std::size_t{0});
  report.trigger_checks = j.value("trigger_checks", std::size_t{0});
  report.trigger_fires = j.value("trigger_fires", std::size_t{0});
  report.wall_time_s = j.value("wall_time_s", 0.0);
  if (j.contains("usage")) {
    const auto& u = j.at("usage");
    report.usage.agent_calls = u.value("agent_calls", std::size_t{0});
    report.usage.agent_tokens = u.value("agent_tokens", std::size_t{0});
    report.usage.experience_calls = u.value("experience_calls", std::size_t{0});
    report.usage.tool_calls = u.value("tool_calls", std::size_t{0});
  }
  report.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  return report;
}

void save_reports(const std::string& path,
                  const std::vector<EpisodeReport>& reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::ValidationError, "cannot open report file: " + path);
  }
  for (const auto& r : reports) out << report_to_json(r) << '\n';
}

std::vector<EpisodeReport> load_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open report file: " + path);
  }
  std::vector<EpisodeReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    out.push_back(report_from_json(line));
  }
  return out;
}

}  // namespace expseek
