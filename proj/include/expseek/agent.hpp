// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "expseek/gateway.hpp"
#include "expseek/guidance.hpp"
#include "expseek/rng.hpp"
#include "expseek/trajectory.hpp"
#include "expseek/trigger.hpp"
#include "expseek/web_tools.hpp"

namespace expseek {

/// Per-episode settings. The per-kind enablement flags support the
/// process-only / answer-only ablations; triggers_enabled=false is vanilla
/// mode (no experience model call ever happens).
struct EpisodeConfig {
  std::size_t max_steps = 30;
  double temperature = 1.0;
  double top_p = 0.95;
  std::size_t top_k_alternatives = 20;
  TagConvention tags;
  ThresholdInterval process_interval;
  ThresholdInterval answer_interval;
  bool triggers_enabled = true;
  bool process_enabled = true;
  bool answer_enabled = true;
  std::size_t silence_length = 1;  // steps disabled after an intervention
  std::size_t max_interventions = 0;  // 0 = unbounded (cost cap only)
  std::uint64_t seed = 0;

  void validate() const;
};

struct TokenUsage {
  std::size_t agent_calls = 0;
  std::size_t agent_tokens = 0;
  std::size_t experience_calls = 0;
  std::size_t tool_calls = 0;
};

struct EpisodeReport {
  Trajectory trajectory;
  std::optional<std::string> final_answer;
  std::optional<bool> judge_verdict;  // filled during evaluation
  std::size_t step_count = 0;
  std::size_t intervention_count = 0;
  std::size_t trigger_checks = 0;  // armed checks only
  std::size_t trigger_fires = 0;
  double wall_time_s = 0.0;
  TokenUsage usage;
  std::vector<std::string> diagnostics;
};

/// Assemble the deployed system prompt (tool formats + worked example bound
/// into the shipped template).
std::string build_system_prompt();

/// Render the message history (query plus all turns, system prompt excluded)
/// as the h_t text shown to the experience model.
std::string render_history(const std::vector<Message>& messages);

struct QuerySpec {
  std::string query_id;
  std::string question;
};

/// One think->act->observe episode. `guidance` may be null (vanilla mode).
EpisodeReport run_episode(const QuerySpec& query, std::size_t run_index,
                          const EpisodeConfig& config, Backend& agent_model,
                          ToolEnvironment& env, const GuidanceEngine* guidance);

/// Per-episode collaborators; mock backends are stateful, so a fresh set is
/// built for every (query, run) cell.
struct EpisodeCollaborators {
  std::shared_ptr<Backend> agent_model;
  std::shared_ptr<ToolEnvironment> env;
  std::shared_ptr<GuidanceEngine> guidance;  // may be null
};

using CollaboratorFactory = std::function<EpisodeCollaborators(
    const QuerySpec& query, std::size_t run_index)>;

/// Query x run grid with per-episode derived seeds; reports ordered by
/// (query position, run_index). Individual episode failures are recorded in
/// their report and the batch continues.
std::vector<EpisodeReport> run_batch(const std::vector<QuerySpec>& queries,
                                     std::size_t runs_per_query,
                                     const EpisodeConfig& config,
                                     const CollaboratorFactory& factory);

std::string report_to_json(const EpisodeReport& report);
EpisodeReport report_from_json(const std::string& text);
void save_reports(const std::string& path,
                  const std::vector<EpisodeReport>& reports);
std::vector<EpisodeReport> load_reports(const std::string& path);

}  // namespace expseek
