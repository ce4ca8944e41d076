// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expseek/entropy.hpp"

namespace expseek {

enum class ToolKind { Search, Visit };

/// A parsed tool invocation. Search carries 1..4 query strings; Visit carries
/// an absolute URL plus a goal description.
struct ToolCall {
  ToolKind tool = ToolKind::Search;
  std::vector<std::string> queries;  // search
  std::string url;                   // visit
  std::string goal;                  // visit

  void validate() const;
  bool operator==(const ToolCall&) const = default;
};

inline constexpr std::size_t kMaxSearchQueries = 4;

/// Guidance injected at one step, with full audit fields.
struct InterventionRecord {
  std::string guidance_text;
  std::vector<std::string> topics_used;  // <= 3
  double trigger_probability = 0.0;
  double entropy_at_trigger = 0.0;

  void validate() const;
  bool operator==(const InterventionRecord&) const = default;
};

/// One trajectory step. Process steps carry a tool call and (once the
/// environment replied) an observation; answer steps carry the final answer.
/// An answer step that received guidance and was continued past is kept with
/// `superseded` set, so exactly one live answer step remains at episode end.
struct Step {
  StepKind kind = StepKind::Process;
  std::string reasoning;
  std::optional<ToolCall> tool_call;
  std::optional<std::string> observation;
  std::optional<std::string> answer;
  StepEntropy entropy;
  std::optional<InterventionRecord> intervention;
  bool superseded = false;

  bool operator==(const Step&) const = default;
};

enum class Outcome { Pending, Success, Failure, StepBudgetExhausted };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

/// Tag names used when rendering/parsing model turns. The deployed prompts
/// use <thought>; <think> is supported for compatibility.
struct TagConvention {
  std::string thought_tag = "thought";
  std::string guidance_tag = "guidance";

  static TagConvention thought_tags() { return {"thought", "guidance"}; }
  static TagConvention think_tags() { return {"think", "guidance"}; }
};

/// The parsed content of one model turn, before entropy annotation.
struct StepFragment {
  StepKind kind = StepKind::Process;
  std::string reasoning;
  std::optional<ToolCall> tool_call;  // process
  std::optional<std::string> answer;  // answer

  bool operator==(const StepFragment&) const = default;
};

/// Extract <thought>/<tool_call>/<answer> blocks from a complete model turn.
/// Throws ParseError (with the offending span) on missing or unbalanced tags,
/// ambiguity (both tool call and answer), or an absent second block.
StepFragment parse_response(const std::string& raw, const TagConvention& tags);

/// Render a fragment back to tagged text. parse_response is its left inverse.
std::string render_fragment(const StepFragment& fragment,
                            const TagConvention& tags);

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::string query_id, std::string query, std::size_t run_index,
             std::size_t max_steps = 30);

  /// Append preserving invariants: no append after finalize, budget honored,
  /// no appends after a live (non-superseded) answer step, no two consecutive
  /// interventions.
  void append_step(Step step);

  /// Mark the current live answer step superseded (it received guidance and
  /// the episode continues). Requires that the last step is a live answer.
  void supersede_last_answer();

  void finalize(Outcome outcome);

  bool finalized() const { return outcome_ != Outcome::Pending; }
  Outcome outcome() const { return outcome_; }
  const std::string& query_id() const { return query_id_; }
  const std::string& query() const { return query_; }
  std::size_t run_index() const { return run_index_; }
  std::size_t max_steps() const { return max_steps_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t intervention_count() const;

  /// Re-checks every structural invariant; throws ValidationError on breach.
  void validate() const;

  bool operator==(const Trajectory&) const = default;

 private:
  std::string query_id_;
  std::string query_;
  std::size_t run_index_ = 0;
  std::size_t max_steps_ = 30;
  std::vector<Step> steps_;
  Outcome outcome_ = Outcome::Pending;
};

std::string to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const std::string& text);

/// Line-delimited trajectory store, one trajectory per line, schema-versioned.
struct TrajectoryLoadResult {
  std::vector<Trajectory> trajectories;
  std::vector<std::pair<std::size_t, std::string>> errors;  // (line, message)
};

void save_trajectories(const std::string& path,
                       const std::vector<Trajectory>& trajectories);
void append_trajectory(const std::string& path, const Trajectory& trajectory);
TrajectoryLoadResult load_trajectories(const std::string& path);

inline constexpr int kTrajectorySchemaVersion = 1;

}  // namespace expseek
