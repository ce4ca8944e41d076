// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "expseek/entropy.hpp"
#include "expseek/gateway.hpp"
#include "expseek/trajectory.hpp"

namespace expseek {

/// Behavior/Mistake/Guidance record distilled from one incorrect step of a
/// failed trajectory, by contrast with a paired successful one.
struct ExperienceTriplet {
  std::string id;
  std::string behavior;
  std::string mistake;
  std::string guidance;
  StepKind step_kind = StepKind::Process;
  std::optional<std::string> topic_id;
  std::string source_query_id;
  std::size_t source_run_index = 0;
  std::size_t source_step_index = 0;

  void validate() const;
  bool operator==(const ExperienceTriplet&) const = default;
};

struct Topic {
  std::string topic_id;
  std::string label_text;  // scenario-narrative description
  std::vector<std::string> member_ids;

  bool operator==(const Topic&) const = default;
};

struct ExperienceCollection {
  std::vector<Topic> topics;
  std::vector<ExperienceTriplet> triplets;

  const Topic* find_topic(const std::string& topic_id) const;
  bool operator==(const ExperienceCollection&) const = default;
};

struct ExperienceBase {
  std::string agent_model;
  std::uint64_t construction_seed = 0;
  ExperienceCollection process;
  ExperienceCollection answer;

  const ExperienceCollection& collection(StepKind kind) const {
    return kind == StepKind::Process ? process : answer;
  }
  void validate() const;
  bool operator==(const ExperienceBase&) const = default;
};

std::string to_json(const ExperienceBase& base);
ExperienceBase experience_base_from_json(const std::string& text);
void save_base(const std::string& path, const ExperienceBase& base);
ExperienceBase load_base(const std::string& path);

/// One judged trajectory of one query run.
struct JudgedRun {
  Trajectory trajectory;
  bool success = false;
};

struct TrajectoryPair {
  const Trajectory* success = nullptr;
  const Trajectory* failure = nullptr;
};

struct PairingResult {
  std::vector<TrajectoryPair> pairs;
  /// Steps of all-successful trajectories, pre-labeled correct.
  std::vector<EntropySample> success_samples;
};

/// Pair every failed run with the first successful run of the same query
/// (stable order). Queries with all-success or all-failure yield no pairs;
/// successful-trajectory steps enter the correct pool immediately.
PairingResult pair_runs(const std::vector<JudgedRun>& runs);

/// Per-step labels plus triplets extracted from one pair via the tool model.
struct ExtractionResult {
  std::vector<Correctness> labels;  // one per step of the failed trajectory
  std::vector<ExperienceTriplet> triplets;
};

/// Render the extraction prompt, call the tool model, and parse the mandated
/// STEP-block markdown. One retry on a malformed reply, then extraction
/// error. At least one triplet must be present.
ExtractionResult extract_triplets(const TrajectoryPair& pair,
                                  const std::string& question,
                                  const std::string& labeled_answer,
                                  Backend& tool_model);

/// Parse the extraction reply alone (exposed for tests).
ExtractionResult parse_extraction_reply(const std::string& reply,
                                        const TrajectoryPair& pair);

/// Iterative batch topic induction over one collection. Each round feeds all
/// previously labeled triplets plus the next batch and replaces the running
/// assignment from the reply (Modify may relabel earlier ids).
std::map<std::string, std::string> induce_topics(
    std::vector<ExperienceTriplet>& triplets, Backend& tool_model,
    std::size_t batch_size = 20);

/// Parse one induction reply: lines of `id | label`. Must cover all required
/// ids; throws consistency error otherwise.
std::map<std::string, std::string> parse_topic_reply(
    const std::string& reply, const std::vector<std::string>& required_ids);

/// Render a trajectory as the R/O text form the extraction prompt expects.
std::string render_trajectory_text(const Trajectory& trajectory);

struct QueryWithAnswer {
  std::string query_id;
  std::string question;
  std::string labeled_answer;
};

std::vector<QueryWithAnswer> load_queries(const std::string& path);

/// Full construction output: the base plus the labeled entropy export that
/// feeds threshold estimation.
struct ConstructionResult {
  ExperienceBase base;
  std::vector<EntropySample> entropy_samples;
  std::size_t pair_count = 0;
  std::size_t analyzed_step_count = 0;
  std::vector<std::string> warnings;
};

/// Offline construction over already-judged runs grouped by query.
ConstructionResult build_experience_base(
    const std::vector<QueryWithAnswer>& queries,
    const std::map<std::string, std::vector<JudgedRun>>& runs_by_query,
    Backend& tool_model, const std::string& agent_model, std::uint64_t seed);

std::string entropy_samples_to_jsonl(const std::vector<EntropySample>& samples);
std::vector<EntropySample> entropy_samples_from_jsonl(const std::string& text);

}  // namespace expseek
