// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "expseek/experience.hpp"
#include "expseek/gateway.hpp"
#include "expseek/trajectory.hpp"

namespace expseek {

/// Context handed to the experience model when a trigger fires.
struct GuidanceRequest {
  std::string history;  // rendered multi-turn context through the current step
  StepKind step_kind = StepKind::Process;
};

struct GuidanceResult {
  std::vector<std::string> selected_topic_ids;  // <= 3
  std::string guidance_text;
  std::string stage_one_transcript;  // raw replies, kept for audit
  std::string stage_two_transcript;
  bool selection_fallback = false;  // stage one fell back to largest topics
  bool direct_route = false;        // empty base: base-free prompt used
};

/// Stage one: pick <= 3 topic indices from the candidate list. Fewer than
/// four candidates are returned wholesale without a model call. Unparsable
/// replies get one retry, then the three largest topics by member count.
std::vector<std::size_t> select_topics(const std::string& history,
                                       const std::vector<Topic>& candidates,
                                       Backend& experience_model,
                                       std::string* transcript = nullptr,
                                       bool* used_fallback = nullptr);

/// Parse the "# Selected Topic idx" line: space-separated 0-based indices,
/// out-of-range entries dropped. Throws ParseError when the section is
/// missing or yields no valid index.
std::vector<std::size_t> parse_topic_selection(const std::string& reply,
                                               std::size_t candidate_count);

/// Stage two: adapt the triplets under the selected topics into step-tailored
/// guidance. One retry on an unparsable reply, then throws (the caller aborts
/// the intervention).
std::string generate_guidance(const std::string& history,
                              const ExperienceCollection& collection,
                              const std::vector<std::size_t>& selected,
                              Backend& experience_model,
                              std::string* transcript = nullptr);

/// Extract the "# Guidance Content" section body. Throws ParseError when the
/// header is absent or the body is empty.
std::string parse_guidance_reply(const std::string& reply);

/// Base-free variant: direct guidance from the history alone.
std::string generate_direct_guidance(const std::string& history,
                                     Backend& experience_model,
                                     std::string* transcript = nullptr);

std::string wrap_guidance(const std::string& guidance,
                          const TagConvention& tags);

/// Process-step injection: guidance appended to the observation text.
std::string inject_into_observation(const std::string& observation,
                                    const std::string& guidance,
                                    const TagConvention& tags);

/// Render the stage-one candidate list ("idx. label" lines, 0-based).
std::string render_topic_list(const std::vector<Topic>& topics);

/// Render the stage-two knowledge block: every triplet under each selected
/// topic, grouped by topic label.
std::string render_topic_kb(const ExperienceCollection& collection,
                            const std::vector<std::size_t>& selected);

class GuidanceEngine {
 public:
  GuidanceEngine(Backend& experience_model, const ExperienceBase* base)
      : experience_model_(&experience_model), base_(base) {}

  /// Full two-stage protocol (or the direct route when the matching
  /// collection is empty). Throws when stage two fails after its retry.
  GuidanceResult generate(const GuidanceRequest& request) const;

 private:
  Backend* experience_model_;
  const ExperienceBase* base_;  // may be null (vanilla / base-free)
};

}  // namespace expseek
