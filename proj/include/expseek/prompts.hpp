// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace expseek {

/// A prompt template shipped as an external asset. Placeholders are
/// `{identifier}` tokens; rendering is pure substitution so the shipped text
/// reaches the model byte-for-byte.
struct PromptAsset {
  std::string name;
  std::string text;
  std::uint64_t checksum = 0;  // FNV-1a over the template text

  std::vector<std::string> placeholders() const;
};

/// Resolve the prompt directory: EXPSEEK_PROMPT_DIR env var when set, else
/// the compiled-in default asset path.
std::string prompt_directory();

PromptAsset load_prompt(const std::string& name);
PromptAsset prompt_from_text(const std::string& name, const std::string& text);

/// Substitute every placeholder. Throws ConfigError naming the placeholder
/// when a binding is missing; unused bindings are ignored.
std::string render_prompt(const PromptAsset& asset,
                          const std::map<std::string, std::string>& bindings);

std::uint64_t fnv1a(const std::string& text);

/// Canonical asset names.
namespace prompt_names {
inline constexpr const char* kReactSystem = "react_system";
inline constexpr const char* kTripletExtraction = "triplet_extraction";
inline constexpr const char* kTopicInduction = "topic_induction";
inline constexpr const char* kTopicSelection = "topic_selection";
inline constexpr const char* kGuidanceGeneration = "guidance_generation";
inline constexpr const char* kDirectGuidance = "direct_guidance";
inline constexpr const char* kTriggerJudge = "trigger_judge";
inline constexpr const char* kRetrievalGuidance = "retrieval_guidance";
inline constexpr const char* kJudge = "judge";
}  // namespace prompt_names

}  // namespace expseek
