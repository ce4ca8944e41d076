// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expseek/agent.hpp"
#include "expseek/experience.hpp"
#include "expseek/gateway.hpp"

namespace expseek {

struct JudgeVerdict {
  bool correct = false;
  std::string raw_reply;
};

/// Strict LLM-as-judge verdict: the reply must be exactly "Correct" or
/// "Incorrect" after trimming. Anything else gets one retry, then a
/// judge-error (never a guessed verdict).
JudgeVerdict judge(const std::string& question,
                   const std::string& labeled_answer,
                   const std::string& predicted_answer, Backend& judge_model);

struct MetricsReport {
  double accuracy = 0.0;            // mean over runs of per-run accuracy
  std::optional<double> pass_at_k;
  std::size_t k = 0;
  double avg_steps = 0.0;
  double avg_interventions = 0.0;
  double rejection_rate = 0.0;  // non-fires among armed trigger checks
  std::size_t judged_episodes = 0;
  std::size_t judge_errors = 0;  // excluded from accuracy
};

/// Verdicts grouped per query in stable run order; std::nullopt marks a
/// judge-error (excluded from accuracy, counted separately).
using VerdictTable = std::map<std::string, std::vector<std::optional<bool>>>;

double accuracy(const VerdictTable& verdicts);

/// Fraction of queries with >= 1 correct verdict among the first k runs.
/// Every query must have at least k runs.
double pass_at_k(const VerdictTable& verdicts, std::size_t k);

/// Judge every answered episode in the report list (in place: fills
/// judge_verdict) and aggregate metrics. Unanswered episodes count as
/// incorrect; judge-errors are excluded from accuracy.
MetricsReport evaluate_reports(std::vector<EpisodeReport>& reports,
                               const std::map<std::string, std::string>&
                                   labeled_answers_by_query,
                               Backend& judge_model, std::size_t k);

std::string to_json(const MetricsReport& report);

enum class TriggerPolicy { Entropy, Rule, ModelJudged };

/// Comparison trigger decision for one armed step. The rule policy always
/// fires; the model-judged policy asks the Whether-to-Provide-Guidance
/// prompt and fires on "yes" (an unparsable reply counts as "no").
bool comparison_trigger_fires(TriggerPolicy policy, const std::string& history,
                              Backend* trigger_model,
                              std::vector<std::string>* warnings = nullptr);

/// Parse the "# Whether to Provide Guidance" yes/no section.
std::optional<bool> parse_trigger_judge_reply(const std::string& reply);

/// Embedding-retrieval comparison variant: render the nearest triplet (by a
/// pluggable similarity; default token overlap) through the
/// resembles-a-previous-mistake template instead of generating guidance.
using SimilarityFn = double (*)(const std::string&, const std::string&);
double token_overlap_similarity(const std::string& a, const std::string& b);
std::string retrieval_guidance(const std::string& history,
                               const ExperienceCollection& collection,
                               SimilarityFn similarity = nullptr);

struct EntropyShiftReport {
  double process_mean_vanilla = 0.0;
  double process_mean_expseek = 0.0;
  double process_shift = 0.0;
  double answer_mean_vanilla = 0.0;
  double answer_mean_expseek = 0.0;
  double answer_shift = 0.0;
  std::vector<HistogramBin> process_histogram;  // correct = vanilla side
  std::vector<HistogramBin> answer_histogram;
  bool no_interventions = false;
};

/// Before/after step-entropy comparison (superseded answer turns included).
EntropyShiftReport entropy_shift_report(
    const std::vector<EpisodeReport>& vanilla,
    const std::vector<EpisodeReport>& expseek, std::size_t bins = 20);

std::string to_json(const EntropyShiftReport& report);

}  // namespace expseek
