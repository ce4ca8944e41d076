// SPDX-License-Identifier: Apache-2.0
#include "expseek/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"
#include "expseek/prompts.hpp"

namespace expseek {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::set<std::string> word_set(const std::string& s) {
  std::set<std::string> out;
  std::string word;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!word.empty()) {
      out.insert(word);
      word.clear();
    }
  }
  if (!word.empty()) out.insert(word);
  return out;
}

}  // namespace

JudgeVerdict judge(const std::string& question,
                   const std::string& labeled_answer,
                   const std::string& predicted_answer, Backend& judge_model) {
  if (question.empty() || labeled_answer.empty() || predicted_answer.empty()) {
    throw Error(ErrorCode::EmptyInput, "judge inputs must be non-empty");
  }
  const PromptAsset asset = load_prompt(prompt_names::kJudge);
  const std::string prompt =
      render_prompt(asset, {{"question", question},
                            {"correct_answer", labeled_answer},
                            {"response", predicted_answer}});
  ChatRequest req;
  req.messages = {{Role::User, prompt}};
  std::string last_reply;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse resp = judge_model.complete(req);
    const std::string reply = trim(resp.text);
    if (reply == "Correct") return {true, resp.text};
    if (reply == "Incorrect") return {false, resp.text};
    last_reply = reply;
  }
  throw Error(ErrorCode::JudgeError,
              "judge reply is neither Correct nor Incorrect: " + last_reply);
}

double accuracy(const VerdictTable& verdicts) {
  if (verdicts.empty()) {
    throw Error(ErrorCode::EmptyInput, "no verdicts");
  }
  std::size_t max_runs = 0;
  for (const auto& [q, vs] : verdicts) {
    (void)q;
    max_runs = std::max(max_runs, vs.size());
  }
  double sum = 0.0;
  std::size_t runs_counted = 0;
  for (std::size_t r = 0; r < max_runs; ++r) {
    std::size_t judged = 0;
    std::size_t correct = 0;
    for (const auto& [q, vs] : verdicts) {
      (void)q;
      if (r >= vs.size() || !vs[r].has_value()) continue;
      ++judged;
      if (*vs[r]) ++correct;
    }
    if (judged == 0) continue;
    sum += static_cast<double>(correct) / static_cast<double>(judged);
    ++runs_counted;
  }
  return runs_counted == 0 ? 0.0 : sum / static_cast<double>(runs_counted);
}

double pass_at_k(const VerdictTable& verdicts, std::size_t k) {
  if (verdicts.empty()) {
    throw Error(ErrorCode::EmptyInput, "no verdicts");
  }
  if (k < 1) {
    throw Error(ErrorCode::ValidationError, "k must be >= 1");
  }
  std::size_t hit = 0;
  for (const auto& [query, vs] : verdicts) {
    if (vs.size() < k) {
      throw Error(ErrorCode::ValidationError,
                  "query " + query + " has fewer than k runs");
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (vs[r].has_value() && *vs[r]) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(verdicts.size());
}

MetricsReport evaluate_reports(
    std::vector<EpisodeReport>& reports,
    const std::map<std::string, std::string>& labeled_answers_by_query,
    Backend& judge_model, std::size_t k) {
  if (reports.empty()) {
    throw Error(ErrorCode::EmptyInput, "no reports to evaluate");
  }
  MetricsReport metrics;
  metrics.k = k;
  VerdictTable verdicts;
  double steps = 0.0;
  double interventions = 0.0;
  std::size_t checks = 0;
  std::size_t fires = 0;
  for (auto& report : reports) {
    const std::string& qid = report.trajectory.query_id();
    std::optional<bool> verdict;
    if (!report.final_answer) {
      verdict = false;  // budget exhaustion or failure counts as wrong
    } else {
      const auto it = labeled_answers_by_query.find(qid);
      if (it == labeled_answers_by_query.end()) {
        throw Error(ErrorCode::ValidationError,
                    "no labeled answer for query " + qid);
      }
      try {
        verdict = judge(report.trajectory.query(), it->second,
                        *report.final_answer, judge_model)
                      .correct;
        ++metrics.judged_episodes;
      } catch (const Error&) {
        ++metrics.judge_errors;
      }
    }
    report.judge_verdict = verdict;
    verdicts[qid].push_back(verdict);
    steps += static_cast<double>(report.step_count);
    interventions += static_cast<double>(report.intervention_count);
    checks += report.trigger_checks;
    fires += report.trigger_fires;
  }
  metrics.accuracy = accuracy(verdicts);
  metrics.avg_steps = steps / static_cast<double>(reports.size());
  metrics.avg_interventions =
      interventions / static_cast<double>(reports.size());
  metrics.rejection_rate =
      checks == 0 ? 0.0
                  : static_cast<double>(checks - fires) /
                        static_cast<double>(checks);
  bool enough_runs = true;
  for (const auto& [q, vs] : verdicts) {
    (void)q;
    if (vs.size() < k) enough_runs = false;
  }
  if (k >= 1 && enough_runs) metrics.pass_at_k = pass_at_k(verdicts, k);
  return metrics;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::json j{{"accuracy", report.accuracy},
                   {"k", report.k},
                   {"avg_steps", report.avg_steps},
                   {"avg_interventions", report.avg_interventions},
                   {"rejection_rate", report.rejection_rate},
                   {"judged_episodes", report.judged_episodes},
                   {"judge_errors", report.judge_errors}};
  if (report.pass_at_k) j["pass_at_k"] = *report.pass_at_k;
  return j.dump(2);
}

std::optional<bool> parse_trigger_judge_reply(const std::string& reply) {
  std::istringstream is(reply);
  std::string line;
  bool in_section = false;
  while (std::getline(is, line)) {
    const std::string l = trim(line);
    if (l.rfind("# Whether to Provide Guidance", 0) == 0) {
      in_section = true;
      continue;
    }
    if (!in_section || l.empty()) continue;
    if (l[0] == '#' || l[0] == '`') break;
    std::string lowered;
    for (char c : l) {
      lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (lowered == "yes") return true;
    if (lowered == "no") return false;
    break;
  }
  return std::nullopt;
}

bool comparison_trigger_fires(TriggerPolicy policy, const std::string& history,
                              Backend* trigger_model,
                              std::vector<std::string>* warnings) {
  switch (policy) {
    case TriggerPolicy::Rule:
      return true;  // continuous intervention; silence applied by the caller
    case TriggerPolicy::ModelJudged: {
      if (trigger_model == nullptr) {
        throw Error(ErrorCode::ConfigError,
                    "model-judged policy needs a trigger model");
      }
      const PromptAsset asset = load_prompt(prompt_names::kTriggerJudge);
      ChatRequest req;
      req.messages = {
          {Role::User, render_prompt(asset, {{"history", history}})}};
      const ChatResponse resp = trigger_model->complete(req);
      const auto verdict = parse_trigger_judge_reply(resp.text);
      if (!verdict) {
        if (warnings != nullptr) {
          warnings->push_back("unparsable trigger-judge reply, treated as no");
        }
        return false;
      }
      return *verdict;
    }
    case TriggerPolicy::Entropy:
      throw Error(ErrorCode::ConfigError,
                  "entropy policy is decided by the trigger module");
  }
  return false;
}

double token_overlap_similarity(const std::string& a, const std::string& b) {
  const auto wa = word_set(a);
  const auto wb = word_set(b);
  if (wa.empty() || wb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& w : wa) {
    if (wb.count(w) > 0) ++common;
  }
  const std::size_t uni = wa.size() + wb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::string retrieval_guidance(const std::string& history,
                               const ExperienceCollection& collection,
                               SimilarityFn similarity) {
  if (collection.triplets.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty experience collection");
  }
  if (similarity == nullptr) similarity = &token_overlap_similarity;
  const ExperienceTriplet* best = nullptr;
  double best_score = -1.0;
  for (const auto& t : collection.triplets) {
    const double score = similarity(history, t.behavior + " " + t.mistake);
    if (score > best_score) {
      best_score = score;
      best = &t;
    }
  }
  const PromptAsset asset = load_prompt(prompt_names::kRetrievalGuidance);
  return render_prompt(asset, {{"behavior", best->behavior},
                               {"mistake", best->mistake},
                               {"guidance", best->guidance}});
}

namespace {

void collect_entropies(const std::vector<EpisodeReport>& reports,
                       StepKind kind, std::vector<double>& out) {
  for (const auto& r : reports) {
    for (const auto& step : r.trajectory.steps()) {
      if (step.kind == kind) out.push_back(step.entropy.value);
    }
  }
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Histogram convention: the vanilla side occupies count_correct, the expseek
// side count_incorrect.
std::vector<HistogramBin> shift_histogram(const std::vector<double>& vanilla,
                                          const std::vector<double>& expseek,
                                          std::size_t bins) {
  std::vector<EntropyRecord> records;
  for (double h : vanilla) {
    records.push_back({"", 0, StepKind::Process, h, Correctness::Correct});
  }
  for (double h : expseek) {
    records.push_back({"", 0, StepKind::Process, h, Correctness::Incorrect});
  }
  if (records.empty()) return {};
  return entropy_histogram(records, bins);
}

}  // namespace

EntropyShiftReport entropy_shift_report(
    const std::vector<EpisodeReport>& vanilla,
    const std::vector<EpisodeReport>& expseek, std::size_t bins) {
  if (vanilla.empty() || expseek.empty()) {
    throw Error(ErrorCode::EmptyInput, "both report sets must be non-empty");
  }
  EntropyShiftReport out;
  std::vector<double> vp, va, ep, ea;
  collect_entropies(vanilla, StepKind::Process, vp);
  collect_entropies(vanilla, StepKind::Answer, va);
  collect_entropies(expseek, StepKind::Process, ep);
  collect_entropies(expseek, StepKind::Answer, ea);
  out.process_mean_vanilla = mean_of(vp);
  out.process_mean_expseek = mean_of(ep);
  out.process_shift = out.process_mean_expseek - out.process_mean_vanilla;
  out.answer_mean_vanilla = mean_of(va);
  out.answer_mean_expseek = mean_of(ea);
  out.answer_shift = out.answer_mean_expseek - out.answer_mean_vanilla;
  out.process_histogram = shift_histogram(vp, ep, bins);
  out.answer_histogram = shift_histogram(va, ea, bins);
  out.no_interventions = true;
  for (const auto& r : expseek) {
    if (r.intervention_count > 0) out.no_interventions = false;
  }
  return out;
}

std::string to_json(const EntropyShiftReport& report) {
  auto bins_json = [](const std::vector<HistogramBin>& bins) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : bins) {
      arr.push_back({{"lower", b.lower},
                     {"upper", b.upper},
                     {"vanilla", b.count_correct},
                     {"expseek", b.count_incorrect}});
    }
    return arr;
  };
  nlohmann::json j{{"process_mean_vanilla", report.process_mean_vanilla},
                   {"process_mean_expseek", report.process_mean_expseek},
                   {"process_shift", report.process_shift},
                   {"answer_mean_vanilla", report.answer_mean_vanilla},
                   {"answer_mean_expseek", report.answer_mean_expseek},
                   {"answer_shift", report.answer_shift},
                   {"process_histogram", bins_json(report.process_histogram)},
                   {"answer_histogram", bins_json(report.answer_histogram)},
                   {"no_interventions", report.no_interventions}};
  return j.dump(2);
}

}  // namespace expseek
