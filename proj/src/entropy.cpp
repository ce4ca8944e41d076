// SPDX-License-Identifier: Apache-2.0
#include "expseek/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace expseek {

namespace {
constexpr double kTailEpsilon = 1e-12;
constexpr double kMassSlack = 1e-6;
}  // namespace

void TokenDistribution::validate() const {
  if (alternatives.empty()) {
    throw Error(ErrorCode::MalformedDistribution,
                "token distribution has no alternatives");
  }
  if (logprob > 0.0) {
    throw Error(ErrorCode::MalformedDistribution,
                "sampled-token logprob is positive");
  }
  double mass = 0.0;
  bool sampled_present = false;
  for (const auto& [id, lp] : alternatives) {
    if (lp > 0.0) {
      throw Error(ErrorCode::MalformedDistribution,
                  "alternative logprob is positive");
    }
    mass += std::exp(lp);
    if (id == token_id) sampled_present = true;
  }
  if (mass > 1.0 + kMassSlack) {
    throw Error(ErrorCode::MalformedDistribution,
                "alternative probabilities sum above 1");
  }
  if (!sampled_present) {
    throw Error(ErrorCode::MalformedDistribution,
                "sampled token missing from alternatives");
  }
}

std::string to_string(StepKind kind) {
  return kind == StepKind::Process ? "process" : "answer";
}

StepKind step_kind_from_string(const std::string& s) {
  if (s == "process") return StepKind::Process;
  if (s == "answer") return StepKind::Answer;
  throw Error(ErrorCode::ValidationError, "unknown step kind: " + s);
}

std::string to_string(Correctness c) {
  return c == Correctness::Correct ? "correct" : "incorrect";
}

Correctness correctness_from_string(const std::string& s) {
  if (s == "correct") return Correctness::Correct;
  if (s == "incorrect") return Correctness::Incorrect;
  throw Error(ErrorCode::ValidationError, "unknown correctness: " + s);
}

TokenEntropy token_entropy(const TokenDistribution& dist) {
  if (dist.alternatives.empty()) {
    throw Error(ErrorCode::MalformedDistribution,
                "token distribution has no alternatives");
  }
  double h = 0.0;
  double mass = 0.0;
  for (const auto& [id, lp] : dist.alternatives) {
    (void)id;
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;  // p * ln p, using the reported logprob directly
    mass += p;
  }
  TokenEntropy out;
  const double tail = 1.0 - mass;
  if (tail > kTailEpsilon) {
    h -= tail * std::log(tail);
    out.approximated = true;
  }
  out.value = std::max(h, 0.0);
  return out;
}

StepEntropy step_entropy(const std::vector<TokenDistribution>& tokens) {
  if (tokens.empty()) {
    throw Error(ErrorCode::EmptyInput, "step has no generated tokens");
  }
  StepEntropy out;
  double sum = 0.0;
  for (const auto& t : tokens) {
    const TokenEntropy h = token_entropy(t);
    sum += h.value;
    out.approximation = out.approximation || h.approximated;
  }
  out.token_count = tokens.size();
  out.value = sum / static_cast<double>(tokens.size());
  return out;
}

std::vector<HistogramBin> entropy_histogram(
    const std::vector<EntropyRecord>& records, std::size_t bins) {
  if (records.empty() || bins == 0) return {};
  double lo = records.front().entropy;
  double hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.entropy);
    hi = std::max(hi, r.entropy);
  }
  if (hi <= lo) hi = lo + 1.0;  // all-equal sample: one-unit-wide range
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].lower = lo + width * static_cast<double>(i);
    out[i].upper = lo + width * static_cast<double>(i + 1);
  }
  for (const auto& r : records) {
    auto idx = static_cast<std::size_t>((r.entropy - lo) / width);
    if (idx >= bins) idx = bins - 1;
    if (r.correctness == Correctness::Correct) {
      out[idx].count_correct++;
    } else {
      out[idx].count_incorrect++;
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<EntropyRecord>& records) {
  std::ostringstream os;
  for (const auto& r : records) {
    nlohmann::json j{{"query_id", r.query_id},
                     {"step_index", r.step_index},
                     {"step_kind", to_string(r.step_kind)},
                     {"entropy", r.entropy},
                     {"correctness", to_string(r.correctness)}};
    os << j.dump() << '\n';
  }
  return os.str();
}

std::vector<EntropyRecord> entropy_records_from_jsonl(const std::string& text) {
  std::vector<EntropyRecord> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    EntropyRecord r;
    r.query_id = j.value("query_id", "");
    r.step_index = j.value("step_index", std::size_t{0});
    r.step_kind = step_kind_from_string(j.at("step_kind").get<std::string>());
    r.entropy = j.at("entropy").get<double>();
    r.correctness =
        correctness_from_string(j.at("correctness").get<std::string>());
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_jsonl(const std::vector<HistogramBin>& bins) {
  std::ostringstream os;
  for (const auto& b : bins) {
    nlohmann::json j{{"bin_lower", b.lower},
                     {"bin_upper", b.upper},
                     {"count_correct", b.count_correct},
                     {"count_incorrect", b.count_incorrect}};
    os << j.dump() << '\n';
  }
  return os.str();
}

}  // namespace expseek
