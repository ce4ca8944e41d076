// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expseek/errors.hpp"

namespace expseek {

/// Per-position probability information reported by a model backend.
/// `alternatives` holds the top-K most probable tokens as (token_id, logprob)
/// pairs; the sampled token is guaranteed to appear among them (appended at
/// ingestion when the backend omits it).
struct TokenDistribution {
  std::int64_t token_id = 0;
  double logprob = 0.0;
  std::vector<std::pair<std::int64_t, double>> alternatives;

  std::size_t top_k() const { return alternatives.size(); }
  void validate() const;
};

struct TokenEntropy {
  double value = 0.0;     // nats
  bool approximated = false;  // tail bucket applied
};

/// Mean token entropy over one response, in nats.
struct StepEntropy {
  double value = 0.0;
  std::size_t token_count = 0;
  bool approximation = false;

  bool operator==(const StepEntropy&) const = default;
};

enum class StepKind { Process, Answer };
enum class Correctness { Correct, Incorrect };

std::string to_string(StepKind kind);
StepKind step_kind_from_string(const std::string& s);
std::string to_string(Correctness c);
Correctness correctness_from_string(const std::string& s);

/// One labeled step entropy, the unit of the threshold training collections.
struct EntropySample {
  double entropy = 0.0;
  StepKind step_kind = StepKind::Process;
  Correctness correctness = Correctness::Correct;
};

/// Entropy of one token position: -sum p ln p over the reported alternatives,
/// plus a single tail bucket -r ln r for the unreported mass r when r exceeds
/// 1e-12. Exact when the backend reports the full distribution.
TokenEntropy token_entropy(const TokenDistribution& dist);

/// Mean token entropy over the generated tokens of one response.
StepEntropy step_entropy(const std::vector<TokenDistribution>& tokens);

/// One line of the step-level analysis export.
struct EntropyRecord {
  std::string query_id;
  std::size_t step_index = 0;
  StepKind step_kind = StepKind::Process;
  double entropy = 0.0;
  Correctness correctness = Correctness::Correct;
};

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count_correct = 0;
  std::size_t count_incorrect = 0;
};

/// Fixed-width histogram over [min, max] of the records' entropies, split by
/// correctness label. Used for the distribution exports.
std::vector<HistogramBin> entropy_histogram(
    const std::vector<EntropyRecord>& records, std::size_t bins);

std::string to_jsonl(const std::vector<EntropyRecord>& records);
std::vector<EntropyRecord> entropy_records_from_jsonl(const std::string& text);
std::string to_jsonl(const std::vector<HistogramBin>& bins);

}  // namespace expseek
