// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "expseek/entropy.hpp"

namespace expseek {

enum class Role { System, User, Assistant };

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

std::string to_string(Role role);

struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 1.0;
  double top_p = 0.95;
  bool want_logprobs = false;
  std::size_t top_k_alternatives = 20;
  std::size_t max_tokens = 4096;

  void validate() const;
};

enum class FinishReason { Stop, Length, BackendError };

struct ChatResponse {
  std::string text;
  std::optional<std::vector<TokenDistribution>> tokens;
  FinishReason finish_reason = FinishReason::Stop;
  int attempt_count = 1;
};

/// Abstract chat-completion backend. Implementations must be safe to share
/// across episode workers; each call is independent.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual bool supports_logprobs() const { return true; }
};

/// Synthesize a list of TokenDistributions whose per-token entropies match the
/// requested profile within 1e-9. Entropies up to ln 2 use a two-outcome
/// distribution; larger values use K = ceil(e^h) outcomes with one adjustable
/// mass, solved by bisection.
std::vector<TokenDistribution> entropy_profile_to_distributions(
    const std::vector<double>& profile);

/// Two-outcome probability p <= 0.5 with binary entropy h, by bisection.
double binary_entropy_inverse(double h);

/// One scripted turn of the mock backend. Matches either by substring of the
/// last user message or unconditionally in order.
struct ScriptTurn {
  std::optional<std::string> match_substring;
  std::string reply;
  std::vector<double> token_entropy_profile;
};

/// Deterministic scripted backend: returns the next unconsumed turn whose
/// predicate matches, synthesizing token distributions from the entropy
/// profile. Fully deterministic; use one instance per episode.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::vector<ScriptTurn> script)
      : script_(std::move(script)) {}

  ChatResponse complete(const ChatRequest& request) override;

  std::size_t call_count() const { return call_count_; }
  std::size_t consumed() const { return cursor_; }

 private:
  std::vector<ScriptTurn> script_;
  std::size_t cursor_ = 0;
  std::size_t call_count_ = 0;
};

/// Load a script file: {"scenarios": {name: [turns...]}} where each turn is
/// {"match"?: str, "reply": str, "entropy_profile": [..]}.
std::vector<ScriptTurn> load_script(const std::string& path,
                                    const std::string& scenario);
std::vector<ScriptTurn> script_from_json(const std::string& text,
                                         const std::string& scenario);

struct BackendConfig {
  std::string base_url;
  std::string api_key_env = "EXPSEEK_API_KEY";
  std::string model_name;
  double timeout_s = 120.0;
  std::size_t max_inflight = 4;
  int max_attempts = 3;
};

/// Live adapter speaking the standard chat-completions wire format with
/// logprob reporting. Retries transient transport failures with exponential
/// backoff (idempotent requests only).
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  BackendConfig config_;
};

/// Serialize a request to the chat-completions wire JSON; exposed for tests.
std::string chat_request_to_wire(const ChatRequest& request,
                                 const std::string& model_name);
/// Parse a chat-completions wire reply (text + logprob content if present).
ChatResponse chat_response_from_wire(const std::string& body);

}  // namespace expseek
