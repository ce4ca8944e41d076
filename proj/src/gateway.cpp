// SPDX-License-Identifier: Apache-2.0
#include "expseek/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"

namespace expseek {

std::string to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (temperature < 0.0) {
    throw Error(ErrorCode::ValidationError, "temperature must be >= 0");
  }
  if (top_p <= 0.0 || top_p > 1.0) {
    throw Error(ErrorCode::ValidationError, "top_p must be in (0, 1]");
  }
  if (want_logprobs && top_k_alternatives < 1) {
    throw Error(ErrorCode::ValidationError,
                "top_k_alternatives must be >= 1 when logprobs are requested");
  }
}

double binary_entropy_inverse(double h) {
  constexpr double kLn2 = 0.6931471805599453;
  if (h < 0.0) {
    throw Error(ErrorCode::ValidationError, "entropy must be non-negative");
  }
  if (h > kLn2 + 1e-12) {
    throw Error(ErrorCode::ValidationError,
                "binary entropy cannot exceed ln 2");
  }
  if (h <= 0.0) return 0.0;
  if (h >= kLn2) return 0.5;
  auto entropy = [](double p) {
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
  };
  double lo = 1e-300;
  double hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (entropy(mid) < h) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<TokenDistribution> entropy_profile_to_distributions(
    const std::vector<double>& profile) {
  constexpr double kLn2 = 0.6931471805599453;
  std::vector<TokenDistribution> out;
  out.reserve(profile.size());
  std::int64_t next_id = 1;
  for (double h : profile) {
    if (h < 0.0) {
      throw Error(ErrorCode::ValidationError, "negative entropy requested");
    }
    TokenDistribution dist;
    if (h <= 1e-15) {
      dist.token_id = next_id;
      dist.logprob = 0.0;
      dist.alternatives = {{next_id, 0.0}};
    } else if (h <= kLn2) {
      const double p = binary_entropy_inverse(h);
      // Sampled token takes the larger mass.
      dist.token_id = next_id;
      dist.logprob = std::log(1.0 - p);
      dist.alternatives = {{next_id, std::log(1.0 - p)},
                           {next_id + 1, std::log(p)}};
    } else {
      // K outcomes: one with mass p, K-1 sharing the rest equally. At
      // p = 1/K the entropy is ln K >= h; entropy falls to 0 as p -> 1,
      // so bisection on p hits h exactly.
      const auto k = static_cast<std::size_t>(
          std::max(2.0, std::ceil(std::exp(h) - 1e-12)));
      auto entropy_at = [k](double p) {
        const double q = (1.0 - p) / static_cast<double>(k - 1);
        double e = -p * std::log(p);
        if (q > 0.0) e -= (1.0 - p) * std::log(q);
        return e;
      };
      double lo = 1.0 / static_cast<double>(k);
      double hi = 1.0 - 1e-15;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (entropy_at(mid) > h) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double p = 0.5 * (lo + hi);
      const double q = (1.0 - p) / static_cast<double>(k - 1);
      dist.token_id = next_id;
      dist.logprob = std::log(p);
      dist.alternatives.emplace_back(next_id, std::log(p));
      for (std::size_t i = 1; i < k; ++i) {
        dist.alternatives.emplace_back(next_id + static_cast<std::int64_t>(i),
                                       std::log(q));
      }
    }
    next_id += static_cast<std::int64_t>(dist.alternatives.size());
    out.push_back(std::move(dist));
  }
  return out;
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
  request.validate();
  ++call_count_;
  std::string last_user;
  for (const auto& m : request.messages) {
    if (m.role == Role::User) last_user = m.content;
  }
  for (std::size_t i = cursor_; i < script_.size(); ++i) {
    const ScriptTurn& turn = script_[i];
    const bool matches =
        !turn.match_substring ||
        last_user.find(*turn.match_substring) != std::string::npos;
    if (!matches) continue;
    cursor_ = i + 1;
    ChatResponse resp;
    resp.text = turn.reply;
    if (request.want_logprobs) {
      resp.tokens = entropy_profile_to_distributions(turn.token_entropy_profile);
    }
    return resp;
  }
  throw Error(ErrorCode::ScriptUnderrun, "mock script exhausted");
}

std::vector<ScriptTurn> script_from_json(const std::string& text,
                                         const std::string& scenario) {
  nlohmann::json j = nlohmann::json::parse(text);
  const auto& scenarios = j.at("scenarios");
  if (!scenarios.contains(scenario)) {
    throw Error(ErrorCode::ConfigError, "unknown scenario: " + scenario);
  }
  std::vector<ScriptTurn> out;
  for (const auto& tj : scenarios.at(scenario)) {
    ScriptTurn turn;
    if (tj.contains("match")) {
      turn.match_substring = tj.at("match").get<std::string>();
    }
    turn.reply = tj.at("reply").get<std::string>();
    turn.token_entropy_profile =
        tj.value("entropy_profile", std::vector<double>{});
    out.push_back(std::move(turn));
  }
  return out;
}

std::vector<ScriptTurn> load_script(const std::string& path,
                                    const std::string& scenario) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open script file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return script_from_json(ss.str(), scenario);
}

std::string chat_request_to_wire(const ChatRequest& request,
                                 const std::string& model_name) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  nlohmann::json j{{"model", model_name},
                   {"messages", messages},
                   {"temperature", request.temperature},
                   {"top_p", request.top_p},
                   {"max_tokens", request.max_tokens}};
  if (request.want_logprobs) {
    j["logprobs"] = true;
    j["top_logprobs"] = request.top_k_alternatives;
  }
  return j.dump();
}

ChatResponse chat_response_from_wire(const std::string& body) {
  nlohmann::json j = nlohmann::json::parse(body);
  const auto& choices = j.at("choices");
  if (!choices.is_array() || choices.empty()) {
    throw Error(ErrorCode::BackendError, "no choices in backend reply");
  }
  const auto& choice = choices[0];
  ChatResponse resp;
  resp.text = choice.at("message").at("content").get<std::string>();
  const std::string finish = choice.value("finish_reason", "stop");
  resp.finish_reason =
      finish == "length" ? FinishReason::Length : FinishReason::Stop;
  if (choice.contains("logprobs") && !choice.at("logprobs").is_null()) {
    std::vector<TokenDistribution> tokens;
    std::int64_t position = 0;
    for (const auto& tok : choice.at("logprobs").at("content")) {
      TokenDistribution dist;
      // The wire format keys tokens by text; positions are used as ids since
      // entropy only needs the probabilities.
      dist.token_id = position;
      dist.logprob = tok.at("logprob").get<double>();
      const std::string sampled_text = tok.value("token", "");
      bool sampled_present = false;
      std::int64_t alt_id = position;
      for (const auto& alt : tok.value("top_logprobs", nlohmann::json::array())) {
        const std::string alt_text = alt.value("token", "");
        const double lp = alt.at("logprob").get<double>();
        if (alt_text == sampled_text) {
          dist.alternatives.emplace_back(position, lp);
          sampled_present = true;
        } else {
          dist.alternatives.emplace_back(++alt_id + 1000000, lp);
        }
      }
      if (!sampled_present) {
        dist.alternatives.emplace_back(position, dist.logprob);
      }
      tokens.push_back(std::move(dist));
      ++position;
    }
    resp.tokens = std::move(tokens);
  }
  return resp;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::ConfigError, "backend base_url is empty");
  }
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  request.validate();
  const char* key = std::getenv(config_.api_key_env.c_str());

  httplib::Client client(config_.base_url);
  client.set_read_timeout(static_cast<int>(config_.timeout_s), 0);
  httplib::Headers headers;
  if (key != nullptr) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const std::string payload = chat_request_to_wire(request, config_.model_name);
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    auto res = client.Post("/v1/chat/completions", headers, payload,
                           "application/json");
    if (res && res->status == 200) {
      ChatResponse resp = chat_response_from_wire(res->body);
      resp.attempt_count = attempt;
      if (request.want_logprobs && !resp.tokens) {
        throw Error(ErrorCode::CapabilityError,
                    "backend did not report logprobs");
      }
      return resp;
    }
    if (res && res->status >= 400 && res->status < 500) {
      throw Error(ErrorCode::BackendError,
                  "backend rejected request, status " +
                      std::to_string(res->status));
    }
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport failure";
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(100 * (1 << (attempt - 1))));
    }
  }
  throw Error(ErrorCode::BackendError,
              "backend failed after " + std::to_string(config_.max_attempts) +
                  " attempts: " + last_error);
}

}  // namespace expseek
