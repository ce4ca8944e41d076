// SPDX-License-Identifier: Apache-2.0
#include "expseek/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"
#include "expseek/prompts.hpp"

namespace expseek {

namespace {

const std::vector<std::string> kScalarKeys = {
    "max_steps",   "temperature",    "top_p",       "silence_length",
    "n_bootstrap", "confidence",     "runs",        "workers",
    "seed",        "mode",           "corpus",      "exp_base",
    "thresholds",  "queries",        "reports"};

const std::vector<std::string> kRoles = {"agent", "experience", "judge",
                                         "summarizer"};

const std::vector<std::string> kBackendSuffixes = {
    "backend", "script", "scenario", "base_url", "model"};

bool parse_role_key(const std::string& key, std::string& role,
                    std::string& suffix) {
  for (const auto& r : kRoles) {
    for (const auto& s : kBackendSuffixes) {
      if (key == r + "_" + s) {
        role = r;
        suffix = s;
        return true;
      }
    }
  }
  return false;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError,
                "bad integer for " + key + ": " + value);
  }
}

double parse_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad number for " + key + ": " + value);
  }
}

}  // namespace

void apply_config_key(Config& config, const std::string& key,
                      const std::string& value) {
  std::string role;
  std::string suffix;
  if (parse_role_key(key, role, suffix)) {
    RoleBackend& b = config.backends[role];
    if (suffix == "backend") {
      if (value != "mock" && value != "http") {
        throw Error(ErrorCode::ConfigError,
                    "backend kind must be mock or http, got " + value);
      }
      b.kind = value;
    } else if (suffix == "script") {
      b.script = value;
    } else if (suffix == "scenario") {
      b.scenario = value;
    } else if (suffix == "base_url") {
      b.base_url = value;
    } else {
      b.model_name = value;
    }
    return;
  }
  if (key == "max_steps") {
    config.max_steps = parse_u64(key, value);
  } else if (key == "temperature") {
    config.temperature = parse_f64(key, value);
  } else if (key == "top_p") {
    config.top_p = parse_f64(key, value);
  } else if (key == "silence_length") {
    config.silence_length = parse_u64(key, value);
  } else if (key == "n_bootstrap") {
    config.n_bootstrap = parse_u64(key, value);
  } else if (key == "confidence") {
    config.confidence = parse_f64(key, value);
  } else if (key == "runs") {
    config.runs_per_query = parse_u64(key, value);
  } else if (key == "workers") {
    config.workers = parse_u64(key, value);
  } else if (key == "seed") {
    config.seed = parse_u64(key, value);
  } else if (key == "mode") {
    if (value != "vanilla" && value != "expseek" && value != "process-only" &&
        value != "answer-only") {
      throw Error(ErrorCode::ConfigError, "unknown mode: " + value);
    }
    config.mode = value;
  } else if (key == "corpus") {
    config.corpus_path = value;
  } else if (key == "exp_base") {
    config.exp_base_path = value;
  } else if (key == "thresholds") {
    config.thresholds_path = value;
  } else if (key == "queries") {
    config.queries_path = value;
  } else if (key == "reports") {
    config.reports_path = value;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown configuration key: " + key);
  }
}

void Config::validate() const {
  if (max_steps < 1) {
    throw Error(ErrorCode::ConfigError, "max_steps must be >= 1");
  }
  if (temperature < 0.0 || top_p <= 0.0 || top_p > 1.0) {
    throw Error(ErrorCode::ConfigError, "bad sampling parameters");
  }
  if (confidence <= 0.0 || confidence >= 1.0) {
    throw Error(ErrorCode::ConfigError, "confidence must lie in (0, 1)");
  }
  if (runs_per_query < 1 || workers < 1) {
    throw Error(ErrorCode::ConfigError, "runs and workers must be >= 1");
  }
}

std::string Config::to_json() const {
  nlohmann::json backends_json = nlohmann::json::object();
  for (const auto& [role, b] : backends) {
    backends_json[role] = {{"kind", b.kind},
                           {"script", b.script},
                           {"scenario", b.scenario},
                           {"base_url", b.base_url},
                           {"model", b.model_name}};
  }
  nlohmann::json j{{"max_steps", max_steps},
                   {"temperature", temperature},
                   {"top_p", top_p},
                   {"silence_length", silence_length},
                   {"n_bootstrap", n_bootstrap},
                   {"confidence", confidence},
                   {"runs", runs_per_query},
                   {"workers", workers},
                   {"seed", seed},
                   {"mode", mode},
                   {"corpus", corpus_path},
                   {"exp_base", exp_base_path},
                   {"thresholds", thresholds_path},
                   {"queries", queries_path},
                   {"reports", reports_path},
                   {"backends", backends_json}};
  return j.dump(2);
}

std::uint64_t Config::hash() const { return fnv1a(to_json()); }

Config load_config(const std::string& file_path,
                   const std::map<std::string, std::string>& flag_overrides) {
  Config config;
  // File layer.
  if (!file_path.empty()) {
    std::ifstream in(file_path);
    if (!in) {
      throw Error(ErrorCode::ConfigError,
                  "cannot open config file: " + file_path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError,
                  std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::ConfigError, "config file must hold an object");
    }
    for (const auto& [key, value] : j.items()) {
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else {
        text = value.dump();
      }
      apply_config_key(config, key, text);
    }
  }
  // Environment layer.
  auto all_keys = kScalarKeys;
  for (const auto& r : kRoles) {
    for (const auto& s : kBackendSuffixes) all_keys.push_back(r + "_" + s);
  }
  for (const auto& key : all_keys) {
    std::string env_name = "EXPSEEK_";
    for (char c : key) {
      env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (const char* value = std::getenv(env_name.c_str())) {
      apply_config_key(config, key, value);
    }
  }
  // Flag layer wins.
  for (const auto& [key, value] : flag_overrides) {
    apply_config_key(config, key, value);
  }
  config.validate();
  return config;
}

void check_paths_exist(const Config& config,
                       const std::vector<std::string>& required_roles) {
  auto require = [](const std::string& what, const std::string& path) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::ConfigError,
                  what + " path does not exist: " + path);
    }
  };
  require("corpus", config.corpus_path);
  require("exp_base", config.exp_base_path);
  require("thresholds", config.thresholds_path);
  require("queries", config.queries_path);
  for (const auto& role : required_roles) {
    const auto it = config.backends.find(role);
    if (it == config.backends.end()) {
      throw Error(ErrorCode::ConfigError, "no backend configured for role " +
                                              role);
    }
    if (it->second.kind == "mock") require(role + " script", it->second.script);
  }
}

std::shared_ptr<Backend> make_backend(const Config& config,
                                      const std::string& role) {
  const auto it = config.backends.find(role);
  if (it == config.backends.end()) {
    throw Error(ErrorCode::ConfigError,
                "no backend configured for role " + role);
  }
  const RoleBackend& b = it->second;
  if (b.kind == "mock") {
    if (b.script.empty()) {
      throw Error(ErrorCode::ConfigError,
                  "mock backend for role " + role + " needs a script path");
    }
    return std::make_shared<MockBackend>(load_script(b.script, b.scenario));
  }
  BackendConfig http;
  http.base_url = b.base_url;
  http.model_name = b.model_name;
  if (http.base_url.empty()) {
    throw Error(ErrorCode::ConfigError,
                "http backend for role " + role + " needs a base_url");
  }
  return std::make_shared<HttpBackend>(http);
}

}  // namespace expseek
