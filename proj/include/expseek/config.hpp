// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expseek/gateway.hpp"

namespace expseek {

/// How one model role (agent / experience / judge / summarizer) is backed.
struct RoleBackend {
  std::string kind = "mock";  // "mock" or "http"
  std::string script;         // mock: script file path
  std::string scenario;       // mock: scenario name within the script
  std::string base_url;       // http
  std::string model_name;     // http
};

/// Fully resolved runtime configuration. Precedence: flags > environment >
/// file > defaults. Unknown keys are an error, never silently ignored.
struct Config {
  std::size_t max_steps = 30;
  double temperature = 1.0;
  double top_p = 0.95;
  std::size_t silence_length = 1;
  std::size_t n_bootstrap = 1000;
  double confidence = 0.95;
  std::size_t runs_per_query = 5;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::string mode = "expseek";  // vanilla | expseek | process-only | answer-only

  std::string corpus_path;
  std::string exp_base_path;
  std::string thresholds_path;
  std::string queries_path;
  std::string reports_path;

  std::map<std::string, RoleBackend> backends;  // keyed by role name

  void validate() const;
  /// Stable hash of the resolved configuration, embedded in artifacts.
  std::uint64_t hash() const;
  std::string to_json() const;
};

/// Layered load. `file_path` empty means no file. `flag_overrides` holds
/// key=value pairs from the command line; environment overrides come from
/// EXPSEEK_<UPPERCASED_KEY> variables.
Config load_config(const std::string& file_path,
                   const std::map<std::string, std::string>& flag_overrides);

/// Apply one key=value assignment; throws ConfigError on unknown keys or
/// unparsable values. Backend keys look like `<role>_backend`,
/// `<role>_script`, `<role>_scenario`, `<role>_base_url`, `<role>_model`.
void apply_config_key(Config& config, const std::string& key,
                      const std::string& value);

/// Throw ConfigError unless every non-empty configured path exists.
void check_paths_exist(const Config& config,
                       const std::vector<std::string>& required_roles);

/// Construct the backend for a role; throws ConfigError naming the role when
/// it is absent or incomplete.
std::shared_ptr<Backend> make_backend(const Config& config,
                                      const std::string& role);

}  // namespace expseek
