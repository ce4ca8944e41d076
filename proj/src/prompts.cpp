// SPDX-License-Identifier: Apache-2.0
#include "expseek/prompts.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "expseek/errors.hpp"

#ifndef EXPSEEK_DEFAULT_PROMPT_DIR
#define EXPSEEK_DEFAULT_PROMPT_DIR "assets/prompts"
#endif

namespace expseek {

namespace {

bool is_placeholder_char(char c) {
  return std::islower(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Scans for {identifier} tokens; anything else between braces is literal.
std::vector<std::pair<std::size_t, std::string>> find_placeholders(
    const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_placeholder_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      out.emplace_back(i, text.substr(i + 1, j - i - 1));
      i = j;
    }
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<std::string> PromptAsset::placeholders() const {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& [pos, name] : find_placeholders(text)) {
    (void)pos;
    if (seen.insert(name).second) out.push_back(name);
  }
  return out;
}

std::string prompt_directory() {
  if (const char* dir = std::getenv("EXPSEEK_PROMPT_DIR")) return dir;
  return EXPSEEK_DEFAULT_PROMPT_DIR;
}

PromptAsset prompt_from_text(const std::string& name, const std::string& text) {
  PromptAsset asset;
  asset.name = name;
  asset.text = text;
  asset.checksum = fnv1a(text);
  return asset;
}

PromptAsset load_prompt(const std::string& name) {
  const std::string path = prompt_directory() + "/" + name + ".md";
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open prompt asset: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return prompt_from_text(name, ss.str());
}

std::string render_prompt(const PromptAsset& asset,
                          const std::map<std::string, std::string>& bindings) {
  const auto placeholders = find_placeholders(asset.text);
  std::string out;
  out.reserve(asset.text.size());
  std::size_t last = 0;
  for (const auto& [pos, name] : placeholders) {
    const auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(ErrorCode::ConfigError,
                  "missing binding for placeholder {" + name + "} in prompt " +
                      asset.name);
    }
    out.append(asset.text, last, pos - last);
    out.append(it->second);
    last = pos + name.size() + 2;
  }
  out.append(asset.text, last, asset.text.size() - last);
  return out;
}

}  // namespace expseek
