// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "expseek/gateway.hpp"

namespace expseek {

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;

  bool operator==(const SearchResult&) const = default;
};

struct VisitResult {
  std::vector<std::string> evidence;
  std::string summary;

  bool operator==(const VisitResult&) const = default;
};

struct CorpusDocument {
  std::string url;
  std::string title;
  std::string body;
};

enum class FailureMode { NotFound, DidNotLoad };

/// Deterministic offline document collection for the simulated environment.
/// Search ranks by distinct-keyword overlap with a stable URL tie-break.
class SimulatedCorpus {
 public:
  void add_document(CorpusDocument doc);
  void add_failure(const std::string& url, FailureMode mode);

  const CorpusDocument* find(const std::string& url) const;
  std::optional<FailureMode> scripted_failure(const std::string& url) const;
  const std::map<std::string, CorpusDocument>& documents() const {
    return documents_;
  }

  static SimulatedCorpus from_json(const std::string& text);
  static SimulatedCorpus load(const std::string& path);

 private:
  std::map<std::string, CorpusDocument> documents_;  // keyed by url
  std::map<std::string, FailureMode> failures_;
};

struct ToolSettings {
  std::size_t results_per_query = 5;
  std::size_t snippet_max_chars = 400;
};

/// Tool environment contract shared by the simulated corpus and live adapters.
class ToolEnvironment {
 public:
  virtual ~ToolEnvironment() = default;
  virtual std::vector<SearchResult> search_one(const std::string& query) = 0;
  virtual VisitResult visit(const std::string& url, const std::string& goal) = 0;
};

/// Simulated environment: pure function of (corpus, query). The summarizer
/// backend supplies visit summaries (a scripted mock in tests).
class SimulatedEnvironment : public ToolEnvironment {
 public:
  SimulatedEnvironment(SimulatedCorpus corpus, ToolSettings settings,
                       std::shared_ptr<Backend> summarizer);

  std::vector<SearchResult> search_one(const std::string& query) override;
  VisitResult visit(const std::string& url, const std::string& goal) override;

 private:
  SimulatedCorpus corpus_;
  ToolSettings settings_;
  std::shared_ptr<Backend> summarizer_;
};

/// Run one search tool call (possibly multiple queries) and render the
/// observation text. Tool failures surface as observation text, never as
/// exceptions, so the episode always continues.
std::string run_search(ToolEnvironment& env,
                       const std::vector<std::string>& queries);
std::string run_visit(ToolEnvironment& env, const std::string& url,
                      const std::string& goal);

/// Deterministic observation renderings matching the deployed transcript
/// layout (numbered results with bracketed titles).
std::string render_search_observation(
    const std::vector<std::pair<std::string, std::vector<SearchResult>>>&
        per_query);
std::string render_visit_observation(const VisitResult& result);
std::string render_failure_observation();

/// Word-boundary snippet truncation.
std::string make_snippet(const std::string& body, std::size_t max_chars);

}  // namespace expseek
