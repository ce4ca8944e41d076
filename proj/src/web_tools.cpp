// SPDX-License-Identifier: Apache-2.0
#include "expseek/web_tools.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"

namespace expseek {

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      word.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    } else if (!word.empty()) {
      out.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

}  // namespace

void SimulatedCorpus::add_document(CorpusDocument doc) {
  documents_[doc.url] = std::move(doc);
}

void SimulatedCorpus::add_failure(const std::string& url, FailureMode mode) {
  failures_[url] = mode;
}

const CorpusDocument* SimulatedCorpus::find(const std::string& url) const {
  const auto it = documents_.find(url);
  return it == documents_.end() ? nullptr : &it->second;
}

std::optional<FailureMode> SimulatedCorpus::scripted_failure(
    const std::string& url) const {
  const auto it = failures_.find(url);
  if (it == failures_.end()) return std::nullopt;
  return it->second;
}

SimulatedCorpus SimulatedCorpus::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SimulatedCorpus corpus;
  for (const auto& dj : j.at("documents")) {
    CorpusDocument doc;
    doc.url = dj.at("url").get<std::string>();
    doc.title = dj.at("title").get<std::string>();
    doc.body = dj.at("body").get<std::string>();
    corpus.add_document(std::move(doc));
  }
  if (j.contains("failures")) {
    for (const auto& [url, mode] : j.at("failures").items()) {
      corpus.add_failure(url, mode.get<std::string>() == "not-found"
                                  ? FailureMode::NotFound
                                  : FailureMode::DidNotLoad);
    }
  }
  return corpus;
}

SimulatedCorpus SimulatedCorpus::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open corpus file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string make_snippet(const std::string& body, std::size_t max_chars) {
  if (body.size() <= max_chars) return body;
  std::size_t cut = max_chars;
  while (cut > 0 && !std::isspace(static_cast<unsigned char>(body[cut]))) {
    --cut;
  }
  if (cut == 0) cut = max_chars;
  std::string out = body.substr(0, cut);
  while (!out.empty() &&
         std::isspace(static_cast<unsigned char>(out.back()))) {
    out.pop_back();
  }
  return out + "...";
}

SimulatedEnvironment::SimulatedEnvironment(SimulatedCorpus corpus,
                                           ToolSettings settings,
                                           std::shared_ptr<Backend> summarizer)
    : corpus_(std::move(corpus)),
      settings_(settings),
      summarizer_(std::move(summarizer)) {}

std::vector<SearchResult> SimulatedEnvironment::search_one(
    const std::string& query) {
  const std::vector<std::string> query_tokens = tokenize(query);
  const std::set<std::string> query_set(query_tokens.begin(),
                                        query_tokens.end());
  std::vector<std::pair<std::size_t, const CorpusDocument*>> scored;
  for (const auto& [url, doc] : corpus_.documents()) {
    const std::vector<std::string> doc_tokens =
        tokenize(doc.title + " " + doc.body);
    const std::set<std::string> doc_set(doc_tokens.begin(), doc_tokens.end());
    std::size_t overlap = 0;
    for (const auto& t : query_set) {
      if (doc_set.count(t) != 0) ++overlap;
    }
    if (overlap > 0) scored.emplace_back(overlap, &doc);
  }
  // Rank by overlap descending; equal scores order by url ascending, which
  // std::map iteration already guarantees, so stable_sort keeps it.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     return a.first > b.first;
                   });
  std::vector<SearchResult> out;
  for (const auto& [score, doc] : scored) {
    (void)score;
    if (out.size() >= settings_.results_per_query) break;
    out.push_back({doc->url, doc->title,
                   make_snippet(doc->body, settings_.snippet_max_chars)});
  }
  return out;
}

VisitResult SimulatedEnvironment::visit(const std::string& url,
                                        const std::string& goal) {
  if (corpus_.scripted_failure(url)) {
    throw Error(ErrorCode::ToolError, "scripted failure for " + url);
  }
  const CorpusDocument* doc = corpus_.find(url);
  if (doc == nullptr) {
    throw Error(ErrorCode::ToolError, "unknown url: " + url);
  }
  VisitResult result;
  result.evidence.push_back(make_snippet(doc->body, 600));
  ChatRequest req;
  req.messages = {
      {Role::System, "Summarize the page content with respect to the goal."},
      {Role::User, "Goal: " + goal + "\nPage: " + doc->body}};
  result.summary = summarizer_->complete(req).text;
  if (result.summary.empty()) {
    throw Error(ErrorCode::ToolError, "summarizer returned empty summary");
  }
  return result;
}

std::string render_search_observation(
    const std::vector<std::pair<std::string, std::vector<SearchResult>>>&
        per_query) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [query, results] : per_query) {
    if (!first) os << "\n";
    first = false;
    os << "A Google search for '" << query << "' found " << results.size()
       << " results:";
    std::size_t i = 1;
    for (const auto& r : results) {
      os << "\n" << i << ". [" << r.title << "]\n   " << r.snippet
         << "\n   (" << r.url << ")";
      ++i;
    }
    if (results.empty()) os << "\n(no results)";
  }
  return os.str();
}

std::string render_visit_observation(const VisitResult& result) {
  std::ostringstream os;
  os << "Evidence in page:\n[";
  for (std::size_t i = 0; i < result.evidence.size(); ++i) {
    if (i > 0) os << ", ";
    os << '"' << result.evidence[i] << '"';
  }
  os << "]\n\nSummary:\n" << result.summary;
  return os.str();
}

std::string render_failure_observation() {
  return "The requested webpage did not load fully and contains no usable "
         "data. As a result, there is insufficient information to answer the "
         "goal from this page.";
}

std::string run_search(ToolEnvironment& env,
                       const std::vector<std::string>& queries) {
  std::vector<std::pair<std::string, std::vector<SearchResult>>> per_query;
  for (const auto& q : queries) {
    try {
      per_query.emplace_back(q, env.search_one(q));
    } catch (const std::exception& e) {
      return std::string("The search tool failed: ") + e.what();
    }
  }
  return render_search_observation(per_query);
}

std::string run_visit(ToolEnvironment& env, const std::string& url,
                      const std::string& goal) {
  try {
    return render_visit_observation(env.visit(url, goal));
  } catch (const std::exception&) {
    return render_failure_observation();
  }
}

}  // namespace expseek
