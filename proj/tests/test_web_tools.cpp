// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "expseek/errors.hpp"
#include "expseek/web_tools.hpp"

using namespace expseek;

namespace {

SimulatedCorpus sample_corpus() {
  SimulatedCorpus corpus;
  corpus.add_document({"https://a.example/oak", "Oak trees",
                       "The oak tree is a hardwood native to the north."});
  corpus.add_document({"https://b.example/rivers", "Rivers of Europe",
                       "The Danube is the second longest river in Europe."});
  corpus.add_document({"https://c.example/oakriver", "Oak River town",
                       "Oak River is a small town near a river crossing."});
  corpus.add_failure("https://dead.example/page", FailureMode::DidNotLoad);
  return corpus;
}

std::shared_ptr<Backend> fixed_summarizer(const std::string& reply) {
  std::vector<ScriptTurn> script(10, ScriptTurn{std::nullopt, reply, {}});
  return std::make_shared<MockBackend>(script);
}

}  // namespace

TEST_CASE("search ranks by distinct keyword overlap with stable ties") {
  SimulatedEnvironment env(sample_corpus(), {}, fixed_summarizer("s"));
  const auto results = env.search_one("oak river");
  REQUIRE(results.size() == 3);
  CHECK(results[0].url == "https://c.example/oakriver");  // both words
  // One-word matches keep url order (a.example before b.example).
  CHECK(results[1].url == "https://a.example/oak");
  CHECK(results[2].url == "https://b.example/rivers");

  CHECK(env.search_one("zeppelin").empty());
}

TEST_CASE("results per query cap is honored") {
  ToolSettings settings;
  settings.results_per_query = 1;
  SimulatedEnvironment env(sample_corpus(), settings, fixed_summarizer("s"));
  CHECK(env.search_one("oak river").size() == 1);
}

TEST_CASE("visit summarizes known documents and fails scripted urls") {
  SimulatedEnvironment env(sample_corpus(), {}, fixed_summarizer("a summary"));
  const VisitResult r = env.visit("https://a.example/oak", "what is oak");
  CHECK(r.summary == "a summary");
  REQUIRE(r.evidence.size() == 1);
  CHECK_THROWS_AS(env.visit("https://dead.example/page", "g"), Error);
  CHECK_THROWS_AS(env.visit("https://unknown.example/x", "g"), Error);
}

TEST_CASE("run_visit surfaces failures as observation text") {
  SimulatedEnvironment env(sample_corpus(), {}, fixed_summarizer("ok"));
  const std::string obs = run_visit(env, "https://dead.example/page", "goal");
  CHECK(obs.find("did not load") != std::string::npos);
  const std::string good = run_visit(env, "https://a.example/oak", "goal");
  CHECK(good.find("Summary:") != std::string::npos);
}

TEST_CASE("search observation renders the deployed layout") {
  SimulatedEnvironment env(sample_corpus(), {}, fixed_summarizer("s"));
  const std::string obs = run_search(env, {"oak river"});
  CHECK(obs.find("A Google search for 'oak river' found 3 results:") == 0);
  CHECK(obs.find("1. [Oak River town]") != std::string::npos);
  CHECK(obs.find("(https://c.example/oakriver)") != std::string::npos);
}

TEST_CASE("snippets truncate at word boundaries") {
  CHECK(make_snippet("short body", 100) == "short body");
  const std::string s = make_snippet("alpha beta gamma delta", 12);
  CHECK(s == "alpha beta...");
}

TEST_CASE("corpus JSON round-trips documents and failures") {
  const std::string text = R"({
    "documents": [
      {"url": "https://x.example/1", "title": "T", "body": "B"}
    ],
    "failures": {"https://x.example/dead": "did-not-load",
                 "https://x.example/404": "not-found"}
  })";
  const SimulatedCorpus corpus = SimulatedCorpus::from_json(text);
  CHECK(corpus.find("https://x.example/1") != nullptr);
  CHECK(corpus.scripted_failure("https://x.example/dead") ==
        FailureMode::DidNotLoad);
  CHECK(corpus.scripted_failure("https://x.example/404") ==
        FailureMode::NotFound);
  CHECK_FALSE(corpus.scripted_failure("https://x.example/1").has_value());
}
