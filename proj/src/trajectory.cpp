// SPDX-License-Identifier: Apache-2.0
#include "expseek/trajectory.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"

namespace expseek {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_absolute_url(const std::string& url) {
  const auto pos = url.find("://");
  if (pos == std::string::npos || pos == 0) return false;
  const std::string scheme = lower(url.substr(0, pos));
  if (scheme != "http" && scheme != "https") return false;
  return url.size() > pos + 3;
}

// Extracts the content between <tag> and </tag>. Returns nullopt when the
// open tag is absent; throws on an unbalanced pair.
std::optional<std::string> extract_block(const std::string& raw,
                                         const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const auto start = raw.find(open);
  if (start == std::string::npos) return std::nullopt;
  const auto body_start = start + open.size();
  const auto end = raw.find(close, body_start);
  if (end == std::string::npos) {
    throw ParseError("unbalanced <" + tag + "> tag", raw.substr(start));
  }
  return raw.substr(body_start, end - body_start);
}

ToolCall parse_tool_call_body(const std::string& body) {
  const std::string trimmed = trim(body);
  // Primary format: a JSON object {"search": [...]} or
  // {"visit": {"url": ..., "goal": ...}}.
  try {
    nlohmann::json j = nlohmann::json::parse(trimmed);
    if (j.is_object()) {
      ToolCall call;
      if (j.contains("search")) {
        call.tool = ToolKind::Search;
        const auto& q = j.at("search");
        if (q.is_string()) {
          call.queries.push_back(q.get<std::string>());
        } else if (q.is_array()) {
          for (const auto& item : q) {
            call.queries.push_back(item.get<std::string>());
          }
        }
        call.validate();
        return call;
      }
      if (j.contains("visit")) {
        call.tool = ToolKind::Visit;
        const auto& v = j.at("visit");
        call.url = v.at("url").get<std::string>();
        call.goal = v.value("goal", "");
        call.validate();
        return call;
      }
    }
  } catch (const nlohmann::json::exception&) {
    // fall through to the line-based format
  } catch (const Error&) {
    throw;
  }

  // Fallback format seen in deployed transcripts:
  //   Search: <query>      (one per line)
  //   Visit: <url> / Visit goal: <goal>
  ToolCall call;
  bool is_search = false;
  bool is_visit = false;
  std::istringstream is(trimmed);
  std::string line;
  while (std::getline(is, line)) {
    const std::string l = trim(line);
    if (l.empty()) continue;
    const std::string ll = lower(l);
    if (ll.rfind("search:", 0) == 0) {
      is_search = true;
      call.queries.push_back(trim(l.substr(7)));
    } else if (ll.rfind("visit goal:", 0) == 0) {
      call.goal = trim(l.substr(11));
    } else if (ll.rfind("visit:", 0) == 0) {
      is_visit = true;
      call.url = trim(l.substr(6));
    }
  }
  if (is_search == is_visit) {
    throw ParseError("unrecognized tool call body", trimmed);
  }
  call.tool = is_search ? ToolKind::Search : ToolKind::Visit;
  call.validate();
  return call;
}

}  // namespace

void ToolCall::validate() const {
  if (tool == ToolKind::Search) {
    if (queries.empty()) {
      throw ParseError("search call has no queries", "");
    }
    if (queries.size() > kMaxSearchQueries) {
      throw ParseError("search call exceeds the query cap", "");
    }
    for (const auto& q : queries) {
      if (trim(q).empty()) throw ParseError("empty search query", "");
    }
  } else {
    if (!is_absolute_url(url)) {
      throw ParseError("visit call has no valid absolute URL", url);
    }
  }
}

void InterventionRecord::validate() const {
  if (trim(guidance_text).empty()) {
    throw Error(ErrorCode::ValidationError, "intervention has empty guidance");
  }
  if (topics_used.size() > 3) {
    throw Error(ErrorCode::ValidationError,
                "intervention uses more than 3 topics");
  }
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Pending: return "pending";
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
    case Outcome::StepBudgetExhausted: return "step-budget-exhausted";
  }
  return "pending";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "pending") return Outcome::Pending;
  if (s == "success") return Outcome::Success;
  if (s == "failure") return Outcome::Failure;
  if (s == "step-budget-exhausted") return Outcome::StepBudgetExhausted;
  throw Error(ErrorCode::ValidationError, "unknown outcome: " + s);
}

StepFragment parse_response(const std::string& raw, const TagConvention& tags) {
  const auto reasoning = extract_block(raw, tags.thought_tag);
  if (!reasoning) {
    throw ParseError("missing <" + tags.thought_tag + "> block",
                     raw.substr(0, std::min<std::size_t>(raw.size(), 120)));
  }
  const auto tool_body = extract_block(raw, "tool_call");
  const auto answer_body = extract_block(raw, "answer");
  if (tool_body && answer_body) {
    throw ParseError("both tool_call and answer present", raw);
  }
  if (!tool_body && !answer_body) {
    throw ParseError("incomplete response: no tool_call or answer block", raw);
  }

  StepFragment frag;
  frag.reasoning = trim(*reasoning);
  if (tool_body) {
    frag.kind = StepKind::Process;
    frag.tool_call = parse_tool_call_body(*tool_body);
  } else {
    frag.kind = StepKind::Answer;
    const std::string answer = trim(*answer_body);
    if (answer.empty()) throw ParseError("empty answer block", raw);
    frag.answer = answer;
  }
  return frag;
}

std::string render_fragment(const StepFragment& fragment,
                            const TagConvention& tags) {
  std::ostringstream os;
  os << '<' << tags.thought_tag << '>' << fragment.reasoning << "</"
     << tags.thought_tag << ">\n";
  if (fragment.kind == StepKind::Process) {
    if (!fragment.tool_call) {
      throw Error(ErrorCode::ValidationError,
                  "process fragment without tool call");
    }
    nlohmann::json j;
    if (fragment.tool_call->tool == ToolKind::Search) {
      j["search"] = fragment.tool_call->queries;
    } else {
      j["visit"] = {{"url", fragment.tool_call->url},
                    {"goal", fragment.tool_call->goal}};
    }
    os << "<tool_call>" << j.dump() << "</tool_call>";
  } else {
    if (!fragment.answer) {
      throw Error(ErrorCode::ValidationError, "answer fragment without answer");
    }
    os << "<answer>" << *fragment.answer << "</answer>";
  }
  return os.str();
}

Trajectory::Trajectory(std::string query_id, std::string query,
                       std::size_t run_index, std::size_t max_steps)
    : query_id_(std::move(query_id)),
      query_(std::move(query)),
      run_index_(run_index),
      max_steps_(max_steps) {
  if (max_steps_ < 1) {
    throw Error(ErrorCode::ValidationError, "step budget must be >= 1");
  }
}

void Trajectory::append_step(Step step) {
  if (finalized()) {
    throw Error(ErrorCode::StateError, "append after finalize");
  }
  if (steps_.size() >= max_steps_) {
    throw Error(ErrorCode::BudgetError, "step budget exceeded");
  }
  if (!steps_.empty()) {
    const Step& last = steps_.back();
    if (last.kind == StepKind::Answer && !last.superseded) {
      throw Error(ErrorCode::StateError, "append after a live answer step");
    }
    if (step.intervention && last.intervention) {
      throw Error(ErrorCode::ValidationError,
                  "two consecutive steps carry interventions");
    }
  }
  if (step.kind == StepKind::Process && !step.tool_call) {
    throw Error(ErrorCode::ValidationError, "process step without tool call");
  }
  if (step.kind == StepKind::Answer &&
      (!step.answer || step.answer->empty())) {
    throw Error(ErrorCode::ValidationError, "answer step without answer text");
  }
  if (step.intervention) step.intervention->validate();
  steps_.push_back(std::move(step));
}

void Trajectory::supersede_last_answer() {
  if (finalized()) {
    throw Error(ErrorCode::StateError, "supersede after finalize");
  }
  if (steps_.empty() || steps_.back().kind != StepKind::Answer ||
      steps_.back().superseded) {
    throw Error(ErrorCode::StateError, "no live answer step to supersede");
  }
  steps_.back().superseded = true;
}

void Trajectory::finalize(Outcome outcome) {
  if (finalized()) {
    throw Error(ErrorCode::StateError, "trajectory already finalized");
  }
  if (outcome == Outcome::Pending) {
    throw Error(ErrorCode::ValidationError, "cannot finalize as pending");
  }
  outcome_ = outcome;
}

std::size_t Trajectory::intervention_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps_.begin(), steps_.end(),
                    [](const Step& s) { return s.intervention.has_value(); }));
}

void Trajectory::validate() const {
  if (steps_.size() > max_steps_) {
    throw Error(ErrorCode::ValidationError, "trajectory exceeds step budget");
  }
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const Step& s = steps_[i];
    if (s.kind == StepKind::Process && !s.tool_call) {
      throw Error(ErrorCode::ValidationError, "process step without tool call");
    }
    if (s.kind == StepKind::Answer && (!s.answer || s.answer->empty())) {
      throw Error(ErrorCode::ValidationError, "answer step without answer");
    }
    if (s.kind == StepKind::Answer && !s.superseded &&
        i + 1 != steps_.size()) {
      throw Error(ErrorCode::ValidationError,
                  "live answer step is not the last step");
    }
    if (s.tool_call) s.tool_call->validate();
    if (s.intervention) {
      s.intervention->validate();
      if (i > 0 && steps_[i - 1].intervention) {
        throw Error(ErrorCode::ValidationError,
                    "consecutive interventions violate the silence rule");
      }
    }
  }
}

namespace {

nlohmann::json step_to_json(const Step& s) {
  nlohmann::json j{{"kind", to_string(s.kind)},
                   {"reasoning", s.reasoning},
                   {"entropy",
                    {{"value", s.entropy.value},
                     {"token_count", s.entropy.token_count},
                     {"approximation", s.entropy.approximation}}},
                   {"superseded", s.superseded}};
  if (s.tool_call) {
    nlohmann::json tc{{"tool", s.tool_call->tool == ToolKind::Search
                                  ? "search"
                                  : "visit"}};
    if (s.tool_call->tool == ToolKind::Search) {
      tc["queries"] = s.tool_call->queries;
    } else {
      tc["url"] = s.tool_call->url;
      tc["goal"] = s.tool_call->goal;
    }
    j["tool_call"] = tc;
  }
  if (s.observation) j["observation"] = *s.observation;
  if (s.answer) j["answer"] = *s.answer;
  if (s.intervention) {
    j["intervention"] = {
        {"guidance_text", s.intervention->guidance_text},
        {"topics_used", s.intervention->topics_used},
        {"trigger_probability", s.intervention->trigger_probability},
        {"entropy_at_trigger", s.intervention->entropy_at_trigger}};
  }
  return j;
}

Step step_from_json(const nlohmann::json& j) {
  Step s;
  s.kind = step_kind_from_string(j.at("kind").get<std::string>());
  s.reasoning = j.value("reasoning", "");
  const auto& e = j.at("entropy");
  s.entropy.value = e.at("value").get<double>();
  s.entropy.token_count = e.at("token_count").get<std::size_t>();
  s.entropy.approximation = e.value("approximation", false);
  s.superseded = j.value("superseded", false);
  if (j.contains("tool_call")) {
    const auto& tc = j.at("tool_call");
    ToolCall call;
    if (tc.at("tool").get<std::string>() == "search") {
      call.tool = ToolKind::Search;
      call.queries = tc.at("queries").get<std::vector<std::string>>();
    } else {
      call.tool = ToolKind::Visit;
      call.url = tc.at("url").get<std::string>();
      call.goal = tc.value("goal", "");
    }
    s.tool_call = std::move(call);
  }
  if (j.contains("observation")) {
    s.observation = j.at("observation").get<std::string>();
  }
  if (j.contains("answer")) s.answer = j.at("answer").get<std::string>();
  if (j.contains("intervention")) {
    const auto& iv = j.at("intervention");
    InterventionRecord rec;
    rec.guidance_text = iv.at("guidance_text").get<std::string>();
    rec.topics_used = iv.value("topics_used", std::vector<std::string>{});
    rec.trigger_probability = iv.value("trigger_probability", 0.0);
    rec.entropy_at_trigger = iv.value("entropy_at_trigger", 0.0);
    s.intervention = std::move(rec);
  }
  return s;
}

}  // namespace

std::string to_json(const Trajectory& trajectory) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trajectory.steps()) steps.push_back(step_to_json(s));
  nlohmann::json j{{"schema_version", kTrajectorySchemaVersion},
                   {"query_id", trajectory.query_id()},
                   {"run_index", trajectory.run_index()},
                   {"query", trajectory.query()},
                   {"max_steps", trajectory.max_steps()},
                   {"outcome", to_string(trajectory.outcome())},
                   {"steps", steps}};
  return j.dump();
}

Trajectory trajectory_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int version = j.value("schema_version", 0);
  if (version != kTrajectorySchemaVersion) {
    throw Error(ErrorCode::ValidationError,
                "unsupported trajectory schema version");
  }
  Trajectory t(j.at("query_id").get<std::string>(),
               j.at("query").get<std::string>(),
               j.value("run_index", std::size_t{0}),
               j.value("max_steps", std::size_t{30}));
  for (const auto& sj : j.at("steps")) t.append_step(step_from_json(sj));
  const Outcome outcome = outcome_from_string(j.at("outcome").get<std::string>());
  if (outcome != Outcome::Pending) t.finalize(outcome);
  t.validate();
  return t;
}

void save_trajectories(const std::string& path,
                       const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::ValidationError, "cannot open store: " + path);
  }
  for (const auto& t : trajectories) out << to_json(t) << '\n';
}

void append_trajectory(const std::string& path, const Trajectory& trajectory) {
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw Error(ErrorCode::ValidationError, "cannot open store: " + path);
  }
  out << to_json(trajectory) << '\n';
}

TrajectoryLoadResult load_trajectories(const std::string& path) {
  TrajectoryLoadResult result;
  std::ifstream in(path);
  if (!in) return result;  // missing store reads as empty
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      result.trajectories.push_back(trajectory_from_json(line));
    } catch (const std::exception& e) {
      result.errors.emplace_back(line_no, e.what());
    }
  }
  return result;
}

}  // namespace expseek
