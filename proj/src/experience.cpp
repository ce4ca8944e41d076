// SPDX-License-Identifier: Apache-2.0
#include "expseek/experience.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expseek/errors.hpp"
#include "expseek/prompts.hpp"

namespace expseek {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::size_t word_count(const std::string& s) {
  std::istringstream is(s);
  std::string w;
  std::size_t n = 0;
  while (is >> w) ++n;
  return n;
}

}  // namespace

void ExperienceTriplet::validate() const {
  if (trim(behavior).empty() || trim(mistake).empty() ||
      trim(guidance).empty()) {
    throw Error(ErrorCode::ValidationError,
                "triplet " + id + " has an empty field");
  }
}

const Topic* ExperienceCollection::find_topic(
    const std::string& topic_id) const {
  for (const auto& t : topics) {
    if (t.topic_id == topic_id) return &t;
  }
  return nullptr;
}

void ExperienceBase::validate() const {
  auto check = [](const ExperienceCollection& coll, StepKind kind,
                  const char* name) {
    std::map<std::string, std::size_t> assignment_count;
    for (const auto& t : coll.triplets) {
      t.validate();
      if (t.step_kind != kind) {
        throw Error(ErrorCode::ValidationError,
                    std::string("triplet ") + t.id + " in the wrong " + name +
                        " collection");
      }
      assignment_count[t.id] = 0;
    }
    for (const auto& topic : coll.topics) {
      if (word_count(topic.label_text) < 10) {
        throw Error(ErrorCode::ValidationError,
                    "topic " + topic.topic_id + " label is too short");
      }
      for (const auto& id : topic.member_ids) {
        const auto it = assignment_count.find(id);
        if (it == assignment_count.end()) {
          throw Error(ErrorCode::ValidationError,
                      "topic " + topic.topic_id + " names unknown triplet " +
                          id);
        }
        it->second++;
      }
    }
    for (const auto& [id, count] : assignment_count) {
      if (count != 1) {
        throw Error(ErrorCode::ValidationError,
                    "triplet " + id + " must belong to exactly one topic");
      }
    }
  };
  check(process, StepKind::Process, "process");
  check(answer, StepKind::Answer, "answer");
}

namespace {

nlohmann::json collection_to_json(const ExperienceCollection& coll) {
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& t : coll.topics) {
    topics.push_back({{"topic_id", t.topic_id},
                      {"label_text", t.label_text},
                      {"member_ids", t.member_ids}});
  }
  nlohmann::json triplets = nlohmann::json::array();
  for (const auto& t : coll.triplets) {
    nlohmann::json tj{{"id", t.id},
                      {"behavior", t.behavior},
                      {"mistake", t.mistake},
                      {"guidance", t.guidance},
                      {"step_kind", to_string(t.step_kind)},
                      {"source",
                       {{"query_id", t.source_query_id},
                        {"run_index", t.source_run_index},
                        {"step_index", t.source_step_index}}}};
    if (t.topic_id) tj["topic_id"] = *t.topic_id;
    triplets.push_back(std::move(tj));
  }
  return {{"topics", topics}, {"triplets", triplets}};
}

ExperienceCollection collection_from_json(const nlohmann::json& j) {
  ExperienceCollection coll;
  for (const auto& tj : j.at("topics")) {
    Topic t;
    t.topic_id = tj.at("topic_id").get<std::string>();
    t.label_text = tj.at("label_text").get<std::string>();
    t.member_ids = tj.value("member_ids", std::vector<std::string>{});
    coll.topics.push_back(std::move(t));
  }
  for (const auto& tj : j.at("triplets")) {
    ExperienceTriplet t;
    t.id = tj.at("id").get<std::string>();
    t.behavior = tj.at("behavior").get<std::string>();
    t.mistake = tj.at("mistake").get<std::string>();
    t.guidance = tj.at("guidance").get<std::string>();
    t.step_kind = step_kind_from_string(tj.at("step_kind").get<std::string>());
    if (tj.contains("topic_id")) {
      t.topic_id = tj.at("topic_id").get<std::string>();
    }
    if (tj.contains("source")) {
      const auto& src = tj.at("source");
      t.source_query_id = src.value("query_id", "");
      t.source_run_index = src.value("run_index", std::size_t{0});
      t.source_step_index = src.value("step_index", std::size_t{0});
    }
    coll.triplets.push_back(std::move(t));
  }
  return coll;
}

}  // namespace

std::string to_json(const ExperienceBase& base) {
  nlohmann::json j{{"provenance",
                    {{"agent_model", base.agent_model},
                     {"construction_seed", base.construction_seed}}},
                   {"process", collection_to_json(base.process)},
                   {"answer", collection_to_json(base.answer)}};
  return j.dump(2);
}

ExperienceBase experience_base_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperienceBase base;
  base.agent_model = j.at("provenance").value("agent_model", "");
  base.construction_seed =
      j.at("provenance").value("construction_seed", std::uint64_t{0});
  base.process = collection_from_json(j.at("process"));
  base.answer = collection_from_json(j.at("answer"));
  base.validate();
  return base;
}

void save_base(const std::string& path, const ExperienceBase& base) {
  base.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::ValidationError, "cannot open base file: " + path);
  }
  out << to_json(base) << '\n';
}

ExperienceBase load_base(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open base file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return experience_base_from_json(ss.str());
}

PairingResult pair_runs(const std::vector<JudgedRun>& runs) {
  PairingResult result;
  const Trajectory* first_success = nullptr;
  for (const auto& run : runs) {
    if (run.success) {
      first_success = &run.trajectory;
      break;
    }
  }
  for (const auto& run : runs) {
    if (run.success) {
      for (const auto& step : run.trajectory.steps()) {
        result.success_samples.push_back(
            {step.entropy.value, step.kind, Correctness::Correct});
      }
    } else if (first_success != nullptr) {
      result.pairs.push_back({first_success, &run.trajectory});
    }
  }
  return result;
}

std::string render_trajectory_text(const Trajectory& trajectory) {
  std::ostringstream os;
  os << "Question: " << trajectory.query() << "\n";
  std::size_t r = 1;
  for (const auto& step : trajectory.steps()) {
    os << "R" << r << ": <thought>" << step.reasoning << "</thought>";
    if (step.kind == StepKind::Process) {
      os << " <tool_call>";
      if (step.tool_call) {
        if (step.tool_call->tool == ToolKind::Search) {
          for (std::size_t i = 0; i < step.tool_call->queries.size(); ++i) {
            if (i > 0) os << "; ";
            os << "Search: " << step.tool_call->queries[i];
          }
        } else {
          os << "Visit: " << step.tool_call->url
             << " | Goal: " << step.tool_call->goal;
        }
      }
      os << "</tool_call>\n";
      if (step.observation) os << "O" << r << ": " << *step.observation << "\n";
    } else {
      os << " <answer>" << step.answer.value_or("") << "</answer>\n";
    }
    ++r;
  }
  return os.str();
}

namespace {

// One parsed STEP block of the extraction reply.
struct StepBlock {
  bool has_triplet = false;
  std::string behavior;
  std::string mistake;
  std::string guidance;
};

std::vector<StepBlock> parse_step_blocks(const std::string& reply) {
  std::vector<StepBlock> blocks;
  std::istringstream is(reply);
  std::string line;
  StepBlock* current = nullptr;
  bool in_triplet = false;
  std::string* field = nullptr;
  while (std::getline(is, line)) {
    const std::string l = trim(line);
    if (l.rfind("# STEP", 0) == 0) {
      blocks.emplace_back();
      current = &blocks.back();
      in_triplet = false;
      field = nullptr;
      continue;
    }
    if (current == nullptr) continue;
    if (l.rfind("# TOTAL", 0) == 0 || l.rfind("# Total", 0) == 0) {
      current = nullptr;
      continue;
    }
    if (l.rfind("## Triplet", 0) == 0) {
      in_triplet = true;
      field = nullptr;
      continue;
    }
    if (l.rfind("##", 0) == 0) {
      in_triplet = false;
      field = nullptr;
      continue;
    }
    if (!in_triplet) continue;
    static const std::string kBehavior = "- Student's current state:";
    static const std::string kMistake =
        "- Reason why this STEP leads to the final error:";
    static const std::string kGuidance =
        "- What to say before the next STEP to improve the current state:";
    if (l.rfind("- None", 0) == 0) {
      field = nullptr;
    } else if (l.rfind(kBehavior, 0) == 0) {
      current->has_triplet = true;
      current->behavior = trim(l.substr(kBehavior.size()));
      field = &current->behavior;
    } else if (l.rfind(kMistake, 0) == 0) {
      current->mistake = trim(l.substr(kMistake.size()));
      field = &current->mistake;
    } else if (l.rfind(kGuidance, 0) == 0) {
      current->guidance = trim(l.substr(kGuidance.size()));
      field = &current->guidance;
    } else if (field != nullptr && !l.empty() && l[0] != '-' && l[0] != '(') {
      *field += " " + l;  // continuation line
    }
  }
  return blocks;
}

}  // namespace

ExtractionResult parse_extraction_reply(const std::string& reply,
                                        const TrajectoryPair& pair) {
  const auto& failed = *pair.failure;
  const auto blocks = parse_step_blocks(reply);
  if (blocks.size() != failed.steps().size()) {
    throw Error(ErrorCode::ExtractionError,
                "STEP block count " + std::to_string(blocks.size()) +
                    " does not match trajectory step count " +
                    std::to_string(failed.steps().size()));
  }
  ExtractionResult result;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const StepBlock& b = blocks[i];
    if (b.has_triplet) {
      ExperienceTriplet t;
      t.id = failed.query_id() + "-r" + std::to_string(failed.run_index()) +
             "-s" + std::to_string(i);
      t.behavior = b.behavior;
      t.mistake = b.mistake;
      t.guidance = b.guidance;
      t.step_kind = failed.steps()[i].kind;
      t.source_query_id = failed.query_id();
      t.source_run_index = failed.run_index();
      t.source_step_index = i;
      t.validate();
      result.triplets.push_back(std::move(t));
      result.labels.push_back(Correctness::Incorrect);
    } else {
      result.labels.push_back(Correctness::Correct);
    }
  }
  if (result.triplets.empty()) {
    throw Error(ErrorCode::ExtractionError,
                "reply marks every step correct; at least one triplet is "
                "required for a failed trajectory");
  }
  return result;
}

ExtractionResult extract_triplets(const TrajectoryPair& pair,
                                  const std::string& question,
                                  const std::string& labeled_answer,
                                  Backend& tool_model) {
  const PromptAsset asset = load_prompt(prompt_names::kTripletExtraction);
  const std::string prompt = render_prompt(
      asset,
      {{"question", question},
       {"answer", labeled_answer},
       {"true_traj", render_trajectory_text(*pair.success)},
       {"false_traj", render_trajectory_text(*pair.failure)},
       {"step_num", std::to_string(pair.failure->steps().size())}});
  ChatRequest req;
  req.messages = {{Role::User, prompt}};
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse resp = tool_model.complete(req);
    try {
      return parse_extraction_reply(resp.text, pair);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::ExtractionError,
              "triplet extraction failed after retry: " + last_error);
}

std::map<std::string, std::string> parse_topic_reply(
    const std::string& reply, const std::vector<std::string>& required_ids) {
  std::map<std::string, std::string> out;
  std::istringstream is(reply);
  std::string line;
  while (std::getline(is, line)) {
    const std::string l = trim(line);
    const auto bar = l.find('|');
    if (bar == std::string::npos) continue;
    const std::string id = trim(l.substr(0, bar));
    const std::string label = trim(l.substr(bar + 1));
    if (id.empty() || label.empty()) continue;
    out[id] = label;
  }
  for (const auto& id : required_ids) {
    if (out.find(id) == out.end()) {
      throw Error(ErrorCode::ConsistencyError,
                  "topic reply omits id " + id);
    }
  }
  return out;
}

namespace {

std::string format_assigned_list(
    const std::vector<ExperienceTriplet>& triplets,
    const std::map<std::string, std::string>& assignment) {
  if (assignment.empty()) return "(none yet)";
  std::ostringstream os;
  for (const auto& t : triplets) {
    const auto it = assignment.find(t.id);
    if (it == assignment.end()) continue;
    os << t.id << " | " << it->second << "\n";
  }
  return os.str();
}

std::string format_new_list(const std::vector<const ExperienceTriplet*>& batch) {
  std::ostringstream os;
  for (const auto* t : batch) {
    os << "id: " << t->id << "\nbehavior: " << t->behavior
       << "\nmistake: " << t->mistake << "\n\n";
  }
  return os.str();
}

}  // namespace

std::map<std::string, std::string> induce_topics(
    std::vector<ExperienceTriplet>& triplets, Backend& tool_model,
    std::size_t batch_size) {
  if (triplets.empty()) {
    throw Error(ErrorCode::EmptyInput, "no triplets to induce topics for");
  }
  if (batch_size < 1) {
    throw Error(ErrorCode::ValidationError, "batch size must be >= 1");
  }
  const PromptAsset asset = load_prompt(prompt_names::kTopicInduction);
  const std::string output_format =
      "<id> | <scenario-narrative label>   (one line per behavior, covering "
      "every previously labeled id and every new id)";

  std::map<std::string, std::string> assignment;

  // Batches processed in stable order; a failing batch is retried once, then
  // split in half and re-queued.
  std::deque<std::vector<const ExperienceTriplet*>> queue;
  for (std::size_t i = 0; i < triplets.size(); i += batch_size) {
    std::vector<const ExperienceTriplet*> batch;
    for (std::size_t k = i; k < std::min(i + batch_size, triplets.size());
         ++k) {
      batch.push_back(&triplets[k]);
    }
    queue.push_back(std::move(batch));
  }

  while (!queue.empty()) {
    auto batch = std::move(queue.front());
    queue.pop_front();

    std::vector<std::string> required;
    for (const auto& [id, label] : assignment) {
      (void)label;
      required.push_back(id);
    }
    for (const auto* t : batch) required.push_back(t->id);

    const std::string prompt = render_prompt(
        asset, {{"exp_list", format_assigned_list(triplets, assignment)},
                {"new_exp_list", format_new_list(batch)},
                {"output_format", output_format}});
    ChatRequest req;
    req.messages = {{Role::User, prompt}};

    bool done = false;
    for (int attempt = 0; attempt < 2 && !done; ++attempt) {
      const ChatResponse resp = tool_model.complete(req);
      try {
        auto parsed = parse_topic_reply(resp.text, required);
        // The reply replaces the running assignment (Modify may relabel).
        for (auto& [id, label] : parsed) assignment[id] = std::move(label);
        done = true;
      } catch (const Error&) {
        if (attempt == 1) {
          if (batch.size() <= 1) throw;
          const std::size_t half = batch.size() / 2;
          queue.push_front(std::vector<const ExperienceTriplet*>(
              batch.begin() + static_cast<std::ptrdiff_t>(half), batch.end()));
          queue.push_front(std::vector<const ExperienceTriplet*>(
              batch.begin(), batch.begin() + static_cast<std::ptrdiff_t>(half)));
          done = true;
        }
      }
    }
  }

  for (auto& t : triplets) {
    const auto it = assignment.find(t.id);
    if (it == assignment.end()) {
      throw Error(ErrorCode::ConsistencyError,
                  "triplet " + t.id + " received no topic");
    }
  }
  return assignment;
}

namespace {

ExperienceCollection assemble_collection(
    std::vector<ExperienceTriplet> triplets,
    const std::map<std::string, std::string>& assignment,
    const std::string& prefix) {
  ExperienceCollection coll;
  std::map<std::string, std::string> label_to_topic_id;  // first-seen order ids
  for (auto& t : triplets) {
    const std::string& label = assignment.at(t.id);
    auto it = label_to_topic_id.find(label);
    if (it == label_to_topic_id.end()) {
      const std::string topic_id =
          prefix + std::to_string(coll.topics.size());
      it = label_to_topic_id.emplace(label, topic_id).first;
      coll.topics.push_back({topic_id, label, {}});
    }
    for (auto& topic : coll.topics) {
      if (topic.topic_id == it->second) {
        topic.member_ids.push_back(t.id);
        break;
      }
    }
    t.topic_id = it->second;
    coll.triplets.push_back(std::move(t));
  }
  return coll;
}

}  // namespace

ConstructionResult build_experience_base(
    const std::vector<QueryWithAnswer>& queries,
    const std::map<std::string, std::vector<JudgedRun>>& runs_by_query,
    Backend& tool_model, const std::string& agent_model, std::uint64_t seed) {
  ConstructionResult result;
  result.base.agent_model = agent_model;
  result.base.construction_seed = seed;

  std::vector<ExperienceTriplet> process_triplets;
  std::vector<ExperienceTriplet> answer_triplets;

  for (const auto& q : queries) {
    const auto it = runs_by_query.find(q.query_id);
    if (it == runs_by_query.end()) continue;
    const PairingResult pairing = pair_runs(it->second);
    result.entropy_samples.insert(result.entropy_samples.end(),
                                  pairing.success_samples.begin(),
                                  pairing.success_samples.end());
    result.analyzed_step_count += pairing.success_samples.size();
    result.pair_count += pairing.pairs.size();

    for (const auto& pair : pairing.pairs) {
      ExtractionResult extraction;
      try {
        extraction =
            extract_triplets(pair, q.question, q.labeled_answer, tool_model);
      } catch (const Error& e) {
        result.warnings.push_back("pair for query " + q.query_id + " run " +
                                  std::to_string(pair.failure->run_index()) +
                                  " skipped: " + e.what());
        continue;
      }
      const auto& steps = pair.failure->steps();
      for (std::size_t i = 0; i < steps.size(); ++i) {
        result.entropy_samples.push_back({steps[i].entropy.value,
                                          steps[i].kind,
                                          extraction.labels[i]});
        ++result.analyzed_step_count;
      }
      for (auto& t : extraction.triplets) {
        (t.step_kind == StepKind::Process ? process_triplets : answer_triplets)
            .push_back(std::move(t));
      }
    }
  }

  // Process and answer collections are topic-induced separately.
  if (!process_triplets.empty()) {
    const auto assignment = induce_topics(process_triplets, tool_model);
    result.base.process =
        assemble_collection(std::move(process_triplets), assignment, "p");
  }
  if (!answer_triplets.empty()) {
    const auto assignment = induce_topics(answer_triplets, tool_model);
    result.base.answer =
        assemble_collection(std::move(answer_triplets), assignment, "a");
  }
  result.base.validate();
  return result;
}

std::vector<QueryWithAnswer> load_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open queries file: " + path);
  }
  std::vector<QueryWithAnswer> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    out.push_back({j.at("query_id").get<std::string>(),
                   j.at("question").get<std::string>(),
                   j.at("answer").get<std::string>()});
  }
  return out;
}

std::string entropy_samples_to_jsonl(
    const std::vector<EntropySample>& samples) {
  std::ostringstream os;
  for (const auto& s : samples) {
    nlohmann::json j{{"entropy", s.entropy},
                     {"step_kind", to_string(s.step_kind)},
                     {"correctness", to_string(s.correctness)}};
    os << j.dump() << '\n';
  }
  return os.str();
}

std::vector<EntropySample> entropy_samples_from_jsonl(const std::string& text) {
  std::vector<EntropySample> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    out.push_back(
        {j.at("entropy").get<double>(),
         step_kind_from_string(j.at("step_kind").get<std::string>()),
         correctness_from_string(j.at("correctness").get<std::string>())});
  }
  return out;
}

}  // namespace expseek
