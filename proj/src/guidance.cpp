// SPDX-License-Identifier: Apache-2.0
#include "expseek/guidance.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

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

ChatResponse ask(Backend& model, const std::string& prompt) {
  ChatRequest req;
  req.messages = {{Role::User, prompt}};
  return model.complete(req);
}

}  // namespace

std::vector<std::size_t> parse_topic_selection(const std::string& reply,
                                               std::size_t candidate_count) {
  std::istringstream is(reply);
  std::string line;
  bool in_section = false;
  std::vector<std::size_t> out;
  while (std::getline(is, line)) {
    const std::string l = trim(line);
    if (l.rfind("# Selected Topic idx", 0) == 0) {
      in_section = true;
      continue;
    }
    if (!in_section || l.empty()) continue;
    if (l[0] == '#' || l[0] == '`') break;
    std::istringstream tokens(l);
    std::string tok;
    while (tokens >> tok) {
      try {
        const unsigned long idx = std::stoul(tok);
        if (idx < candidate_count) {
          if (std::find(out.begin(), out.end(), idx) == out.end()) {
            out.push_back(idx);
          }
        }
      } catch (const std::exception&) {
        // non-numeric token: skip
      }
    }
    break;  // the section body is a single index line
  }
  if (!in_section) {
    throw ParseError("reply lacks the Selected Topic idx section", "");
  }
  if (out.empty()) {
    throw ParseError("no in-range topic index in selection reply", "");
  }
  if (out.size() > 3) out.resize(3);
  return out;
}

std::string render_topic_list(const std::vector<Topic>& topics) {
  std::ostringstream os;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    os << i << ". " << topics[i].label_text << "\n";
  }
  return os.str();
}

std::vector<std::size_t> select_topics(const std::string& history,
                                       const std::vector<Topic>& candidates,
                                       Backend& experience_model,
                                       std::string* transcript,
                                       bool* used_fallback) {
  if (used_fallback != nullptr) *used_fallback = false;
  if (candidates.empty()) {
    throw Error(ErrorCode::EmptyInput, "no candidate topics");
  }
  if (candidates.size() <= 3) {
    std::vector<std::size_t> all(candidates.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  const PromptAsset asset = load_prompt(prompt_names::kTopicSelection);
  const std::string prompt = render_prompt(
      asset,
      {{"history", history}, {"topic_list", render_topic_list(candidates)}});
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse resp = ask(experience_model, prompt);
    if (transcript != nullptr) {
      if (!transcript->empty()) *transcript += "\n---\n";
      *transcript += resp.text;
    }
    try {
      return parse_topic_selection(resp.text, candidates.size());
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  // Fallback: three largest topics by member count, stable on ties.
  if (used_fallback != nullptr) *used_fallback = true;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return candidates[a].member_ids.size() >
                            candidates[b].member_ids.size();
                   });
  order.resize(3);
  return order;
}

std::string parse_guidance_reply(const std::string& reply) {
  std::istringstream is(reply);
  std::string line;
  bool in_section = false;
  std::string body;
  while (std::getline(is, line)) {
    const std::string l = trim(line);
    if (l.rfind("# Guidance Content", 0) == 0) {
      in_section = true;
      continue;
    }
    if (!in_section) continue;
    if (!l.empty() && (l[0] == '#' || l.rfind("```", 0) == 0)) break;
    if (!body.empty()) body += "\n";
    body += line;
  }
  if (!in_section) {
    throw ParseError("reply lacks the Guidance Content section", "");
  }
  body = trim(body);
  if (body.empty()) {
    throw ParseError("Guidance Content section is empty", "");
  }
  return body;
}

std::string render_topic_kb(const ExperienceCollection& collection,
                            const std::vector<std::size_t>& selected) {
  std::ostringstream os;
  for (const std::size_t idx : selected) {
    const Topic& topic = collection.topics.at(idx);
    os << "Topic: " << topic.label_text << "\n";
    for (const auto& id : topic.member_ids) {
      for (const auto& t : collection.triplets) {
        if (t.id != id) continue;
        os << "- Behavior: " << t.behavior << "\n  Mistake: " << t.mistake
           << "\n  Guidance: " << t.guidance << "\n";
        break;
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string generate_guidance(const std::string& history,
                              const ExperienceCollection& collection,
                              const std::vector<std::size_t>& selected,
                              Backend& experience_model,
                              std::string* transcript) {
  if (selected.empty()) {
    throw Error(ErrorCode::EmptyInput, "no selected topics");
  }
  const PromptAsset asset = load_prompt(prompt_names::kGuidanceGeneration);
  const std::string prompt = render_prompt(
      asset, {{"history", history},
              {"topic_kb", render_topic_kb(collection, selected)}});
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse resp = ask(experience_model, prompt);
    if (transcript != nullptr) {
      if (!transcript->empty()) *transcript += "\n---\n";
      *transcript += resp.text;
    }
    try {
      return parse_guidance_reply(resp.text);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::ParseError,
              "guidance generation failed after retry: " + last_error);
}

std::string generate_direct_guidance(const std::string& history,
                                     Backend& experience_model,
                                     std::string* transcript) {
  const PromptAsset asset = load_prompt(prompt_names::kDirectGuidance);
  const std::string prompt = render_prompt(asset, {{"history", history}});
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse resp = ask(experience_model, prompt);
    if (transcript != nullptr) {
      if (!transcript->empty()) *transcript += "\n---\n";
      *transcript += resp.text;
    }
    try {
      return parse_guidance_reply(resp.text);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::ParseError,
              "direct guidance failed after retry: " + last_error);
}

std::string wrap_guidance(const std::string& guidance,
                          const TagConvention& tags) {
  return "<" + tags.guidance_tag + ">" + guidance + "</" + tags.guidance_tag +
         ">";
}

std::string inject_into_observation(const std::string& observation,
                                    const std::string& guidance,
                                    const TagConvention& tags) {
  return observation + "\n" + wrap_guidance(guidance, tags);
}

GuidanceResult GuidanceEngine::generate(const GuidanceRequest& request) const {
  GuidanceResult result;
  const ExperienceCollection* coll =
      base_ != nullptr ? &base_->collection(request.step_kind) : nullptr;
  if (coll == nullptr || coll->topics.empty()) {
    result.direct_route = true;
    result.guidance_text = generate_direct_guidance(
        request.history, *experience_model_, &result.stage_two_transcript);
    return result;
  }
  const std::vector<std::size_t> selected =
      select_topics(request.history, coll->topics, *experience_model_,
                    &result.stage_one_transcript, &result.selection_fallback);
  for (const std::size_t idx : selected) {
    result.selected_topic_ids.push_back(coll->topics[idx].topic_id);
  }
  result.guidance_text =
      generate_guidance(request.history, *coll, selected, *experience_model_,
                        &result.stage_two_transcript);
  return result;
}

}  // namespace expseek
