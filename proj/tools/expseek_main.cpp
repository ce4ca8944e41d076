// SPDX-License-Identifier: Apache-2.0
//
// Single entry point: build-exp, estimate-thresholds, run, eval, analyze.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "expseek/agent.hpp"
#include "expseek/config.hpp"
#include "expseek/errors.hpp"
#include "expseek/evaluation.hpp"
#include "expseek/experience.hpp"
#include "expseek/guidance.hpp"
#include "expseek/trigger.hpp"
#include "expseek/web_tools.hpp"

namespace {

using namespace expseek;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::BackendError:
    case ErrorCode::ScriptUnderrun:
    case ErrorCode::CapabilityError:
      return 3;
    default:
      return 2;
  }
}

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;  // key=value overrides
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "JSON configuration file");
  cmd->add_option("--set", opts.sets,
                  "key=value override (highest precedence)");
}

Config resolve_config(const CommonOpts& opts,
                      std::map<std::string, std::string> extra) {
  for (const auto& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "--set expects key=value, got " + kv);
    }
    extra.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return load_config(opts.config_file, extra);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::ValidationError, "cannot open output: " + path);
  }
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

int cmd_build_exp(const CommonOpts& opts, const std::string& runs_path,
                  const std::string& out_path,
                  const std::string& entropy_out) {
  const Config config = resolve_config(opts, {});
  check_paths_exist(config, {"experience"});
  if (config.queries_path.empty()) {
    throw Error(ErrorCode::ConfigError, "build-exp needs a queries path");
  }
  const auto queries = load_queries(config.queries_path);
  const auto reports = load_reports(runs_path);
  std::map<std::string, std::vector<JudgedRun>> runs_by_query;
  for (const auto& r : reports) {
    runs_by_query[r.trajectory.query_id()].push_back(
        {r.trajectory, r.judge_verdict.value_or(false)});
  }
  auto tool_model = make_backend(config, "experience");
  const ConstructionResult result = build_experience_base(
      queries, runs_by_query, *tool_model,
      config.backends.count("agent") ? config.backends.at("agent").model_name
                                     : "unknown",
      config.seed);
  save_base(out_path, result.base);
  if (!entropy_out.empty()) {
    write_text(entropy_out, entropy_samples_to_jsonl(result.entropy_samples));
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "pairs: " << result.pair_count
            << " analyzed-steps: " << result.analyzed_step_count
            << " process-triplets: " << result.base.process.triplets.size()
            << " answer-triplets: " << result.base.answer.triplets.size()
            << "\n";
  return 0;
}

int cmd_estimate(const CommonOpts& opts, const std::string& samples_path,
                 const std::string& out_path, const std::string& model_name) {
  const Config config = resolve_config(opts, {});
  std::ifstream in(samples_path);
  if (!in) {
    throw Error(ErrorCode::ConfigError,
                "cannot open samples file: " + samples_path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const auto samples = entropy_samples_from_jsonl(ss.str());

  ThresholdArtifact artifact;
  artifact.model_name = model_name;
  artifact.seed = config.seed;
  Rng rng(config.seed);
  for (const StepKind kind : {StepKind::Process, StepKind::Answer}) {
    std::vector<double> correct;
    std::vector<double> incorrect;
    for (const auto& s : samples) {
      if (s.step_kind != kind) continue;
      (s.correctness == Correctness::Correct ? correct : incorrect)
          .push_back(s.entropy);
    }
    Rng sub = rng.substream(kind == StepKind::Process ? 0 : 1);
    const ThresholdInterval interval = estimate_interval(
        correct, incorrect, config.n_bootstrap, config.confidence, sub, kind);
    (kind == StepKind::Process ? artifact.process : artifact.answer) = interval;
  }
  write_text(out_path, to_json(artifact));
  std::cout << "process: [" << artifact.process.lower << ", "
            << artifact.process.upper << "] answer: [" << artifact.answer.lower
            << ", " << artifact.answer.upper << "]\n";
  return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& out_path) {
  const Config config = resolve_config(opts, {});
  const bool vanilla = config.mode == "vanilla";
  std::vector<std::string> roles = {"agent", "summarizer"};
  if (!vanilla) roles.push_back("experience");
  check_paths_exist(config, roles);
  if (config.queries_path.empty()) {
    throw Error(ErrorCode::ConfigError, "run needs a queries path");
  }
  if (config.corpus_path.empty()) {
    throw Error(ErrorCode::ConfigError, "run needs a corpus path");
  }

  EpisodeConfig episode;
  episode.max_steps = config.max_steps;
  episode.temperature = config.temperature;
  episode.top_p = config.top_p;
  episode.silence_length = config.silence_length;
  episode.seed = config.seed;
  episode.triggers_enabled = !vanilla;
  episode.process_enabled = config.mode != "answer-only";
  episode.answer_enabled = config.mode != "process-only";
  if (!vanilla) {
    if (config.thresholds_path.empty()) {
      throw Error(ErrorCode::ConfigError, "non-vanilla run needs thresholds");
    }
    std::ifstream in(config.thresholds_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const ThresholdArtifact artifact = threshold_artifact_from_json(ss.str());
    episode.process_interval = artifact.process;
    episode.answer_interval = artifact.answer;
  }

  std::shared_ptr<ExperienceBase> base;
  if (!vanilla && !config.exp_base_path.empty()) {
    base = std::make_shared<ExperienceBase>(load_base(config.exp_base_path));
  }
  const SimulatedCorpus corpus = SimulatedCorpus::load(config.corpus_path);

  const auto query_records = load_queries(config.queries_path);
  std::vector<QuerySpec> queries;
  for (const auto& q : query_records) {
    queries.push_back({q.query_id, q.question});
  }

  CollaboratorFactory factory = [&](const QuerySpec&, std::size_t) {
    EpisodeCollaborators c;
    c.agent_model = make_backend(config, "agent");
    c.env = std::make_shared<SimulatedEnvironment>(
        corpus, ToolSettings{}, make_backend(config, "summarizer"));
    if (!vanilla) {
      auto experience_model = make_backend(config, "experience");
      // Keep the backend alive alongside the engine.
      struct Holder : GuidanceEngine {
        Holder(std::shared_ptr<Backend> m, const ExperienceBase* b)
            : GuidanceEngine(*m, b), model(std::move(m)) {}
        std::shared_ptr<Backend> model;
      };
      c.guidance = std::make_shared<Holder>(experience_model, base.get());
    }
    return c;
  };

  const auto reports =
      run_batch(queries, config.runs_per_query, episode, factory);
  save_reports(out_path, reports);
  std::cout << "episodes: " << reports.size() << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& reports_path,
             std::size_t k, const std::string& out_path) {
  const Config config = resolve_config(opts, {});
  check_paths_exist(config, {"judge"});
  if (config.queries_path.empty()) {
    throw Error(ErrorCode::ConfigError,
                "eval needs a queries path for labeled answers");
  }
  auto reports = load_reports(reports_path);
  std::map<std::string, std::string> answers;
  for (const auto& q : load_queries(config.queries_path)) {
    answers[q.query_id] = q.labeled_answer;
  }
  auto judge_model = make_backend(config, "judge");
  const MetricsReport metrics =
      evaluate_reports(reports, answers, *judge_model, k);
  save_reports(reports_path, reports);  // verdicts written back
  const std::string text = to_json(metrics);
  if (!out_path.empty()) write_text(out_path, text);
  std::cout << text << "\n";
  return 0;
}

int cmd_analyze(const std::string& vanilla_path, const std::string& expseek_path,
                const std::string& out_path) {
  const auto vanilla = load_reports(vanilla_path);
  const auto expseek = load_reports(expseek_path);
  const EntropyShiftReport report = entropy_shift_report(vanilla, expseek);
  const std::string text = to_json(report);
  if (!out_path.empty()) write_text(out_path, text);
  std::cout << text << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-triggered experience guidance for web agents"};
  app.require_subcommand(1);

  CommonOpts build_opts;
  std::string build_runs;
  std::string build_out = "exp_base.json";
  std::string build_entropy_out;
  auto* build = app.add_subcommand(
      "build-exp", "Construct the experience base from judged runs");
  add_common(build, build_opts);
  build->add_option("--runs", build_runs, "Judged episode reports (JSONL)")
      ->required();
  build->add_option("--out", build_out, "Experience base output path");
  build->add_option("--entropy-out", build_entropy_out,
                    "Labeled entropy sample export (JSONL)");

  CommonOpts est_opts;
  std::string est_samples;
  std::string est_out = "thresholds.json";
  std::string est_model = "unknown";
  auto* est = app.add_subcommand("estimate-thresholds",
                                 "Bootstrap the trigger intervals");
  add_common(est, est_opts);
  est->add_option("--samples", est_samples, "Labeled entropy samples (JSONL)")
      ->required();
  est->add_option("--out", est_out, "Threshold artifact output path");
  est->add_option("--model-name", est_model, "Agent model the samples are from");

  CommonOpts run_opts;
  std::string run_out = "reports.jsonl";
  auto* run = app.add_subcommand("run", "Execute the query x run grid");
  add_common(run, run_opts);
  run->add_option("--out", run_out, "Episode report output path (JSONL)");

  CommonOpts eval_opts;
  std::string eval_reports;
  std::size_t eval_k = 3;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Judge reports and compute metrics");
  add_common(eval, eval_opts);
  eval->add_option("--reports", eval_reports, "Episode reports (JSONL)")
      ->required();
  eval->add_option("--k", eval_k, "k for pass@k");
  eval->add_option("--out", eval_out, "Metrics output path");

  std::string an_vanilla;
  std::string an_expseek;
  std::string an_out;
  auto* analyze =
      app.add_subcommand("analyze", "Entropy-shift comparison report");
  analyze->add_option("--vanilla", an_vanilla, "Vanilla reports (JSONL)")
      ->required();
  analyze->add_option("--expseek", an_expseek, "Guided reports (JSONL)")
      ->required();
  analyze->add_option("--out", an_out, "Histogram report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      return cmd_build_exp(build_opts, build_runs, build_out,
                           build_entropy_out);
    }
    if (est->parsed()) {
      return cmd_estimate(est_opts, est_samples, est_out, est_model);
    }
    if (run->parsed()) return cmd_run(run_opts, run_out);
    if (eval->parsed()) {
      return cmd_eval(eval_opts, eval_reports, eval_k, eval_out);
    }
    if (analyze->parsed()) return cmd_analyze(an_vanilla, an_expseek, an_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
