// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// delight analyze|train|eval|gradcheck|ablate
//
// Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.

#include <CLI/CLI.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "delight/analysis.hpp"
#include "delight/checkpoint.hpp"
#include "delight/config.hpp"
#include "delight/experiment.hpp"
#include "delight/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace delight;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kVerificationFailure = 2;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("DELIGHT_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (*end != '\0' || v[0] == '-') throw ConfigError(std::string("DELIGHT_SEED: not an unsigned integer: ") + v);
  return s;
}

/// Config file, then DELIGHT_SEED when the file has no train.seed, then flags.
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_flag) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const bool file_has_seed = doc.is_object() && doc.contains("train") && doc["train"].is_object() &&
                             doc["train"].contains("seed");
  if (seed_flag) {
    doc["train"]["seed"] = *seed_flag;
  } else if (!file_has_seed) {
    if (auto s = env_seed()) doc["train"]["seed"] = *s;
  }
  return parse_run_config(doc);
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(out + ": cannot open for writing");
  f << text;
}

nlohmann::ordered_json eval_json(const EvalResult& r, const std::string& kind) {
  nlohmann::ordered_json j{{"task", kind}, {"loss", r.loss}, {"perplexity", r.perplexity}};
  if (r.token_accuracy) j["token_accuracy"] = *r.token_accuracy;
  if (r.unigram_perplexity) j["unigram_perplexity"] = *r.unigram_perplexity;
  return j;
}

int cmd_analyze(const std::string& config, std::optional<std::size_t> n, std::optional<std::size_t> m,
                std::optional<std::string> format, const std::string& out) {
  RunConfig cfg = load_config(config, std::nullopt);
  if (n) cfg.report.source_tokens = *n;
  if (m) cfg.report.target_tokens = *m;
  if (format) cfg.report.format = *format;
  const Analysis a = analyze_model(cfg.model, cfg.report.source_tokens, cfg.report.target_tokens);
  write_output(cfg.report.format == "json" ? a.to_json() : a.to_csv(), out);
  return kOk;
}

int cmd_train(const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::size_t> steps,
              const std::string& out_dir) {
  RunConfig cfg = load_config(config, seed);
  if (steps) cfg.train.steps = *steps;
  fs::create_directories(out_dir);
  const std::string config_text = run_config_to_json(cfg).dump(2) + "\n";
  write_output(config_text, (fs::path(out_dir) / "config.json").string());

  DelightModel model(cfg.model);
  const TaskData data = make_task_data(cfg);
  std::ofstream metrics(fs::path(out_dir) / "metrics.jsonl", std::ios::binary | std::ios::trunc);
  if (!metrics) throw ConfigError(out_dir + ": cannot write metrics.jsonl");
  const RunResult run = run_training(cfg, model, data, &metrics);

  const Checkpoint ckpt = make_checkpoint(model.parameters(), run.steps, config_hash(cfg), run_config_to_json(cfg).dump());
  save_checkpoint((fs::path(out_dir) / "checkpoint.bin").string(), ckpt);

  nlohmann::ordered_json summary = eval_json(run.eval, cfg.task.kind);
  summary["steps"] = run.steps;
  summary["parameters"] = model.parameters().numel();
  write_output(summary.dump(2) + "\n", (fs::path(out_dir) / "summary.json").string());
  std::cout << summary.dump() << '\n';
  return kOk;
}

int cmd_eval(const std::string& checkpoint_path, std::optional<std::string> task) {
  if (!fs::exists(checkpoint_path)) throw CheckpointError(checkpoint_path + ": no such checkpoint");
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ckpt.config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(checkpoint_path + ": embedded config is corrupt: " + e.what());
  }
  const RunConfig cfg = parse_run_config(doc);
  if (config_hash(cfg) != ckpt.config_hash) throw CheckpointError(checkpoint_path + ": config hash mismatch");
  if (task && *task != cfg.task.kind) {
    throw ConfigError("--task " + *task + " does not match the checkpoint task " + cfg.task.kind);
  }
  DelightModel model(cfg.model);
  restore_parameters(ckpt, model.parameters());
  const TaskData data = make_task_data(cfg);
  nlohmann::ordered_json j = eval_json(evaluate(model, data, cfg), cfg.task.kind);
  j["step"] = ckpt.step;
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_gradcheck(const std::string& component, double tol, std::optional<std::uint64_t> seed) {
  GradcheckOptions opt;
  opt.tolerance = tol;
  const std::uint64_t s = seed ? *seed : env_seed().value_or(0);
  const auto& known = gradcheck_components();
  if (component != "all" && std::find(known.begin(), known.end(), component) == known.end()) {
    throw ConfigError("--component: unknown component " + component);
  }
  bool ok = true;
  for (const auto& r : run_gradcheck(component, opt, s)) {
    for (const auto& g : r.groups) {
      std::cout << r.component << ',' << g.name << ',' << g.elements << ',' << g.max_rel_error << '\n';
    }
    std::cout << (r.passed() ? "PASS " : "FAIL ") << r.component << " max_rel_error=" << r.max_rel_error();
    if (!r.passed()) std::cout << " failing=" << r.failing_groups();
    std::cout << '\n';
    ok = ok && r.passed();
  }
  return ok ? kOk : kVerificationFailure;
}

int cmd_ablate(const std::string& config, const std::string& axis, std::optional<std::uint64_t> seed,
               std::optional<std::size_t> steps, const std::string& out) {
  RunConfig cfg = load_config(config, seed);
  if (steps) cfg.train.steps = *steps;
  write_output(ablation_csv(run_ablation(cfg, axis)), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeLighT transformer toolkit"};
  app.require_subcommand(1);

  std::string config, out, checkpoint, component = "all", axis;
  std::optional<std::size_t> n, m, steps;
  std::optional<std::string> format, task;
  std::optional<std::uint64_t> seed;
  double tol = 1e-4;

  auto* analyze = app.add_subcommand("analyze", "Block plan, DExTra layers, cost report and depth");
  analyze->add_option("config", config, "JSON run config")->required();
  analyze->add_option("--n", n, "Source tokens");
  analyze->add_option("--m", m, "Target tokens");
  analyze->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  analyze->add_option("--out", out, "Output file (default stdout)");

  auto* train = app.add_subcommand("train", "Train on the configured toy task");
  train->add_option("config", config, "JSON run config")->required();
  train->add_option("--seed", seed);
  train->add_option("--steps", steps);
  train->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("checkpoint", checkpoint)->required();
  eval->add_option("--task", task, "copy or char_lm")->check(CLI::IsMember({"copy", "char_lm"}));

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--component", component, "Component name or all");
  gradcheck->add_option("--tol", tol, "Relative error tolerance");
  gradcheck->add_option("--seed", seed);

  auto* ablate = app.add_subcommand("ablate", "Run an ablation sweep");
  ablate->add_option("config", config, "JSON run config")->required();
  ablate->add_option("--axis", axis, "shuffle, r or scaling")->required()->check(CLI::IsMember({"shuffle", "r", "scaling"}));
  ablate->add_option("--seed", seed);
  ablate->add_option("--steps", steps);
  ablate->add_option("--out", out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*analyze) return cmd_analyze(config, n, m, format, out);
    if (*train) return cmd_train(config, seed, steps, out);
    if (*eval) return cmd_eval(checkpoint, task);
    if (*gradcheck) return cmd_gradcheck(component, tol, seed);
    if (*ablate) return cmd_ablate(config, axis, seed, steps, out);
  } catch (const std::exception& e) {
    std::cerr << "delight: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
