// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/experiment.hpp"

#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "delight/accounting.hpp"
#include "delight/dextra.hpp"

namespace delight {

namespace {

constexpr std::uint64_t kDataStream = 0x9e3779b97f4a7c15ull;

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << v;
  return out.str();
}

}  // namespace

TaskData make_task_data(const RunConfig& cfg) {
  TaskData data;
  const auto& t = cfg.task;
  const std::uint64_t seed = cfg.train.seed;
  if (t.kind == "copy") {
    data.train = make_copy_dataset(cfg.model.vocab, t.min_len, t.max_len, t.train_size, seed);
    data.valid = make_heldout_copy_dataset(cfg.model.vocab, t.min_len, t.max_len, t.valid_size, seed + 1, data.train);
  } else {
    data.lm = make_char_lm_dataset(bundled_text(), t.context, seed, t.valid_fraction);
  }
  return data;
}

Batch sample_batch(const TaskData& data, std::size_t batch_size, Rng& rng) {
  if (data.lm) {
    const auto& windows = data.lm->train_windows;
    std::vector<std::vector<int>> picked;
    picked.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) picked.push_back(windows[uniform_int(rng, 0, windows.size())]);
    return make_lm_batch(picked);
  }
  std::vector<Seq2SeqExample> picked;
  picked.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) picked.push_back(data.train[uniform_int(rng, 0, data.train.size())]);
  return make_seq2seq_batch(picked);
}

std::vector<Batch> validation_batches(const TaskData& data, std::size_t batch_size) {
  std::vector<Batch> batches;
  if (data.lm) {
    const auto& w = data.lm->valid_windows;
    for (std::size_t i = 0; i < w.size(); i += batch_size) {
      batches.push_back(make_lm_batch(std::span(w).subspan(i, std::min(batch_size, w.size() - i))));
    }
  } else {
    const auto& v = data.valid;
    for (std::size_t i = 0; i < v.size(); i += batch_size) {
      batches.push_back(make_seq2seq_batch(std::span(v).subspan(i, std::min(batch_size, v.size() - i))));
    }
  }
  return batches;
}

EvalResult evaluate(const DelightModel& model, const TaskData& data, const RunConfig& cfg, bool decode) {
  EvalResult r;
  const auto batches = validation_batches(data, cfg.train.batch_size);
  r.loss = evaluate_loss(model, batches);
  r.perplexity = std::exp(r.loss);
  if (data.lm) {
    r.unigram_perplexity = unigram_perplexity(*data.lm);
  } else if (decode) {
    r.token_accuracy = copy_token_accuracy(model, data.valid);
  }
  return r;
}

RunResult run_training(const RunConfig& cfg, DelightModel& model, const TaskData& data, std::ostream* metrics,
                       bool decode_at_end) {
  RunResult result;
  TrainState state(model.parameters(), cfg.train.seed);
  Rng data_rng(cfg.train.seed ^ kDataStream);
  std::vector<Batch> valid;
  if (cfg.train.eval_every) valid = validation_batches(data, cfg.train.batch_size);

  for (std::size_t s = 0; s < cfg.train.steps; ++s) {
    const Batch batch = sample_batch(data, cfg.train.batch_size, data_rng);
    const auto start = std::chrono::steady_clock::now();
    const StepResult step = train_step(model, state, batch, cfg.train);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.losses.push_back(step.loss);
    if (metrics) {
      nlohmann::ordered_json line{{"step", state.step}, {"lr", step.lr}, {"loss", step.loss}, {"tokens", step.tokens}};
      if (cfg.train.log_throughput) line["tokens_per_sec"] = static_cast<double>(step.tokens) / elapsed.count();
      if (cfg.train.eval_every && state.step % cfg.train.eval_every == 0) {
        line["valid_loss"] = evaluate_loss(model, valid);
      }
      *metrics << line.dump() << '\n';
    }
  }
  result.steps = state.step;
  result.eval = evaluate(model, data, cfg, decode_at_end);
  return result;
}

std::vector<std::pair<std::string, RunConfig>> ablation_variants(const RunConfig& base, const std::string& axis) {
  std::vector<std::pair<std::string, RunConfig>> out;
  if (axis == "shuffle") {
    for (bool on : {true, false}) {
      RunConfig c = base;
      c.model.shuffle = on;
      out.emplace_back(on ? "shuffle_on" : "shuffle_off", c);
    }
  } else if (axis == "r") {
    for (double r : {1.0, 2.0, 4.0, 8.0}) {
      RunConfig c = base;
      c.model.ffn_reduction = r;
      out.emplace_back("r=" + std::to_string(static_cast<int>(r)), c);
    }
  } else if (axis == "scaling") {
    RunConfig blockwise = base;
    blockwise.model.scaling = {.min_depth = 2, .max_depth = 6, .width_mult = base.model.scaling.width_mult, .blocks = 0};
    const double target = static_cast<double>(model_cost(blockwise.model, 1, 1).total_params());

    RunConfig uniform = base;
    uniform.model.scaling = {
        .min_depth = 4, .max_depth = 4, .width_mult = 1.0, .blocks = blockwise_plan(blockwise.model.scaling).size()};
    double best_gap = INFINITY;
    double best_mw = 0.0;
    for (int i = 0; i <= 300; ++i) {
      uniform.model.scaling.width_mult = 1.0 + 0.025 * i;
      try {
        uniform.model.validate();
        const double p = static_cast<double>(model_cost(uniform.model, 1, 1).total_params());
        const double gap = std::abs(p - target) / target;
        if (gap < best_gap) {
          best_gap = gap;
          best_mw = uniform.model.scaling.width_mult;
        }
      } catch (const ConfigError&) {
      }
    }
    if (best_gap > 0.05) throw ConfigError("scaling ablation: no uniform width multiplier within 5% of the block-wise budget");
    uniform.model.scaling.width_mult = best_mw;
    out.emplace_back("blockwise_n2-6", blockwise);
    out.emplace_back("uniform_n4_mw" + format_double(best_mw).substr(0, 5), uniform);
  } else {
    throw ConfigError("--axis: expected shuffle, r or scaling");
  }
  return out;
}

AblationRow run_ablation_variant(const std::string& axis, const std::string& variant, const RunConfig& cfg) {
  AblationRow row{axis, variant};
  const CostReport cost = model_cost(cfg.model, cfg.report.source_tokens, cfg.report.target_tokens);
  row.params = cost.total_params();
  row.macs = cost.total_macs();
  for (const auto& e : cost.entries) {
    if (e.component == "ffn") row.ffn_params += e.params;
  }
  DelightModel model(cfg.model);
  const TaskData data = make_task_data(cfg);
  const RunResult run = run_training(cfg, model, data, nullptr);
  row.valid_loss = run.eval.loss;
  row.valid_ppl = run.eval.perplexity;
  row.token_accuracy = run.eval.token_accuracy;
  return row;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const std::string& axis) {
  std::vector<AblationRow> rows;
  for (const auto& [name, cfg] : ablation_variants(base, axis)) rows.push_back(run_ablation_variant(axis, name, cfg));
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "axis,variant,params,ffn_params,macs,valid_loss,valid_ppl,token_accuracy\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << r.variant << ',' << r.params << ',' << r.ffn_params << ',' << r.macs << ','
        << format_double(r.valid_loss) << ',' << format_double(r.valid_ppl) << ','
        << (r.token_accuracy ? format_double(*r.token_accuracy) : "") << '\n';
  }
  return out.str();
}

}  // namespace delight
