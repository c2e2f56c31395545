// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "delight/config.hpp"
#include "delight/data.hpp"
#include "delight/model.hpp"

namespace delight {

struct TaskData {
  std::vector<Seq2SeqExample> train;  // copy only
  std::vector<Seq2SeqExample> valid;  // copy only, disjoint from train
  std::optional<CharLmDataset> lm;    // char_lm only
};

TaskData make_task_data(const RunConfig& cfg);
/// Draws batch_size training items uniformly with replacement.
Batch sample_batch(const TaskData& data, std::size_t batch_size, Rng& rng);
std::vector<Batch> validation_batches(const TaskData& data, std::size_t batch_size);

struct EvalResult {
  double loss = 0.0;
  double perplexity = 0.0;
  std::optional<double> token_accuracy;      // copy
  std::optional<double> unigram_perplexity;  // char_lm
};

EvalResult evaluate(const DelightModel& model, const TaskData& data, const RunConfig& cfg, bool decode = true);

struct RunResult {
  std::size_t steps = 0;
  std::vector<double> losses;
  EvalResult eval;
};

/// Trains for cfg.train.steps steps. When `metrics` is set, writes one JSON
/// object per step: step, lr, loss, tokens (plus tokens_per_sec when
/// train.log_throughput is on, and valid_loss every train.eval_every steps).
RunResult run_training(const RunConfig& cfg, DelightModel& model, const TaskData& data, std::ostream* metrics,
                       bool decode_at_end = true);

struct AblationRow {
  std::string axis;
  std::string variant;
  std::size_t params = 0;
  std::size_t ffn_params = 0;
  std::uint64_t macs = 0;
  double valid_loss = 0.0;
  double valid_ppl = 0.0;
  std::optional<double> token_accuracy;
};

/// Config variants for one axis: shuffle (on, off), r (1, 2, 4, 8) or scaling
/// (block-wise N=2..6 and uniform N=4 over the same number of blocks, with m_w
/// matched to within 5% params).
std::vector<std::pair<std::string, RunConfig>> ablation_variants(const RunConfig& base, const std::string& axis);
AblationRow run_ablation_variant(const std::string& axis, const std::string& variant, const RunConfig& cfg);
std::vector<AblationRow> run_ablation(const RunConfig& base, const std::string& axis);
/// Columns: axis,variant,params,ffn_params,macs,valid_loss,valid_ppl,token_accuracy
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace delight
