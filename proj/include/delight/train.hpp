// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "delight/data.hpp"
#include "delight/model.hpp"
#include "delight/random.hpp"

namespace delight {

/// Linear warmup to peak_lr, then inverse square-root decay:
/// peak_lr * min(step / warmup, sqrt(warmup / step)).
double lr_schedule(std::size_t step, std::size_t warmup, double peak_lr);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

/// Adam with bias correction. Moment buffers mirror the parameter store.
class Adam {
 public:
  Adam() = default;
  Adam(const ParameterStore& params, AdamConfig cfg = {});

  void step(ParameterStore& params, double lr);
  std::size_t steps() const { return steps_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t steps_ = 0;
};

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 32;
  std::size_t warmup = 400;
  double peak_lr = 2e-3;
  double label_smoothing = 0.1;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // 0 disables periodic evaluation
  bool log_throughput = false;
};

struct TrainState {
  Adam optimizer;
  std::size_t step = 0;
  Rng rng;

  TrainState(const ParameterStore& params, std::uint64_t seed) : optimizer(params), rng(seed) {}
};

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepResult {
  double loss = 0.0;
  double lr = 0.0;
  std::size_t tokens = 0;
};

/// Forward, smoothed cross entropy, backward and one Adam update.
StepResult train_step(DelightModel& model, TrainState& state, const Batch& batch, const TrainConfig& cfg);

/// Token-weighted mean cross entropy (no smoothing) over `batches`.
double evaluate_loss(const DelightModel& model, std::span<const Batch> batches);

/// Greedy-decode token accuracy: per target position, decoded == target;
/// missing positions count as wrong.
double copy_token_accuracy(const DelightModel& model, std::span<const Seq2SeqExample> examples);

}  // namespace delight
