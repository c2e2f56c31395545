// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delight/ops.hpp"

namespace delight {

double lr_schedule(std::size_t step, std::size_t warmup, double peak_lr) {
  if (step == 0) throw std::invalid_argument("learning-rate steps are 1-based");
  if (warmup == 0) return peak_lr / std::sqrt(static_cast<double>(step));
  const double s = static_cast<double>(step), w = static_cast<double>(warmup);
  return peak_lr * std::min(s / w, std::sqrt(w / s));
}

Adam::Adam(const ParameterStore& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& e : params.entries()) {
    m_.emplace_back(e.value.numel(), 0.0);
    v_.emplace_back(e.value.numel(), 0.0);
  }
}

void Adam::step(ParameterStore& params, double lr) {
  if (params.size() != m_.size()) throw std::logic_error("optimizer state does not match the parameter store");
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(cfg_.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params.entries()[i].value;
    if (!p.has_grad()) continue;
    auto values = p.mutable_data();
    const auto grad = p.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * grad[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * grad[j] * grad[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

StepResult train_step(DelightModel& model, TrainState& state, const Batch& batch, const TrainConfig& cfg) {
  StepResult result;
  result.tokens = batch.target_tokens();
  result.lr = lr_schedule(state.step + 1, cfg.warmup, cfg.peak_lr);

  model.parameters().zero_grad();
  Tape tape;
  {
    TapeScope scope(tape);
    const ForwardContext ctx{.training = true, .rng = &state.rng};
    const Tensor loss = model.loss(batch, cfg.label_smoothing, ctx);
    result.loss = loss.item();
    if (!std::isfinite(result.loss)) {
      throw NonFiniteLossError("non-finite loss " + std::to_string(result.loss) + " at step " +
                               std::to_string(state.step + 1) + " (lr " + std::to_string(result.lr) + ")");
    }
    tape.backward(loss);
  }
  state.optimizer.step(model.parameters(), result.lr);
  ++state.step;
  return result;
}

double evaluate_loss(const DelightModel& model, std::span<const Batch> batches) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& b : batches) {
    const std::size_t n = b.target_tokens();
    total += model.loss(b, 0.0).item() * static_cast<double>(n);
    tokens += n;
  }
  return tokens ? total / static_cast<double>(tokens) : 0.0;
}

double copy_token_accuracy(const DelightModel& model, std::span<const Seq2SeqExample> examples) {
  std::size_t correct = 0, total = 0;
  for (const auto& ex : examples) {
    const auto decoded = model.greedy_decode(ex.source, ex.target.size() + 2);
    for (std::size_t i = 0; i < ex.target.size(); ++i) {
      correct += i < decoded.tokens.size() && decoded.tokens[i] == ex.target[i];
    }
    total += ex.target.size();
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

}  // namespace delight
