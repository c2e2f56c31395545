// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "delight/accounting.hpp"
#include "delight/data.hpp"
#include "delight/model.hpp"
#include "delight/ops.hpp"

namespace delight {
namespace {

ModelConfig toy(TaskKind task) {
  ModelConfig cfg;
  cfg.vocab = 16;
  cfg.embed_dim = 32;
  cfg.model_dim = 32;
  cfg.scaling = {.min_depth = 2, .max_depth = 4, .width_mult = 2.0, .blocks = 4};
  cfg.task = task;
  cfg.max_positions = 64;
  return cfg;
}

std::vector<double> snapshot(const ParameterStore& store) {
  std::vector<double> out;
  for (const auto& e : store.entries()) out.insert(out.end(), e.value.data().begin(), e.value.data().end());
  return out;
}

TEST(ModelTest, ToyConfigBuildsWithAccountedParameters) {
  for (TaskKind task : {TaskKind::seq2seq, TaskKind::lm}) {
    const ModelConfig cfg = toy(task);
    DelightModel model(cfg);
    EXPECT_EQ(model.plan().size(), 4u);
    EXPECT_EQ(model_cost(cfg, 10, 10).total_params(), model.parameters().numel());
  }
}

TEST(ModelTest, EmbeddingProjectionOnlyWhenNarrower) {
  ModelConfig cfg = toy(TaskKind::lm);
  DelightModel same(cfg);
  EXPECT_EQ(same.parameters().find("decoder.embed.proj.weight"), nullptr);
  cfg.embed_dim = 16;
  DelightModel narrow(cfg);
  EXPECT_NE(narrow.parameters().find("decoder.embed.proj.weight"), nullptr);
  cfg.embed_dim = 64;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ModelTest, InitializationIsSeeded) {
  const ModelConfig cfg = toy(TaskKind::seq2seq);
  DelightModel a(cfg), b(cfg);
  EXPECT_EQ(snapshot(a.parameters()), snapshot(b.parameters()));
  ModelConfig other = cfg;
  other.seed = 1;
  DelightModel c(other);
  EXPECT_NE(snapshot(a.parameters()), snapshot(c.parameters()));
}

TEST(ModelTest, SinusoidalPositions) {
  const Tensor pe = sinusoidal_positions(10, 8);
  ASSERT_EQ(pe.shape(), (Shape{10, 8}));
  for (std::size_t pos = 0; pos < 10; ++pos) {
    for (std::size_t i = 0; i < 4; ++i) {
      const double angle = static_cast<double>(pos) / std::pow(10000.0, 2.0 * static_cast<double>(i) / 8.0);
      EXPECT_NEAR(pe[pos * 8 + 2 * i], std::sin(angle), 1e-15);
      EXPECT_NEAR(pe[pos * 8 + 2 * i + 1], std::cos(angle), 1e-15);
    }
  }
}

TEST(ModelTest, LmLossAtPositionIgnoresLaterTokens) {
  const ModelConfig cfg = toy(TaskKind::lm);
  DelightModel model(cfg);
  Batch b;
  b.size = 1;
  b.target_len = 8;
  b.target_in = {3, 4, 5, 6, 7, 8, 9, 10};
  b.target_out = {4, 5, 6, 7, 8, 9, 10, 11};
  const Tensor before = model.logits(b);
  const std::size_t t = 3;
  for (std::size_t j = t + 1; j < 8; ++j) b.target_in[j] = 15;
  const Tensor after = model.logits(b);
  for (std::size_t i = 0; i < (t + 1) * cfg.vocab; ++i) EXPECT_EQ(before[i], after[i]);

  auto loss_at = [&](const Batch& batch, std::size_t pos) {
    Batch only = batch;
    for (std::size_t j = 0; j < only.target_out.size(); ++j) {
      if (j != pos) only.target_out[j] = kPad;
    }
    return model.loss(only, 0.1).item();
  };
  Batch original = b;
  original.target_in = {3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(loss_at(original, t), loss_at(b, t));
}

TEST(ModelTest, UntrainedLmIsNearUniform) {
  const ModelConfig cfg = toy(TaskKind::lm);
  DelightModel model(cfg);
  Batch b;
  b.size = 2;
  b.target_len = 8;
  for (int i = 0; i < 16; ++i) {
    b.target_in.push_back(3 + i % 13);
    b.target_out.push_back(3 + (i + 1) % 13);
  }
  const double ppl = std::exp(model.loss(b, 0.0).item());
  EXPECT_GT(ppl, 0.5 * static_cast<double>(cfg.vocab));
  EXPECT_LT(ppl, 2.0 * static_cast<double>(cfg.vocab));
}

TEST(ModelTest, PaddingDoesNotChangeValidPositions) {
  const ModelConfig cfg = toy(TaskKind::seq2seq);
  DelightModel model(cfg);
  const std::vector<Seq2SeqExample> one{{{3, 4, 5}, {3, 4, 5}}};
  const std::vector<Seq2SeqExample> two{{{3, 4, 5}, {3, 4, 5}}, {{6, 7, 8, 9, 10, 11}, {6, 7, 8, 9, 10, 11}}};
  const Tensor a = model.logits(make_seq2seq_batch(one));
  const Tensor b = model.logits(make_seq2seq_batch(two));
  const std::size_t t_a = a.dim(1), t_b = b.dim(1), v = cfg.vocab;
  for (std::size_t t = 0; t < t_a; ++t) {
    for (std::size_t k = 0; k < v; ++k) EXPECT_NEAR(a[t * v + k], b[t * v + k], 1e-12);
  }
  EXPECT_GT(t_b, t_a);
}

TEST(ModelTest, GreedyDecodeRespectsLengthLimit) {
  const ModelConfig cfg = toy(TaskKind::seq2seq);
  DelightModel model(cfg);
  const std::vector<int> src{3, 4, 5, 6};
  const DecodeResult r = model.greedy_decode(src, 5, false);
  EXPECT_EQ(r.tokens.size(), 5u);
  EXPECT_TRUE(r.truncated);
  const DecodeResult again = model.greedy_decode(src, 5, false);
  EXPECT_EQ(r.tokens, again.tokens);
}

TEST(ModelTest, LmRejectsDecoding) {
  DelightModel model(toy(TaskKind::lm));
  const std::vector<int> src{3};
  EXPECT_THROW(model.greedy_decode(src, 2), std::logic_error);
}

}  // namespace
}  // namespace delight
