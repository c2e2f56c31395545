// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "delight/accounting.hpp"
#include "delight/experiment.hpp"

namespace delight {
namespace {

RunConfig small_copy() {
  RunConfig cfg;
  cfg.model.vocab = 12;
  cfg.model.model_dim = 32;
  cfg.model.embed_dim = 32;
  cfg.task.train_size = 300;
  cfg.task.valid_size = 37;
  return cfg;
}

TEST(AblationVariantsTest, ScalingMatchesParametersOverEqualBlocks) {
  const auto variants = ablation_variants(small_copy(), "scaling");
  ASSERT_EQ(variants.size(), 2u);
  const auto& blockwise = variants[0].second.model;
  const auto& uniform = variants[1].second.model;
  const BlockPlan bp = blockwise_plan(blockwise.scaling), up = blockwise_plan(uniform.scaling);
  EXPECT_EQ(bp.front().depth, 2u);
  EXPECT_EQ(bp.back().depth, 6u);
  EXPECT_EQ(bp.size(), up.size());
  for (const auto& s : up) EXPECT_EQ(s.depth, 4u);
  const double pb = static_cast<double>(model_cost(blockwise, 1, 1).total_params());
  const double pu = static_cast<double>(model_cost(uniform, 1, 1).total_params());
  EXPECT_LE(std::abs(pu / pb - 1.0), 0.05);
}

TEST(AblationVariantsTest, AxesChangeOnlyTheirKnob) {
  const RunConfig base = small_copy();
  const auto shuffle = ablation_variants(base, "shuffle");
  ASSERT_EQ(shuffle.size(), 2u);
  EXPECT_TRUE(shuffle[0].second.model.shuffle);
  EXPECT_FALSE(shuffle[1].second.model.shuffle);
  const auto r = ablation_variants(base, "r");
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].second.model.ffn_reduction, std::pow(2.0, static_cast<double>(i)));
    EXPECT_EQ(r[i].second.model.model_dim, base.model.model_dim);
  }
  EXPECT_THROW(ablation_variants(base, "heads"), ConfigError);
}

TEST(TaskDataTest, ValidationBatchesCoverHeldOutSetOnce) {
  const RunConfig cfg = small_copy();
  const TaskData data = make_task_data(cfg);
  std::size_t seen = 0;
  for (const Batch& b : validation_batches(data, 8)) seen += b.size;
  EXPECT_EQ(seen, 37u);
}

TEST(TaskDataTest, SampledBatchesFollowTheRng) {
  const TaskData data = make_task_data(small_copy());
  Rng a(3), b(3), c(4);
  EXPECT_EQ(sample_batch(data, 8, a).source, sample_batch(data, 8, b).source);
  Rng a2(3);
  EXPECT_NE(sample_batch(data, 8, a2).source, sample_batch(data, 8, c).source);
}

}  // namespace
}  // namespace delight
