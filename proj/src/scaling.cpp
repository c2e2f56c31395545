// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/scaling.hpp"

#include <cstdint>
#include <stdexcept>

#include "delight/dextra.hpp"

namespace delight {

BlockPlan blockwise_plan(const ScalingConfig& cfg) {
  const std::size_t blocks = cfg.resolved_blocks();
  if (blocks == 0) throw ConfigError("block count must be at least 1");
  if (cfg.min_depth == 0 || cfg.max_depth == 0) throw ConfigError("DExTra depths must be positive");
  if (blocks == 1) return {{cfg.min_depth, cfg.width_mult}};

  const auto n_min = static_cast<std::int64_t>(cfg.min_depth);
  const auto delta = static_cast<std::int64_t>(cfg.max_depth) - n_min;
  const auto span = static_cast<std::int64_t>(blocks - 1);
  BlockPlan plan;
  plan.reserve(blocks);
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    // floor(N_min + delta*b/span + 1/2) in integers; the numerator stays positive.
    const std::int64_t numer = 2 * (n_min * span + delta * b) + span;
    const auto depth = static_cast<std::size_t>(numer / (2 * span));
    const double width = cfg.width_mult + static_cast<double>(delta * b) / static_cast<double>(n_min * span);
    plan.push_back({depth, width});
  }
  return plan;
}

std::size_t network_depth(const BlockPlan& plan, bool decoder) {
  if (plan.empty()) throw std::invalid_argument("empty block plan");
  std::size_t depth = 0;
  for (const auto& b : plan) depth += b.depth + 4 + (decoder ? 2 : 0);
  return depth;
}

}  // namespace delight
