// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace delight {

/// Network-wide depth/width settings. `min_depth > max_depth` is allowed and
/// yields blocks that shrink toward the output.
struct ScalingConfig {
  std::size_t min_depth = 2;  // N_min
  std::size_t max_depth = 4;  // N_max
  double width_mult = 2.0;    // m_w
  std::size_t blocks = 0;     // B; 0 selects N_max

  std::size_t resolved_blocks() const { return blocks == 0 ? max_depth : blocks; }
};

struct BlockScale {
  std::size_t depth;  // N^b
  double width_mult;  // m_w^b
};

using BlockPlan = std::vector<BlockScale>;

/// Linear interpolation of DExTra depth and width across blocks:
///   N^b   = N_min + (N_max - N_min) b / (B - 1)          (rounded half up)
///   m_w^b = m_w + (N_max - N_min) b / (N_min (B - 1))
/// A single block takes (N_min, m_w).
BlockPlan blockwise_plan(const ScalingConfig& cfg);

/// Sum over blocks of N^b + 4; decoder stacks add 2 per block for the
/// source-target projections and their output projection.
std::size_t network_depth(const BlockPlan& plan, bool decoder = false);

/// Depth of a standard transformer with the same block count: 4B.
inline std::size_t baseline_transformer_depth(std::size_t blocks) { return 4 * blocks; }

}  // namespace delight
