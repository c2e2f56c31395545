// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "delight/block.hpp"
#include "delight/model.hpp"

// Analytical parameter and multiply-accumulate counts. A fused multiply-add
// counts as one MAC; softmax, normalization, activations and bias adds are
// not counted.
namespace delight {

std::uint64_t glt_params(std::size_t d_in, std::size_t d_out, std::size_t groups, bool use_bias = true);
/// d_in * d_out / g per token.
std::uint64_t glt_macs(std::size_t d_in, std::size_t d_out, std::size_t groups);
/// Both attention matmuls over n tokens: 2 d_o n^2.
std::uint64_t self_attention_macs(std::size_t n, std::size_t attn_dim);
/// Incremental decoding of m target tokens against n source tokens, where
/// step k attends with k queries: sum_k 2 k n d_o.
std::uint64_t source_target_attention_macs(std::size_t n, std::size_t m, std::size_t attn_dim);
/// Weights of the light FFN, 2 d_m (d_m / r).
std::uint64_t light_ffn_weight_params(std::size_t model_dim, std::size_t inner_dim);
/// Weights of a standard FFN with d_f = 4 d_m, 8 d_m^2.
std::uint64_t baseline_ffn_weight_params(std::size_t model_dim);

struct CostEntry {
  std::string component;
  std::string block;  // "enc0", "dec3", "lm1", or "-" for model-level parts
  std::uint64_t params = 0;
  std::uint64_t macs = 0;

  bool operator==(const CostEntry&) const = default;
};

struct CostReport {
  std::size_t source_tokens = 0;  // n
  std::size_t target_tokens = 0;  // m
  std::vector<CostEntry> entries;

  std::uint64_t total_params() const;
  std::uint64_t total_macs() const;
  /// Entries of one block summed into (params, macs).
  CostEntry block_total(const std::string& block) const;

  /// Columns: component,block,params,macs, then a closing "total" row.
  std::string to_csv() const;
  std::string to_json() const;
  static CostReport from_json(const std::string& text);

  bool operator==(const CostReport&) const = default;
};

/// Cost of one encoder-style block over `n` tokens processed in one pass.
std::vector<CostEntry> encoder_block_cost(const BlockConfig& cfg, std::size_t n, const std::string& block);

/// Model-wide report.
///
/// seq2seq: the encoder runs once over n source tokens; the decoder is
/// charged for m greedy steps where step k re-runs over its k-token prefix,
/// source keys/values are projected once per block, and only the newest
/// position is classified.
/// lm: one causal pass over n tokens, every position classified; m is unused.
CostReport model_cost(const ModelConfig& cfg, std::size_t n, std::size_t m);

}  // namespace delight
