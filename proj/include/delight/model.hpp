// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delight/block.hpp"
#include "delight/group_linear.hpp"
#include "delight/scaling.hpp"
#include "delight/tensor.hpp"

namespace delight {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kFirstSymbol = 3;

enum class TaskKind { seq2seq, lm };

const char* task_kind_name(TaskKind kind);

struct ModelConfig {
  std::size_t vocab = 16;
  std::size_t embed_dim = 64;
  std::size_t model_dim = 64;
  ScalingConfig scaling{};
  double ffn_reduction = 4.0;
  double attn_ratio = 0.5;  // d_o = d_m * attn_ratio
  std::size_t max_groups = 0;
  bool shuffle = true;
  TaskKind task = TaskKind::seq2seq;
  std::size_t max_positions = 256;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  std::size_t attn_dim() const;
  BlockConfig block_config(const BlockScale& scale) const;
  void validate() const;
};

/// PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(same).
Tensor sinusoidal_positions(std::size_t max_len, std::size_t dim);

/// Padded token batch. Sources are only used by seq2seq models.
struct Batch {
  std::size_t size = 0;
  std::size_t source_len = 0;
  std::size_t target_len = 0;
  std::vector<int> source;                 // [size, source_len]
  std::vector<std::size_t> source_lengths;  // valid prefix per row
  std::vector<int> target_in;              // [size, target_len]
  std::vector<int> target_out;             // [size, target_len], kPad is ignored by the loss

  std::size_t target_tokens() const;
};

struct DecodeResult {
  std::vector<int> tokens;  // EOS not included
  bool truncated = false;   // max_len reached without EOS
};

/// Token lookup (+ optional embed_dim -> d_m projection), sqrt(d_m) scaling
/// and sinusoidal positions.
class TokenEmbedding {
 public:
  TokenEmbedding() = default;
  TokenEmbedding(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  Tensor forward(std::span<const int> ids, std::size_t batch, std::size_t length) const;

  const Tensor& table() const { return table_; }
  const std::optional<GroupLinear>& projection() const { return projection_; }

 private:
  Tensor table_;
  std::optional<GroupLinear> projection_;
  Tensor positions_;
  std::size_t model_dim_ = 0;
};

/// Encoder-decoder (seq2seq) or decoder-only (lm) network of DeLighT blocks
/// scaled block-wise, with a final layer norm per stack and a dense
/// classifier. Construction is deterministic in `cfg.seed`.
class DelightModel {
 public:
  explicit DelightModel(const ModelConfig& cfg);
  DelightModel(const DelightModel&) = delete;
  DelightModel& operator=(const DelightModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const BlockPlan& plan() const { return plan_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }

  /// Encoder output [B, S, d_m] after the final norm (seq2seq only).
  Tensor encode(const Batch& batch, const ForwardContext& ctx = {}) const;
  /// Logits [B, T, V] for teacher-forced targets (or LM inputs).
  Tensor logits(const Batch& batch, const ForwardContext& ctx = {}) const;
  /// Mean smoothed cross entropy over non-pad targets.
  Tensor loss(const Batch& batch, double smoothing, const ForwardContext& ctx = {}) const;

  /// Argmax decoding from BOS; each step re-runs the decoder over the whole
  /// prefix and classifies only the newest position. Ties go to the lowest id.
  DecodeResult greedy_decode(std::span<const int> source, std::size_t max_len, bool stop_at_eos = true) const;

  const TokenEmbedding& source_embedding() const { return source_embed_; }
  const TokenEmbedding& target_embedding() const { return target_embed_; }
  const std::vector<EncoderBlock>& encoder_blocks() const { return encoder_; }
  const std::vector<DecoderBlock>& decoder_blocks() const { return decoder_; }
  /// Blocks of the decoder-only LM stack.
  const std::vector<EncoderBlock>& lm_blocks() const { return lm_blocks_; }
  const LayerNorm& encoder_norm() const { return encoder_norm_; }
  const LayerNorm& decoder_norm() const { return decoder_norm_; }
  const GroupLinear& classifier() const { return classifier_; }

 private:
  Tensor decoder_hidden(std::span<const int> tokens, std::size_t batch, std::size_t length,
                        const std::vector<AttentionMemory>& memories, const ForwardContext& ctx) const;

  ModelConfig cfg_;
  BlockPlan plan_;
  ParameterStore store_;
  TokenEmbedding source_embed_, target_embed_;
  std::vector<EncoderBlock> encoder_;
  std::vector<DecoderBlock> decoder_;
  std::vector<EncoderBlock> lm_blocks_;
  LayerNorm encoder_norm_, decoder_norm_;
  GroupLinear classifier_;
};

}  // namespace delight
