// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "delight/dextra.hpp"
#include "delight/group_linear.hpp"
#include "delight/random.hpp"
#include "delight/tensor.hpp"

namespace delight {

/// Dropout switch and randomness for one forward pass.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
};

/// Positions a query may not look at. Key lengths are per batch entry; an
/// empty list means every key is valid.
struct AttentionMask {
  bool causal = false;
  std::vector<std::size_t> key_lengths;

  bool empty() const { return !causal && key_lengths.empty(); }
};

/// Additive mask (0 or -inf) of shape [Tq, Tk], or [B, Tq, Tk] when key
/// lengths are given. Causal queries are aligned to the last Tq keys.
Tensor attention_bias(const AttentionMask& mask, std::size_t queries, std::size_t keys);

/// softmax(Q K^T / sqrt(d)) V over q[..., Tq, d], k/v[..., Tk, d].
Tensor single_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask = {},
                             double dropout_p = 0.0, const ForwardContext& ctx = {});

struct BlockConfig {
  std::size_t model_dim = 64;  // d_m
  std::size_t attn_dim = 32;   // d_o
  std::size_t depth = 4;       // DExTra N
  double width_mult = 2.0;     // DExTra m_w
  double ffn_reduction = 4.0;  // r; values below 1 expand instead
  std::size_t max_groups = 0;  // 0 selects ceil(d_m / 32)
  bool shuffle = true;
  double dropout = 0.0;

  DextraConfig dextra() const;
  /// d_m / r, floored (with a warning) when the division is not exact.
  std::size_t ffn_inner_dim() const;
  void validate() const;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, std::size_t dim);
  Tensor forward(const Tensor& x) const;
  const Tensor& gain() const { return gain_; }
  const Tensor& bias() const { return bias_; }
  std::size_t parameter_count() const { return 2 * gain_.numel(); }

 private:
  Tensor gain_, bias_;
};

/// Inverted feed-forward sublayer: d_m -> d_m/r -> d_m with GELU in between.
class LightFfn {
 public:
  LightFfn() = default;
  LightFfn(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng);
  Tensor forward(const Tensor& x, const ForwardContext& ctx = {}) const;

  std::size_t inner_dim() const { return reduce_.out_dim(); }
  const GroupLinear& reduce() const { return reduce_; }
  const GroupLinear& expand() const { return expand_; }
  std::size_t parameter_count() const { return reduce_.parameter_count() + expand_.parameter_count(); }
  /// Weight-only count 2 * d_m * inner.
  static std::size_t weight_parameter_count(std::size_t model_dim, std::size_t inner_dim) {
    return 2 * model_dim * inner_dim;
  }

 private:
  GroupLinear reduce_, expand_;
  double dropout_ = 0.0;
};

/// DExTra followed by single-head attention and the d_o -> d_m projection.
class DextraAttention {
 public:
  DextraAttention() = default;
  DextraAttention(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng);
  Tensor forward(const Tensor& x, const AttentionMask& mask, const ForwardContext& ctx = {}) const;

  const Dextra& dextra() const { return dextra_; }
  const GroupLinear& query() const { return query_; }
  const GroupLinear& key() const { return key_; }
  const GroupLinear& value() const { return value_; }
  const GroupLinear& output() const { return output_; }
  std::size_t parameter_count() const;

 private:
  Dextra dextra_;
  GroupLinear query_, key_, value_, output_;
  double dropout_ = 0.0;
};

/// Keys and values projected once from the encoder output.
struct AttentionMemory {
  Tensor keys;
  Tensor values;
  AttentionMask mask;
};

/// Source-target attention: Q from the decoder stream (d_m -> d_o), K and V
/// from the encoder output (d_m -> d_o each), output projected back to d_m.
class SourceTargetAttention {
 public:
  SourceTargetAttention() = default;
  SourceTargetAttention(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng);

  AttentionMemory project(const Tensor& encoder_out, AttentionMask source_mask = {}) const;
  Tensor forward(const Tensor& x, const AttentionMemory& memory, const ForwardContext& ctx = {}) const;

  const GroupLinear& query() const { return query_; }
  const GroupLinear& key() const { return key_; }
  const GroupLinear& value() const { return value_; }
  const GroupLinear& output() const { return output_; }
  std::size_t parameter_count() const;

 private:
  GroupLinear query_, key_, value_, output_;
  double dropout_ = 0.0;
};

/// Pre-norm encoder block:
///   h = x + Attn(DExTra(LN(x)));  out = h + FFN(LN(h)).
class EncoderBlock {
 public:
  EncoderBlock() = default;
  EncoderBlock(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng);
  Tensor forward(const Tensor& x, const AttentionMask& mask = {}, const ForwardContext& ctx = {}) const;

  const BlockConfig& config() const { return cfg_; }
  const DextraAttention& attention() const { return attention_; }
  const LightFfn& ffn() const { return ffn_; }
  const LayerNorm& attention_norm() const { return attention_norm_; }
  const LayerNorm& ffn_norm() const { return ffn_norm_; }
  std::size_t parameter_count() const;

 private:
  BlockConfig cfg_;
  LayerNorm attention_norm_, ffn_norm_;
  DextraAttention attention_;
  LightFfn ffn_;
};

/// Decoder block: causal self-attention, then source-target attention, then
/// the light FFN, each pre-normed with a residual connection.
class DecoderBlock {
 public:
  DecoderBlock() = default;
  DecoderBlock(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& x, const Tensor& encoder_out, const AttentionMask& self_mask = {.causal = true},
                 const AttentionMask& source_mask = {}, const ForwardContext& ctx = {}) const;
  Tensor forward(const Tensor& x, const AttentionMemory& memory, const AttentionMask& self_mask = {.causal = true},
                 const ForwardContext& ctx = {}) const;

  const BlockConfig& config() const { return cfg_; }
  const DextraAttention& self_attention() const { return self_attention_; }
  const SourceTargetAttention& source_attention() const { return source_attention_; }
  const LightFfn& ffn() const { return ffn_; }
  const LayerNorm& self_norm() const { return self_norm_; }
  const LayerNorm& source_norm() const { return source_norm_; }
  const LayerNorm& ffn_norm() const { return ffn_norm_; }
  std::size_t parameter_count() const;

 private:
  BlockConfig cfg_;
  LayerNorm self_norm_, source_norm_, ffn_norm_;
  DextraAttention self_attention_;
  SourceTargetAttention source_attention_;
  LightFfn ffn_;
};

}  // namespace delight
