// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/block.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "delight/ops.hpp"

namespace delight {

Tensor attention_bias(const AttentionMask& mask, std::size_t queries, std::size_t keys) {
  constexpr double kBlocked = -std::numeric_limits<double>::infinity();
  const std::size_t batch = mask.key_lengths.empty() ? 1 : mask.key_lengths.size();
  std::vector<double> values(batch * queries * keys, 0.0);
  const std::size_t shift = keys >= queries ? keys - queries : 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t valid = mask.key_lengths.empty() ? keys : mask.key_lengths[b];
    for (std::size_t i = 0; i < queries; ++i) {
      for (std::size_t j = 0; j < keys; ++j) {
        const bool future = mask.causal && j > i + shift;
        if (future || j >= valid) values[(b * queries + i) * keys + j] = kBlocked;
      }
    }
  }
  if (mask.key_lengths.empty()) return Tensor({queries, keys}, std::move(values));
  return Tensor({batch, queries, keys}, std::move(values));
}

Tensor single_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask,
                             double dropout_p, const ForwardContext& ctx) {
  if (q.dim(-1) != k.dim(-1) || k.shape() != v.shape()) {
    throw DimensionError("attention shape mismatch: q " + shape_string(q.shape()) + ", k " + shape_string(k.shape()) +
                         ", v " + shape_string(v.shape()));
  }
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(q.dim(-1)));
  Tensor scores = scale(matmul(q, transpose_last(k)), inv_scale);
  if (!mask.empty()) {
    if (!mask.key_lengths.empty() && (q.rank() != 3 || mask.key_lengths.size() != q.dim(0))) {
      throw DimensionError("key lengths given for " + std::to_string(mask.key_lengths.size()) +
                           " sequences but queries have shape " + shape_string(q.shape()));
    }
    scores = add(scores, attention_bias(mask, q.dim(-2), k.dim(-2)));
  }
  Tensor weights = softmax(scores, -1);
  if (dropout_p > 0.0 && ctx.training) weights = dropout(weights, dropout_p, true, *ctx.rng);
  return matmul(weights, v);
}

// ---- config ----

DextraConfig BlockConfig::dextra() const {
  DextraConfig d;
  d.input_dim = model_dim;
  d.output_dim = attn_dim;
  d.depth = depth;
  d.width_mult = width_mult;
  d.max_groups = max_groups;
  d.shuffle = shuffle;
  return d;
}

std::size_t BlockConfig::ffn_inner_dim() const {
  if (ffn_reduction <= 0.0) throw ConfigError("FFN reduction factor must be positive");
  const double exact = static_cast<double>(model_dim) / ffn_reduction;
  const double rounded = std::round(exact);
  std::size_t inner;
  if (std::abs(exact - rounded) < 1e-9) {
    inner = static_cast<std::size_t>(rounded);
  } else {
    inner = static_cast<std::size_t>(std::floor(exact));
    std::cerr << "warning: d_m / r = " << exact << " is not integral; using " << inner << "\n";
  }
  if (inner < 1) throw ConfigError("FFN inner width d_m / r is below 1");
  return inner;
}

void BlockConfig::validate() const {
  if (model_dim == 0 || attn_dim == 0) throw ConfigError("block dimensions must be positive");
  if (attn_dim >= model_dim) {
    throw ConfigError("attention dim d_o=" + std::to_string(attn_dim) + " must be below d_m=" +
                      std::to_string(model_dim));
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  (void)ffn_inner_dim();
}

// ---- layers ----

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, std::size_t dim)
    : gain_(store.add(name + ".gain", {dim}, std::vector<double>(dim, 1.0))),
      bias_(store.add(name + ".bias", {dim}, std::vector<double>(dim, 0.0))) {}

Tensor LayerNorm::forward(const Tensor& x) const { return layer_norm(x, gain_, bias_); }

LightFfn::LightFfn(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng)
    : reduce_(store, name + ".reduce", cfg.model_dim, cfg.ffn_inner_dim(), 1, rng),
      expand_(store, name + ".expand", cfg.ffn_inner_dim(), cfg.model_dim, 1, rng),
      dropout_(cfg.dropout) {}

Tensor LightFfn::forward(const Tensor& x, const ForwardContext& ctx) const {
  Tensor h = gelu(reduce_.forward(x));
  if (dropout_ > 0.0 && ctx.training) h = dropout(h, dropout_, true, *ctx.rng);
  return expand_.forward(h);
}

DextraAttention::DextraAttention(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng)
    : dextra_(store, name + ".dextra", cfg.dextra(), rng),
      query_(store, name + ".query", cfg.attn_dim, cfg.attn_dim, 1, rng),
      key_(store, name + ".key", cfg.attn_dim, cfg.attn_dim, 1, rng),
      value_(store, name + ".value", cfg.attn_dim, cfg.attn_dim, 1, rng),
      output_(store, name + ".output", cfg.attn_dim, cfg.model_dim, 1, rng),
      dropout_(cfg.dropout) {}

Tensor DextraAttention::forward(const Tensor& x, const AttentionMask& mask, const ForwardContext& ctx) const {
  const Tensor reduced = dextra_.forward(x);
  const Tensor context = single_head_attention(query_.forward(reduced), key_.forward(reduced),
                                               value_.forward(reduced), mask, dropout_, ctx);
  return output_.forward(context);
}

std::size_t DextraAttention::parameter_count() const {
  return dextra_.parameter_count() + query_.parameter_count() + key_.parameter_count() + value_.parameter_count() +
         output_.parameter_count();
}

SourceTargetAttention::SourceTargetAttention(ParameterStore& store, const std::string& name, const BlockConfig& cfg,
                                             Rng& rng)
    : query_(store, name + ".query", cfg.model_dim, cfg.attn_dim, 1, rng),
      key_(store, name + ".key", cfg.model_dim, cfg.attn_dim, 1, rng),
      value_(store, name + ".value", cfg.model_dim, cfg.attn_dim, 1, rng),
      output_(store, name + ".output", cfg.attn_dim, cfg.model_dim, 1, rng),
      dropout_(cfg.dropout) {}

AttentionMemory SourceTargetAttention::project(const Tensor& encoder_out, AttentionMask source_mask) const {
  source_mask.causal = false;
  return {key_.forward(encoder_out), value_.forward(encoder_out), std::move(source_mask)};
}

Tensor SourceTargetAttention::forward(const Tensor& x, const AttentionMemory& memory,
                                      const ForwardContext& ctx) const {
  const Tensor context =
      single_head_attention(query_.forward(x), memory.keys, memory.values, memory.mask, dropout_, ctx);
  return output_.forward(context);
}

std::size_t SourceTargetAttention::parameter_count() const {
  return query_.parameter_count() + key_.parameter_count() + value_.parameter_count() + output_.parameter_count();
}

// ---- blocks ----

EncoderBlock::EncoderBlock(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng)
    : cfg_((cfg.validate(), cfg)),
      attention_norm_(store, name + ".attn_norm", cfg.model_dim),
      ffn_norm_(store, name + ".ffn_norm", cfg.model_dim),
      attention_(store, name + ".attn", cfg, rng),
      ffn_(store, name + ".ffn", cfg, rng) {}

Tensor EncoderBlock::forward(const Tensor& x, const AttentionMask& mask, const ForwardContext& ctx) const {
  if (x.dim(-1) != cfg_.model_dim) {
    throw DimensionError("block expects model dim " + std::to_string(cfg_.model_dim) + ", got " +
                         shape_string(x.shape()));
  }
  const Tensor h = add(x, attention_.forward(attention_norm_.forward(x), mask, ctx));
  return add(h, ffn_.forward(ffn_norm_.forward(h), ctx));
}

std::size_t EncoderBlock::parameter_count() const {
  return attention_norm_.parameter_count() + ffn_norm_.parameter_count() + attention_.parameter_count() +
         ffn_.parameter_count();
}

DecoderBlock::DecoderBlock(ParameterStore& store, const std::string& name, const BlockConfig& cfg, Rng& rng)
    : cfg_((cfg.validate(), cfg)),
      self_norm_(store, name + ".self_norm", cfg.model_dim),
      source_norm_(store, name + ".source_norm", cfg.model_dim),
      ffn_norm_(store, name + ".ffn_norm", cfg.model_dim),
      self_attention_(store, name + ".self_attn", cfg, rng),
      source_attention_(store, name + ".source_attn", cfg, rng),
      ffn_(store, name + ".ffn", cfg, rng) {}

Tensor DecoderBlock::forward(const Tensor& x, const Tensor& encoder_out, const AttentionMask& self_mask,
                             const AttentionMask& source_mask, const ForwardContext& ctx) const {
  return forward(x, source_attention_.project(encoder_out, source_mask), self_mask, ctx);
}

Tensor DecoderBlock::forward(const Tensor& x, const AttentionMemory& memory, const AttentionMask& self_mask,
                             const ForwardContext& ctx) const {
  if (x.dim(-1) != cfg_.model_dim) {
    throw DimensionError("block expects model dim " + std::to_string(cfg_.model_dim) + ", got " +
                         shape_string(x.shape()));
  }
  Tensor h = add(x, self_attention_.forward(self_norm_.forward(x), self_mask, ctx));
  h = add(h, source_attention_.forward(source_norm_.forward(h), memory, ctx));
  return add(h, ffn_.forward(ffn_norm_.forward(h), ctx));
}

std::size_t DecoderBlock::parameter_count() const {
  return self_norm_.parameter_count() + source_norm_.parameter_count() + ffn_norm_.parameter_count() +
         self_attention_.parameter_count() + source_attention_.parameter_count() + ffn_.parameter_count();
}

}  // namespace delight
