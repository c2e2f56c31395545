// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/model.hpp"

#include <array>
#include <cmath>

#include "delight/ops.hpp"

namespace delight {

const char* task_kind_name(TaskKind kind) { return kind == TaskKind::seq2seq ? "seq2seq" : "lm"; }

std::size_t ModelConfig::attn_dim() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(model_dim) * attn_ratio + 0.5));
}

BlockConfig ModelConfig::block_config(const BlockScale& scale) const {
  BlockConfig b;
  b.model_dim = model_dim;
  b.attn_dim = attn_dim();
  b.depth = scale.depth;
  b.width_mult = scale.width_mult;
  b.ffn_reduction = ffn_reduction;
  b.max_groups = max_groups;
  b.shuffle = shuffle;
  b.dropout = dropout;
  return b;
}

void ModelConfig::validate() const {
  if (vocab < 4) throw ConfigError("vocabulary needs at least 4 entries (pad, bos, eos, one symbol)");
  if (embed_dim == 0 || model_dim == 0) throw ConfigError("embedding and model dims must be positive");
  if (model_dim % 2 != 0) throw ConfigError("model dim must be even for sinusoidal positions");
  if (embed_dim > model_dim) throw ConfigError("embed dim must not exceed model dim");
  if (max_positions == 0) throw ConfigError("max positions must be positive");
  for (const auto& s : blockwise_plan(scaling)) {
    const BlockConfig b = block_config(s);
    b.validate();
    (void)plan_dextra(b.dextra());
  }
}

Tensor sinusoidal_positions(std::size_t max_len, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("sinusoidal positions need an even width, got " + std::to_string(dim));
  std::vector<double> values(max_len * dim);
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
      values[pos * dim + 2 * i] = std::sin(angle);
      values[pos * dim + 2 * i + 1] = std::cos(angle);
    }
  }
  return Tensor({max_len, dim}, std::move(values));
}

std::size_t Batch::target_tokens() const {
  std::size_t n = 0;
  for (int t : target_out) n += t != kPad;
  return n;
}

// ---- embeddings ----

TokenEmbedding::TokenEmbedding(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng)
    : positions_(sinusoidal_positions(cfg.max_positions, cfg.model_dim)), model_dim_(cfg.model_dim) {
  const double bound = std::sqrt(3.0 / static_cast<double>(cfg.embed_dim));
  std::vector<double> values(cfg.vocab * cfg.embed_dim);
  for (auto& v : values) v = uniform(rng, -bound, bound);
  std::fill_n(values.begin() + kPad * cfg.embed_dim, cfg.embed_dim, 0.0);
  table_ = store.add(name + ".table", {cfg.vocab, cfg.embed_dim}, std::move(values));
  if (cfg.embed_dim != cfg.model_dim) {
    projection_.emplace(store, name + ".proj", cfg.embed_dim, cfg.model_dim, 1, rng);
  }
}

Tensor TokenEmbedding::forward(std::span<const int> ids, std::size_t batch, std::size_t length) const {
  if (length > positions_.dim(0)) {
    throw DimensionError("sequence of length " + std::to_string(length) + " exceeds " +
                         std::to_string(positions_.dim(0)) + " positions");
  }
  Tensor x = embedding(table_, ids, {batch, length});
  if (projection_) x = projection_->forward(x);
  x = scale(x, std::sqrt(static_cast<double>(model_dim_)));
  const std::array<std::size_t, 2> rows{length, positions_.dim(0) - length};
  if (rows[1] == 0) return add(x, positions_);
  return add(x, split(positions_, 0, rows)[0]);
}

// ---- model ----

DelightModel::DelightModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  plan_ = blockwise_plan(cfg_.scaling);
  Rng rng(cfg_.seed);
  if (cfg_.task == TaskKind::seq2seq) {
    source_embed_ = TokenEmbedding(store_, "encoder.embed", cfg_, rng);
    for (std::size_t b = 0; b < plan_.size(); ++b) {
      encoder_.emplace_back(store_, "encoder.block" + std::to_string(b), cfg_.block_config(plan_[b]), rng);
    }
    encoder_norm_ = LayerNorm(store_, "encoder.norm", cfg_.model_dim);
    target_embed_ = TokenEmbedding(store_, "decoder.embed", cfg_, rng);
    for (std::size_t b = 0; b < plan_.size(); ++b) {
      decoder_.emplace_back(store_, "decoder.block" + std::to_string(b), cfg_.block_config(plan_[b]), rng);
    }
  } else {
    target_embed_ = TokenEmbedding(store_, "decoder.embed", cfg_, rng);
    for (std::size_t b = 0; b < plan_.size(); ++b) {
      lm_blocks_.emplace_back(store_, "decoder.block" + std::to_string(b), cfg_.block_config(plan_[b]), rng);
    }
  }
  decoder_norm_ = LayerNorm(store_, "decoder.norm", cfg_.model_dim);
  classifier_ = GroupLinear(store_, "classifier", cfg_.model_dim, cfg_.vocab, 1, rng);
}

Tensor DelightModel::encode(const Batch& batch, const ForwardContext& ctx) const {
  if (cfg_.task != TaskKind::seq2seq) throw std::logic_error("encode() on a decoder-only model");
  AttentionMask mask{.causal = false, .key_lengths = batch.source_lengths};
  Tensor x = source_embed_.forward(batch.source, batch.size, batch.source_len);
  for (const auto& block : encoder_) x = block.forward(x, mask, ctx);
  return encoder_norm_.forward(x);
}

Tensor DelightModel::decoder_hidden(std::span<const int> tokens, std::size_t batch, std::size_t length,
                                    const std::vector<AttentionMemory>& memories, const ForwardContext& ctx) const {
  const AttentionMask causal{.causal = true};
  Tensor x = target_embed_.forward(tokens, batch, length);
  if (cfg_.task == TaskKind::seq2seq) {
    for (std::size_t b = 0; b < decoder_.size(); ++b) x = decoder_[b].forward(x, memories[b], causal, ctx);
  } else {
    for (const auto& block : lm_blocks_) x = block.forward(x, causal, ctx);
  }
  return decoder_norm_.forward(x);
}

Tensor DelightModel::logits(const Batch& batch, const ForwardContext& ctx) const {
  std::vector<AttentionMemory> memories;
  if (cfg_.task == TaskKind::seq2seq) {
    const Tensor encoded = encode(batch, ctx);
    const AttentionMask source_mask{.causal = false, .key_lengths = batch.source_lengths};
    for (const auto& block : decoder_) memories.push_back(block.source_attention().project(encoded, source_mask));
  }
  return classifier_.forward(decoder_hidden(batch.target_in, batch.size, batch.target_len, memories, ctx));
}

Tensor DelightModel::loss(const Batch& batch, double smoothing, const ForwardContext& ctx) const {
  return cross_entropy_smoothed(logits(batch, ctx), batch.target_out, smoothing, kPad);
}

DecodeResult DelightModel::greedy_decode(std::span<const int> source, std::size_t max_len, bool stop_at_eos) const {
  if (cfg_.task != TaskKind::seq2seq) throw std::logic_error("greedy_decode() needs a seq2seq model");
  Batch src;
  src.size = 1;
  src.source_len = source.size();
  src.source.assign(source.begin(), source.end());
  src.source_lengths = {source.size()};
  const Tensor encoded = encode(src);
  std::vector<AttentionMemory> memories;
  for (const auto& block : decoder_) memories.push_back(block.source_attention().project(encoded));

  DecodeResult result;
  std::vector<int> prefix{kBos};
  for (std::size_t step = 0; step < max_len; ++step) {
    const Tensor hidden = decoder_hidden(prefix, 1, prefix.size(), memories, {});
    const std::array<std::size_t, 2> rows{prefix.size() - 1, 1};
    const Tensor last = rows[0] == 0 ? hidden : split(hidden, 1, rows)[1];
    const Tensor scores = classifier_.forward(last);
    int best = 0;
    for (std::size_t v = 1; v < scores.numel(); ++v) {
      if (scores[v] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(v);
    }
    if (stop_at_eos && best == kEos) return result;
    result.tokens.push_back(best);
    prefix.push_back(best);
  }
  result.truncated = true;
  return result;
}

}  // namespace delight
