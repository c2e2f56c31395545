// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/accounting.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace delight {

std::uint64_t glt_params(std::size_t d_in, std::size_t d_out, std::size_t groups, bool use_bias) {
  return glt_macs(d_in, d_out, groups) + (use_bias ? d_out : 0);
}

std::uint64_t glt_macs(std::size_t d_in, std::size_t d_out, std::size_t groups) {
  if (groups == 0 || d_in % groups != 0 || d_out % groups != 0) {
    throw DimensionError(std::to_string(groups) + " groups do not divide " + std::to_string(d_in) + " -> " +
                         std::to_string(d_out));
  }
  return static_cast<std::uint64_t>(d_in) * d_out / groups;
}

std::uint64_t self_attention_macs(std::size_t n, std::size_t attn_dim) {
  return 2ull * attn_dim * n * n;
}

std::uint64_t source_target_attention_macs(std::size_t n, std::size_t m, std::size_t attn_dim) {
  return 2ull * n * attn_dim * (static_cast<std::uint64_t>(m) * (m + 1) / 2);
}

std::uint64_t light_ffn_weight_params(std::size_t model_dim, std::size_t inner_dim) {
  return 2ull * model_dim * inner_dim;
}

std::uint64_t baseline_ffn_weight_params(std::size_t model_dim) { return 8ull * model_dim * model_dim; }

// ---- report ----

std::uint64_t CostReport::total_params() const {
  std::uint64_t n = 0;
  for (const auto& e : entries) n += e.params;
  return n;
}

std::uint64_t CostReport::total_macs() const {
  std::uint64_t n = 0;
  for (const auto& e : entries) n += e.macs;
  return n;
}

CostEntry CostReport::block_total(const std::string& block) const {
  CostEntry total{"block", block, 0, 0};
  for (const auto& e : entries) {
    if (e.block == block) {
      total.params += e.params;
      total.macs += e.macs;
    }
  }
  return total;
}

std::string CostReport::to_csv() const {
  std::ostringstream out;
  out << "component,block,params,macs\n";
  for (const auto& e : entries) out << e.component << ',' << e.block << ',' << e.params << ',' << e.macs << '\n';
  out << "total,-," << total_params() << ',' << total_macs() << '\n';
  return out.str();
}

std::string CostReport::to_json() const {
  nlohmann::ordered_json j;
  j["source_tokens"] = source_tokens;
  j["target_tokens"] = target_tokens;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({{"component", e.component}, {"block", e.block}, {"params", e.params}, {"macs", e.macs}});
  }
  j["total_params"] = total_params();
  j["total_macs"] = total_macs();
  return j.dump(2) + "\n";
}

CostReport CostReport::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CostReport r;
  r.source_tokens = j.at("source_tokens").get<std::size_t>();
  r.target_tokens = j.at("target_tokens").get<std::size_t>();
  for (const auto& e : j.at("entries")) {
    r.entries.push_back({e.at("component").get<std::string>(), e.at("block").get<std::string>(),
                         e.at("params").get<std::uint64_t>(), e.at("macs").get<std::uint64_t>()});
  }
  if (j.contains("total_params") && j["total_params"].get<std::uint64_t>() != r.total_params()) {
    throw std::runtime_error("cost report totals do not match its entries");
  }
  return r;
}

// ---- model-level accounting ----

namespace {

std::uint64_t dense_params(std::size_t in, std::size_t out) { return glt_params(in, out, 1); }

std::uint64_t dextra_macs_per_token(const BlockConfig& cfg) {
  std::uint64_t macs = 0;
  for (const auto& l : plan_dextra(cfg.dextra())) macs += glt_macs(l.in_dim, l.out_dim, l.groups);
  return macs;
}

std::uint64_t dextra_params(const BlockConfig& cfg) {
  std::uint64_t params = 0;
  for (const auto& l : plan_dextra(cfg.dextra())) params += glt_params(l.in_dim, l.out_dim, l.groups);
  return params;
}

// Position-wise parts of a block (everything except the attention cores),
// charged for `tokens` token evaluations.
void add_positionwise(std::vector<CostEntry>& out, const BlockConfig& cfg, std::uint64_t tokens,
                      const std::string& block) {
  const std::uint64_t d_o = cfg.attn_dim;
  out.push_back({"dextra", block, dextra_params(cfg), tokens * dextra_macs_per_token(cfg)});
  out.push_back({"qkv", block, 3 * dense_params(d_o, d_o), tokens * 3 * d_o * d_o});
}

std::vector<CostEntry> embedding_cost(const ModelConfig& cfg, std::uint64_t tokens, const std::string& prefix) {
  std::vector<CostEntry> out;
  out.push_back({prefix + "_embedding", "-", static_cast<std::uint64_t>(cfg.vocab) * cfg.embed_dim, 0});
  if (cfg.embed_dim != cfg.model_dim) {
    out.push_back({prefix + "_embed_proj", "-", dense_params(cfg.embed_dim, cfg.model_dim),
                   tokens * cfg.embed_dim * cfg.model_dim});
  }
  return out;
}

void append(std::vector<CostEntry>& dst, const std::vector<CostEntry>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

}  // namespace

std::vector<CostEntry> encoder_block_cost(const BlockConfig& cfg, std::size_t n, const std::string& block) {
  const std::uint64_t d_m = cfg.model_dim, d_o = cfg.attn_dim, inner = cfg.ffn_inner_dim();
  std::vector<CostEntry> out;
  out.push_back({"norm", block, 2 * 2 * d_m, 0});
  add_positionwise(out, cfg, n, block);
  out.push_back({"attention", block, 0, self_attention_macs(n, d_o)});
  out.push_back({"attn_out", block, dense_params(d_o, d_m), n * d_o * d_m});
  out.push_back({"ffn", block, dense_params(d_m, inner) + dense_params(inner, d_m), n * light_ffn_weight_params(d_m, inner)});
  return out;
}

CostReport model_cost(const ModelConfig& cfg, std::size_t n, std::size_t m) {
  cfg.validate();
  if (n == 0 || (cfg.task == TaskKind::seq2seq && m == 0)) throw ConfigError("token counts must be positive");
  CostReport report;
  report.source_tokens = n;
  report.target_tokens = m;
  const BlockPlan plan = blockwise_plan(cfg.scaling);
  const std::uint64_t d_m = cfg.model_dim, vocab = cfg.vocab;
  auto& out = report.entries;

  if (cfg.task == TaskKind::lm) {
    append(out, embedding_cost(cfg, n, "target"));
    for (std::size_t b = 0; b < plan.size(); ++b) {
      append(out, encoder_block_cost(cfg.block_config(plan[b]), n, "lm" + std::to_string(b)));
    }
    out.push_back({"final_norm", "-", 2 * d_m, 0});
    out.push_back({"classifier", "-", dense_params(d_m, vocab), static_cast<std::uint64_t>(n) * d_m * vocab});
    return report;
  }

  append(out, embedding_cost(cfg, n, "source"));
  for (std::size_t b = 0; b < plan.size(); ++b) {
    append(out, encoder_block_cost(cfg.block_config(plan[b]), n, "enc" + std::to_string(b)));
  }
  out.push_back({"encoder_norm", "-", 2 * d_m, 0});

  // Decoder: step k processes k positions.
  const std::uint64_t prefix_tokens = static_cast<std::uint64_t>(m) * (m + 1) / 2;
  append(out, embedding_cost(cfg, prefix_tokens, "target"));
  for (std::size_t b = 0; b < plan.size(); ++b) {
    const BlockConfig bc = cfg.block_config(plan[b]);
    const std::string name = "dec" + std::to_string(b);
    const std::uint64_t d_o = bc.attn_dim, inner = bc.ffn_inner_dim();
    std::uint64_t self_attention = 0;
    for (std::size_t k = 1; k <= m; ++k) self_attention += self_attention_macs(k, d_o);
    out.push_back({"norm", name, 3 * 2 * d_m, 0});
    add_positionwise(out, bc, prefix_tokens, name);
    out.push_back({"attention", name, 0, self_attention});
    out.push_back({"attn_out", name, dense_params(d_o, d_m), prefix_tokens * d_o * d_m});
    out.push_back({"cross_query", name, dense_params(d_m, d_o), prefix_tokens * d_m * d_o});
    out.push_back({"cross_kv", name, 2 * dense_params(d_m, d_o), 2ull * n * d_m * d_o});
    out.push_back({"cross_attention", name, 0, source_target_attention_macs(n, m, d_o)});
    out.push_back({"cross_out", name, dense_params(d_o, d_m), prefix_tokens * d_o * d_m});
    out.push_back({"ffn", name, dense_params(d_m, inner) + dense_params(inner, d_m),
                   prefix_tokens * light_ffn_weight_params(d_m, inner)});
  }
  out.push_back({"decoder_norm", "-", 2 * d_m, 0});
  out.push_back({"classifier", "-", dense_params(d_m, vocab), static_cast<std::uint64_t>(m) * d_m * vocab});
  return report;
}

}  // namespace delight
