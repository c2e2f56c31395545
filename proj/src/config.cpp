// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "delight/data.hpp"
#include "delight/dextra.hpp"

namespace delight {

namespace {

using Json = nlohmann::json;
using Setter = std::function<void(const Json&, const std::string&)>;

std::size_t as_count(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(path + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

void apply_section(const Json& doc, const std::string& section, const std::map<std::string, Setter>& fields) {
  if (!doc.contains(section)) return;
  const Json& obj = doc.at(section);
  if (!obj.is_object()) throw ConfigError(section + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string path = section + "." + key;
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(path + ": unknown key");
    it->second(value, path);
  }
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::vector<std::string> sections{"model", "scaling", "train", "task", "report"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(sections.begin(), sections.end(), key) == sections.end()) throw ConfigError(key + ": unknown section");
  }

  RunConfig cfg;
  auto& m = cfg.model;
  auto& s = cfg.model.scaling;
  auto& t = cfg.train;
  auto& k = cfg.task;
  auto& r = cfg.report;
  bool vocab_given = false;

  apply_section(doc, "model", {
      {"vocab", [&](const Json& v, const std::string& p) { m.vocab = as_count(v, p); vocab_given = true; }},
      {"embed_dim", [&](const Json& v, const std::string& p) { m.embed_dim = as_count(v, p); }},
      {"d_m", [&](const Json& v, const std::string& p) { m.model_dim = as_count(v, p); }},
      {"attn_ratio", [&](const Json& v, const std::string& p) { m.attn_ratio = as_number(v, p); }},
      {"ffn_reduction", [&](const Json& v, const std::string& p) { m.ffn_reduction = as_number(v, p); }},
      {"max_groups", [&](const Json& v, const std::string& p) { m.max_groups = as_count(v, p); }},
      {"shuffle", [&](const Json& v, const std::string& p) { m.shuffle = as_bool(v, p); }},
      {"dropout", [&](const Json& v, const std::string& p) { m.dropout = as_number(v, p); }},
      {"max_positions", [&](const Json& v, const std::string& p) { m.max_positions = as_count(v, p); }},
  });
  apply_section(doc, "scaling", {
      {"n_min", [&](const Json& v, const std::string& p) { s.min_depth = as_count(v, p); }},
      {"n_max", [&](const Json& v, const std::string& p) { s.max_depth = as_count(v, p); }},
      {"width_mult", [&](const Json& v, const std::string& p) { s.width_mult = as_number(v, p); }},
      {"blocks", [&](const Json& v, const std::string& p) { s.blocks = as_count(v, p); }},
  });
  apply_section(doc, "train", {
      {"steps", [&](const Json& v, const std::string& p) { t.steps = as_count(v, p); }},
      {"batch_size", [&](const Json& v, const std::string& p) { t.batch_size = as_count(v, p); }},
      {"warmup", [&](const Json& v, const std::string& p) { t.warmup = as_count(v, p); }},
      {"peak_lr", [&](const Json& v, const std::string& p) { t.peak_lr = as_number(v, p); }},
      {"label_smoothing", [&](const Json& v, const std::string& p) { t.label_smoothing = as_number(v, p); }},
      {"seed", [&](const Json& v, const std::string& p) { t.seed = as_count(v, p); }},
      {"eval_every", [&](const Json& v, const std::string& p) { t.eval_every = as_count(v, p); }},
      {"log_throughput", [&](const Json& v, const std::string& p) { t.log_throughput = as_bool(v, p); }},
  });
  apply_section(doc, "task", {
      {"kind", [&](const Json& v, const std::string& p) { k.kind = as_string(v, p); }},
      {"min_len", [&](const Json& v, const std::string& p) { k.min_len = as_count(v, p); }},
      {"max_len", [&](const Json& v, const std::string& p) { k.max_len = as_count(v, p); }},
      {"train_size", [&](const Json& v, const std::string& p) { k.train_size = as_count(v, p); }},
      {"valid_size", [&](const Json& v, const std::string& p) { k.valid_size = as_count(v, p); }},
      {"context", [&](const Json& v, const std::string& p) { k.context = as_count(v, p); }},
      {"valid_fraction", [&](const Json& v, const std::string& p) { k.valid_fraction = as_number(v, p); }},
  });
  apply_section(doc, "report", {
      {"n", [&](const Json& v, const std::string& p) { r.source_tokens = as_count(v, p); }},
      {"m", [&](const Json& v, const std::string& p) { r.target_tokens = as_count(v, p); }},
      {"format", [&](const Json& v, const std::string& p) { r.format = as_string(v, p); }},
  });

  if (k.kind == "copy") {
    m.task = TaskKind::seq2seq;
  } else if (k.kind == "char_lm") {
    m.task = TaskKind::lm;
    const std::size_t needed = CharVocabulary(bundled_text()).size();
    if (!vocab_given || m.vocab == 0) {
      m.vocab = needed;
    } else if (m.vocab < needed) {
      throw ConfigError("model.vocab: char_lm corpus needs " + std::to_string(needed) + " entries");
    }
  } else {
    throw ConfigError("task.kind: expected \"copy\" or \"char_lm\"");
  }
  if (r.format != "csv" && r.format != "json") throw ConfigError("report.format: expected \"csv\" or \"json\"");
  if (t.batch_size == 0) throw ConfigError("train.batch_size: must be positive");
  if (t.label_smoothing < 0.0 || t.label_smoothing >= 1.0) throw ConfigError("train.label_smoothing: must lie in [0, 1)");
  m.seed = t.seed;
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(doc);
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  const auto& m = cfg.model;
  j["model"] = {{"vocab", m.vocab},           {"embed_dim", m.embed_dim},       {"d_m", m.model_dim},
                {"attn_ratio", m.attn_ratio}, {"ffn_reduction", m.ffn_reduction}, {"max_groups", m.max_groups},
                {"shuffle", m.shuffle},       {"dropout", m.dropout},           {"max_positions", m.max_positions}};
  j["scaling"] = {{"n_min", m.scaling.min_depth},
                  {"n_max", m.scaling.max_depth},
                  {"width_mult", m.scaling.width_mult},
                  {"blocks", m.scaling.blocks}};
  const auto& t = cfg.train;
  j["train"] = {{"steps", t.steps},     {"batch_size", t.batch_size},
                {"warmup", t.warmup},   {"peak_lr", t.peak_lr},
                {"label_smoothing", t.label_smoothing}, {"seed", t.seed},
                {"eval_every", t.eval_every}, {"log_throughput", t.log_throughput}};
  const auto& k = cfg.task;
  j["task"] = {{"kind", k.kind},           {"min_len", k.min_len},       {"max_len", k.max_len},
               {"train_size", k.train_size}, {"valid_size", k.valid_size}, {"context", k.context},
               {"valid_fraction", k.valid_fraction}};
  j["report"] = {{"n", cfg.report.source_tokens}, {"m", cfg.report.target_tokens}, {"format", cfg.report.format}};
  return j;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : run_config_to_json(cfg).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace delight
