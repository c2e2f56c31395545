// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>

#include "delight/model.hpp"
#include "delight/train.hpp"

namespace delight {

struct TaskConfig {
  std::string kind = "copy";  // copy | char_lm
  std::size_t min_len = 3;
  std::size_t max_len = 8;
  std::size_t train_size = 50000;
  std::size_t valid_size = 200;
  std::size_t context = 32;
  double valid_fraction = 0.1;
};

struct ReportConfig {
  std::size_t source_tokens = 20;  // n
  std::size_t target_tokens = 20;  // m
  std::string format = "csv";      // csv | json
};

/// Complete description of one run. Every field has an explicit default.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  TaskConfig task;
  ReportConfig report;
};

/// Validates against the schema (unknown keys and wrong types are rejected
/// with the offending path) and fills defaults. For char_lm a vocab of 0
/// resolves to the size of the bundled corpus vocabulary.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
/// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace delight
