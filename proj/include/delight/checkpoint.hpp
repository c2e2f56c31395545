// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "delight/tensor.hpp"

// Binary checkpoint, little-endian:
//   "DLGT" u32 version u64 step u64 config_hash
//   u64 config_len, config JSON bytes
//   u64 tensor_count, then per tensor:
//     u32 name_len, name, u32 rank, u64 dims[rank], f64 values[numel]
namespace delight {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  std::uint64_t step = 0;
  std::uint64_t config_hash = 0;
  std::string config_json;
  std::vector<ParameterStore::Entry> tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Snapshot of every parameter in store order.
Checkpoint make_checkpoint(const ParameterStore& store, std::uint64_t step, std::uint64_t config_hash,
                           std::string config_json);
/// Copies values into `store`; names and shapes must match one to one.
void restore_parameters(const Checkpoint& ckpt, ParameterStore& store);

}  // namespace delight
