// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "delight/group_linear.hpp"
#include "delight/random.hpp"
#include "delight/tensor.hpp"

namespace delight {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Expand-reduce transformation settings.
struct DextraConfig {
  std::size_t input_dim = 0;   // d_m
  std::size_t output_dim = 0;  // d_o
  std::size_t depth = 2;       // N
  double width_mult = 2.0;     // m_w, may be fractional
  std::size_t max_groups = 0;  // 0 selects ceil(d_m / 32)
  bool shuffle = true;         // ablation switch for feature shuffling

  std::size_t resolved_max_groups() const;
  /// round(m_w * d_m)
  std::size_t max_width() const;
};

/// One resolved layer of the stack. `in_dim` already includes the mixer
/// concatenation for layers after the first.
struct LayerSpec {
  std::size_t index = 0;  // 1-based
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t groups = 1;
  bool mixer = false;

  bool operator==(const LayerSpec&) const = default;
};

/// Groups per layer: min(2^(l-1), g_max) through the expansion half, mirrored
/// (g^l = g^(N-l+1)) through the reduction half.
std::vector<std::size_t> group_schedule(std::size_t depth, std::size_t max_groups);

/// Widths rise linearly from d_m to d_max over ceil(N/2) layers, then fall
/// linearly to d_o. Each intermediate width is rounded to the nearest multiple
/// of lcm(g^l, g^(l+1)); the last layer emits exactly d_o.
std::vector<LayerSpec> width_schedule(const DextraConfig& cfg, const std::vector<std::size_t>& groups);

std::vector<LayerSpec> plan_dextra(const DextraConfig& cfg);

std::size_t dextra_parameter_count(const std::vector<LayerSpec>& plan);

/// Executable DExTra unit with its layers registered in a ParameterStore.
class Dextra {
 public:
  Dextra() = default;
  Dextra(ParameterStore& store, const std::string& name, const DextraConfig& cfg, Rng& rng);

  /// x[..., d_m] -> [..., d_o]. GELU follows every layer but the last.
  Tensor forward(const Tensor& x) const;

  const DextraConfig& config() const { return cfg_; }
  const std::vector<LayerSpec>& plan() const { return plan_; }
  const std::vector<GroupLinear>& layers() const { return layers_; }
  std::size_t parameter_count() const { return dextra_parameter_count(plan_); }

 private:
  DextraConfig cfg_;
  std::vector<LayerSpec> plan_;
  std::vector<GroupLinear> layers_;
};

}  // namespace delight
