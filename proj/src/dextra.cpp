// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/dextra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "delight/ops.hpp"

namespace delight {

std::size_t DextraConfig::resolved_max_groups() const {
  if (max_groups != 0) return max_groups;
  return (input_dim + 31) / 32;
}

std::size_t DextraConfig::max_width() const {
  return static_cast<std::size_t>(std::floor(width_mult * static_cast<double>(input_dim) + 0.5));
}

std::vector<std::size_t> group_schedule(std::size_t depth, std::size_t max_groups) {
  if (depth < 2) throw ConfigError("DExTra depth must be at least 2, got " + std::to_string(depth));
  if (max_groups < 1) throw ConfigError("max groups must be at least 1");
  const std::size_t expand = (depth + 1) / 2;
  std::vector<std::size_t> groups(depth);
  for (std::size_t l = 1; l <= depth; ++l) {
    if (l <= expand) {
      const std::size_t doubling = l - 1 < 63 ? (std::size_t{1} << (l - 1)) : max_groups;
      groups[l - 1] = std::min(doubling, max_groups);
    } else {
      groups[l - 1] = groups[depth - l];  // g^(N-l+1), 1-based
    }
  }
  return groups;
}

namespace {

std::size_t round_to_multiple(double value, std::size_t unit) {
  const double units = std::floor(value / static_cast<double>(unit) + 0.5);
  return std::max<std::size_t>(1, static_cast<std::size_t>(units)) * unit;
}

}  // namespace

std::vector<LayerSpec> width_schedule(const DextraConfig& cfg, const std::vector<std::size_t>& groups) {
  const std::size_t depth = groups.size();
  if (depth < 2) throw ConfigError("DExTra depth must be at least 2, got " + std::to_string(depth));
  if (cfg.input_dim == 0 || cfg.output_dim == 0) throw ConfigError("DExTra dimensions must be positive");
  if (cfg.width_mult < 1.0) throw ConfigError("width multiplier must be >= 1");

  std::vector<std::size_t> offending;
  for (std::size_t l = 2; l <= depth; ++l) {
    if (cfg.input_dim % groups[l - 1] != 0) offending.push_back(groups[l - 1]);
  }
  if (cfg.output_dim % groups.back() != 0) offending.push_back(groups.back());
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "DExTra input dim " << cfg.input_dim << " / output dim " << cfg.output_dim
        << " not divisible by group counts:";
    for (auto g : offending) msg << ' ' << g;
    throw ConfigError(msg.str());
  }

  const std::size_t expand = (depth + 1) / 2;
  const double d_in = static_cast<double>(cfg.input_dim);
  const double d_max = static_cast<double>(cfg.max_width());
  const double d_out = static_cast<double>(cfg.output_dim);

  std::vector<LayerSpec> plan(depth);
  for (std::size_t l = 1; l <= depth; ++l) {
    LayerSpec& spec = plan[l - 1];
    spec.index = l;
    spec.groups = groups[l - 1];
    spec.mixer = l > 1;
    if (l == depth) {
      spec.out_dim = cfg.output_dim;
    } else {
      double target;
      if (l <= expand) {
        target = d_in + (d_max - d_in) * static_cast<double>(l) / static_cast<double>(expand);
      } else {
        target = d_max + (d_out - d_max) * static_cast<double>(l - expand) / static_cast<double>(depth - expand);
      }
      spec.out_dim = round_to_multiple(target, std::lcm(groups[l - 1], groups[l]));
    }
    spec.in_dim = l == 1 ? cfg.input_dim : cfg.input_dim + plan[l - 2].out_dim;
  }
  return plan;
}

std::vector<LayerSpec> plan_dextra(const DextraConfig& cfg) {
  return width_schedule(cfg, group_schedule(cfg.depth, cfg.resolved_max_groups()));
}

std::size_t dextra_parameter_count(const std::vector<LayerSpec>& plan) {
  std::size_t total = 0;
  for (const auto& l : plan) total += GroupLinear::parameter_count(l.in_dim, l.out_dim, l.groups, true);
  return total;
}

Dextra::Dextra(ParameterStore& store, const std::string& name, const DextraConfig& cfg, Rng& rng)
    : cfg_(cfg), plan_(plan_dextra(cfg)) {
  for (const auto& spec : plan_) {
    layers_.emplace_back(store, name + ".layer" + std::to_string(spec.index), spec.in_dim, spec.out_dim, spec.groups,
                         rng);
  }
}

Tensor Dextra::forward(const Tensor& x) const {
  if (x.dim(-1) != cfg_.input_dim) {
    throw DimensionError("DExTra expects last axis " + std::to_string(cfg_.input_dim) + ", got " +
                         shape_string(x.shape()));
  }
  Tensor y = layers_.front().forward(x);
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    y = gelu(y);
    const std::size_t prev_groups = plan_[l - 1].groups, groups = plan_[l].groups;
    Tensor mixed;
    if (prev_groups == 1 || groups == 1) {
      mixed = input_mixer(x, y, 1);
    } else {
      mixed = input_mixer(x, cfg_.shuffle ? feature_shuffle(y, prev_groups) : y, groups);
    }
    y = layers_[l].forward(mixed);
  }
  return y;
}

}  // namespace delight
