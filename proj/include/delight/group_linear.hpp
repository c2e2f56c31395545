// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "delight/random.hpp"
#include "delight/tensor.hpp"

namespace delight {

/// Grouped affine map: the last axis of x is cut into `groups` contiguous
/// chunks, chunk i is multiplied by weight[i] ([in/g, out/g]) and the results
/// are concatenated in group order. `bias` ([out]) may be undefined.
Tensor group_linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Channel-shuffle permutation for width d and g groups: output index
/// j*g + i reads input index i*(d/g) + j.
std::vector<std::size_t> shuffle_permutation(std::size_t width, std::size_t groups);
Tensor feature_shuffle(const Tensor& x, std::size_t groups);

/// Group-wise concatenation: output group i is [y chunk i, x chunk i].
/// With groups == 1 this is plain concatenation [y, x].
Tensor input_mixer(const Tensor& x, const Tensor& y_shuffled, std::size_t groups);
std::vector<std::size_t> mixer_permutation(std::size_t x_width, std::size_t y_width, std::size_t groups);

/// Group linear transformation layer. With groups == 1 it is a dense layer.
class GroupLinear {
 public:
  GroupLinear() = default;
  /// Registers `<name>.weight` ([g, in/g, out/g]) and `<name>.bias` ([out]).
  /// Weights and biases start uniform in +-sqrt(1 / fan_in_per_group).
  GroupLinear(ParameterStore& store, const std::string& name, std::size_t in_dim, std::size_t out_dim,
              std::size_t groups, Rng& rng, bool use_bias = true);

  Tensor forward(const Tensor& x) const;

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t groups() const { return groups_; }
  bool use_bias() const { return bias_.defined(); }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

  std::size_t parameter_count() const;
  static std::size_t parameter_count(std::size_t in_dim, std::size_t out_dim, std::size_t groups, bool use_bias);

 private:
  std::string name_;
  std::size_t in_dim_ = 0, out_dim_ = 0, groups_ = 1;
  Tensor weight_;
  Tensor bias_;
};

}  // namespace delight
