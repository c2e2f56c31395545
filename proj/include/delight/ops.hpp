// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "delight/random.hpp"
#include "delight/tensor.hpp"

// Differentiable primitives. Each op computes its forward value eagerly and,
// when a tape is active and an input requires a gradient, records its
// backward rule on that tape.
namespace delight {

/// a[..., m, k] x b[..., k, n]. `b` may also be a plain [k, n] matrix shared
/// across every batch entry of `a`.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Swaps the last two axes.
Tensor transpose_last(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

/// Elementwise sum; `b`'s shape must equal `a`'s or be a suffix of it
/// (broadcast over the leading axes).
Tensor add(const Tensor& a, const Tensor& b);
/// Elementwise product of same-shape tensors.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// Sum of all elements, shape [1].
Tensor sum(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, int axis);
std::vector<Tensor> split(const Tensor& x, int axis, std::span<const std::size_t> sizes);

/// out[..., j] = x[..., perm[j]] over the last axis.
Tensor permute_features(const Tensor& x, std::span<const std::size_t> perm);
std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm);

/// Exact GELU, x * Phi(x).
Tensor gelu(const Tensor& x);
/// Normalizes over the last axis, then applies gain and bias of that width.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
/// Inverted dropout. Identity when p == 0 or not training.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);
Tensor softmax(const Tensor& x, int axis = -1);

/// Mean label-smoothed cross entropy over rows of `logits` ([..., V]).
///
/// The target distribution puts 1 - epsilon on the gold class and
/// epsilon / (V - 1) on every other class. Rows whose target equals
/// `ignore_index` are excluded from the mean.
Tensor cross_entropy_smoothed(const Tensor& logits, std::span<const int> targets, double epsilon,
                              int ignore_index = -1);

/// Row lookup into table[V, d]; the result has shape index_shape + [d].
Tensor embedding(const Tensor& table, std::span<const int> ids, const Shape& index_shape);

}  // namespace delight
