// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/group_linear.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "delight/kernels/gemm.hpp"
#include "delight/mac_counter.hpp"
#include "delight/ops.hpp"

namespace delight {

namespace {

void require_divides(std::size_t groups, std::size_t width, const std::string& what) {
  if (groups == 0 || width % groups != 0) {
    throw DimensionError(what + ": " + std::to_string(groups) + " groups do not divide width " +
                         std::to_string(width));
  }
}

}  // namespace

Tensor group_linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 3) throw DimensionError("group weight must be [g, in/g, out/g], got " + shape_string(weight.shape()));
  const std::size_t groups = weight.dim(0), gin = weight.dim(1), gout = weight.dim(2);
  const std::size_t in = groups * gin, out_dim = groups * gout;
  if (x.dim(-1) != in) {
    throw DimensionError("group linear expects last axis " + std::to_string(in) + ", got " + shape_string(x.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{out_dim}) {
    throw DimensionError("group bias " + shape_string(bias.shape()) + " does not match output width " +
                         std::to_string(out_dim));
  }
  const std::size_t rows = x.numel() / in;
  Shape shape = x.shape();
  shape.back() = out_dim;
  std::vector<double> values(rows * out_dim);
  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  for (std::size_t g = 0; g < groups; ++g) {
    kernels::gemm({rows, gout, gin, {xd + g * gin, in}, {wd + g * gin * gout, gout}, values.data() + g * gout, out_dim});
  }
  if (bias.defined()) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < out_dim; ++j) values[r * out_dim + j] += bias[j];
    }
  }
  count_macs("group_linear", static_cast<std::uint64_t>(rows) * gin * gout * groups);
  Tensor out(std::move(shape), std::move(values));

  const bool grad_needed =
      active_tape() != nullptr && (x.requires_grad() || weight.requires_grad() || (bias.defined() && bias.requires_grad()));
  if (grad_needed) {
    out.set_requires_grad(true);
    auto xi = x.shared_impl(), wi = weight.shared_impl(), bi = bias.shared_impl(), oi = out.shared_impl();
    std::vector<Tensor> inputs{x, weight};
    if (bias.defined()) inputs.push_back(bias);
    active_tape()->record(std::move(inputs), out, [=] {
      const double* g = oi->grad.data();
      if (xi->requires_grad) {
        double* gx = xi->grad_buffer().data();
        for (std::size_t k = 0; k < groups; ++k) {
          kernels::gemm({rows, gin, gout, {g + k * gout, out_dim}, {wi->data.data() + k * gin * gout, gout, true},
                         gx + k * gin, in, true});
        }
      }
      if (wi->requires_grad) {
        double* gw = wi->grad_buffer().data();
        for (std::size_t k = 0; k < groups; ++k) {
          kernels::gemm({gin, gout, rows, {xi->data.data() + k * gin, in, true}, {g + k * gout, out_dim},
                         gw + k * gin * gout, gout, true});
        }
      }
      if (bi && bi->requires_grad) {
        auto& gb = bi->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < out_dim; ++j) gb[j] += g[r * out_dim + j];
        }
      }
    });
  }
  return out;
}

std::vector<std::size_t> shuffle_permutation(std::size_t width, std::size_t groups) {
  require_divides(groups, width, "feature shuffle");
  const std::size_t per_group = width / groups;
  std::vector<std::size_t> perm(width);
  for (std::size_t i = 0; i < groups; ++i) {
    for (std::size_t j = 0; j < per_group; ++j) perm[j * groups + i] = i * per_group + j;
  }
  return perm;
}

Tensor feature_shuffle(const Tensor& x, std::size_t groups) {
  if (groups == 1) {
    require_divides(groups, x.dim(-1), "feature shuffle");
    return x;
  }
  return permute_features(x, shuffle_permutation(x.dim(-1), groups));
}

std::vector<std::size_t> mixer_permutation(std::size_t x_width, std::size_t y_width, std::size_t groups) {
  require_divides(groups, x_width, "input mixer (block input)");
  require_divides(groups, y_width, "input mixer (previous layer output)");
  const std::size_t xc = x_width / groups, yc = y_width / groups;
  std::vector<std::size_t> perm;
  perm.reserve(x_width + y_width);
  // Source layout is concat([y, x]).
  for (std::size_t i = 0; i < groups; ++i) {
    for (std::size_t t = 0; t < yc; ++t) perm.push_back(i * yc + t);
    for (std::size_t t = 0; t < xc; ++t) perm.push_back(y_width + i * xc + t);
  }
  return perm;
}

Tensor input_mixer(const Tensor& x, const Tensor& y_shuffled, std::size_t groups) {
  const std::size_t x_width = x.dim(-1), y_width = y_shuffled.dim(-1);
  const auto perm = mixer_permutation(x_width, y_width, groups);
  const std::array<Tensor, 2> parts{y_shuffled, x};
  Tensor joined = concat(parts, -1);
  if (groups == 1) return joined;
  return permute_features(joined, perm);
}

GroupLinear::GroupLinear(ParameterStore& store, const std::string& name, std::size_t in_dim, std::size_t out_dim,
                         std::size_t groups, Rng& rng, bool use_bias)
    : name_(name), in_dim_(in_dim), out_dim_(out_dim), groups_(groups) {
  require_divides(groups, in_dim, "layer " + name + " input");
  require_divides(groups, out_dim, "layer " + name + " output");
  const std::size_t gin = in_dim / groups, gout = out_dim / groups;
  const double bound = std::sqrt(1.0 / static_cast<double>(gin));
  std::vector<double> w(groups * gin * gout);
  for (auto& v : w) v = uniform(rng, -bound, bound);
  weight_ = store.add(name + ".weight", {groups, gin, gout}, std::move(w));
  if (use_bias) {
    std::vector<double> b(out_dim);
    for (auto& v : b) v = uniform(rng, -bound, bound);
    bias_ = store.add(name + ".bias", {out_dim}, std::move(b));
  }
}

Tensor GroupLinear::forward(const Tensor& x) const {
  if (x.dim(-1) != in_dim_) {
    throw DimensionError("layer " + name_ + " expects last axis " + std::to_string(in_dim_) + ", got " +
                         shape_string(x.shape()));
  }
  return group_linear(x, weight_, bias_);
}

std::size_t GroupLinear::parameter_count(std::size_t in_dim, std::size_t out_dim, std::size_t groups, bool use_bias) {
  return in_dim * out_dim / groups + (use_bias ? out_dim : 0);
}

std::size_t GroupLinear::parameter_count() const {
  return parameter_count(in_dim_, out_dim_, groups_, use_bias());
}

}  // namespace delight
