// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "delight/kernels/gemm.hpp"
#include "delight/mac_counter.hpp"

namespace delight {

namespace {

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

void record(std::vector<Tensor> inputs, Tensor& out, Tape::BackwardFn fn) {
  out.set_requires_grad(true);
  active_tape()->record(std::move(inputs), out, std::move(fn));
}

std::size_t normalize_axis(int axis, std::size_t rank, const Shape& shape) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for shape " + shape_string(shape));
  }
  return static_cast<std::size_t>(a);
}

// (outer, axis, inner) factorization of a shape around one axis.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

// ---- linear algebra ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) {
    throw DimensionError("matmul needs rank >= 2 operands, got " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.dim(-2), k = a.dim(-1), n = b.dim(-1);
  const Shape a_batch(a.shape().begin(), a.shape().end() - 2);
  const Shape b_batch(b.shape().begin(), b.shape().end() - 2);
  const bool shared_b = b.rank() == 2;
  if (b.dim(-2) != k || (!shared_b && a_batch != b_batch)) {
    throw DimensionError("matmul shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const std::size_t batch = shape_numel(a_batch);
  Shape out_shape = a_batch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor out(out_shape, std::vector<double>(batch * m * n));

  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.mutable_data().data();
  if (shared_b) {
    kernels::gemm({batch * m, n, k, {ad, k}, {bd, n}, od, n});
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      kernels::gemm({m, n, k, {ad + i * m * k, k}, {bd + i * k * n, n}, od + i * m * n, n});
    }
  }
  count_macs("matmul", static_cast<std::uint64_t>(batch) * m * n * k);

  if (tracking({&a, &b})) {
    ImplPtr ai = a.shared_impl(), bi = b.shared_impl(), oi = out.shared_impl();
    record({a, b}, out, [ai, bi, oi, batch, m, n, k, shared_b] {
      const double* g = oi->grad.data();
      if (ai->requires_grad) {
        double* ga = ai->grad_buffer().data();
        const double* bd = bi->data.data();
        if (shared_b) {
          kernels::gemm({batch * m, k, n, {g, n}, {bd, n, true}, ga, k, true});
        } else {
          for (std::size_t i = 0; i < batch; ++i) {
            kernels::gemm({m, k, n, {g + i * m * n, n}, {bd + i * k * n, n, true}, ga + i * m * k, k, true});
          }
        }
      }
      if (bi->requires_grad) {
        double* gb = bi->grad_buffer().data();
        const double* ad = ai->data.data();
        if (shared_b) {
          kernels::gemm({k, n, batch * m, {ad, k, true}, {g, n}, gb, n, true});
        } else {
          for (std::size_t i = 0; i < batch; ++i) {
            kernels::gemm({k, n, m, {ad + i * m * k, k, true}, {g + i * m * n, n}, gb + i * k * n, n, true});
          }
        }
      }
    });
  }
  return out;
}

Tensor transpose_last(const Tensor& x) {
  if (x.rank() < 2) throw DimensionError("transpose_last needs rank >= 2, got " + shape_string(x.shape()));
  const std::size_t r = x.dim(-2), c = x.dim(-1), batch = x.numel() / (r * c);
  Shape shape = x.shape();
  std::swap(shape[shape.size() - 1], shape[shape.size() - 2]);
  std::vector<double> values(x.numel());
  const double* src = x.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) values[b * r * c + j * r + i] = src[b * r * c + i * c + j];
    }
  }
  Tensor out(std::move(shape), std::move(values));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi, batch, r, c] {
      auto& gx = xi->grad_buffer();
      const auto& g = oi->grad;
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) gx[b * r * c + i * c + j] += g[b * r * c + j * r + i];
        }
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("cannot reshape " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi] {
      auto& gx = xi->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += oi->grad[i];
    });
  }
  return out;
}

// ---- elementwise ----

Tensor add(const Tensor& a, const Tensor& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.rbegin(), bs.rend(), as.rbegin())) {
    throw DimensionError("add: shape " + shape_string(bs) + " does not broadcast onto " + shape_string(as));
  }
  const std::size_t nb = b.numel(), outer = a.numel() / nb;
  std::vector<double> values(a.data().begin(), a.data().end());
  const double* bd = b.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < nb; ++j) values[o * nb + j] += bd[j];
  }
  Tensor out(as, std::move(values));
  if (tracking({&a, &b})) {
    ImplPtr ai = a.shared_impl(), bi = b.shared_impl(), oi = out.shared_impl();
    record({a, b}, out, [ai, bi, oi, outer, nb] {
      const auto& g = oi->grad;
      if (ai->requires_grad) {
        auto& ga = ai->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (bi->requires_grad) {
        auto& gb = bi->grad_buffer();
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t j = 0; j < nb; ++j) gb[j] += g[o * nb + j];
        }
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul shape mismatch: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  std::vector<double> values(a.numel());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = a[i] * b[i];
  Tensor out(a.shape(), std::move(values));
  if (tracking({&a, &b})) {
    ImplPtr ai = a.shared_impl(), bi = b.shared_impl(), oi = out.shared_impl();
    record({a, b}, out, [ai, bi, oi] {
      const auto& g = oi->grad;
      if (ai->requires_grad) {
        auto& ga = ai->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bi->data[i];
      }
      if (bi->requires_grad) {
        auto& gb = bi->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ai->data[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> values(x.data().begin(), x.data().end());
  for (auto& v : values) v *= factor;
  Tensor out(x.shape(), std::move(values));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi, factor] {
      auto& gx = xi->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * oi->grad[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  Tensor out = Tensor::scalar(std::accumulate(x.data().begin(), x.data().end(), 0.0));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi] {
      auto& gx = xi->grad_buffer();
      for (auto& v : gx) v += oi->grad[0];
    });
  }
  return out;
}

// ---- structural ----

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Shape& first = parts[0].shape();
  const std::size_t ax = normalize_axis(axis, first.size(), first);
  Shape out_shape = first;
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != first.size()) {
      throw DimensionError("concat rank mismatch: " + shape_string(first) + " vs " + shape_string(probe));
    }
    out_shape[ax] += probe[ax];
    probe[ax] = first[ax];
    if (probe != first) {
      throw DimensionError("concat shape mismatch: " + shape_string(first) + " vs " + shape_string(p.shape()));
    }
  }
  const AxisSplit geom = split_at(out_shape, ax);
  const std::size_t out_row = geom.extent * geom.inner;
  std::vector<double> values(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t row = p.shape()[ax] * geom.inner;
    const double* src = p.data().data();
    for (std::size_t o = 0; o < geom.outer; ++o) {
      std::copy_n(src + o * row, row, values.data() + o * out_row + offset);
    }
    offset += row;
  }
  Tensor out(std::move(out_shape), std::move(values));

  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (any && active_tape() != nullptr) {
    std::vector<ImplPtr> impls;
    for (const auto& p : parts) impls.push_back(p.shared_impl());
    ImplPtr oi = out.shared_impl();
    record({parts.begin(), parts.end()}, out, [impls, oi, offsets, geom, out_row] {
      for (std::size_t i = 0; i < impls.size(); ++i) {
        if (!impls[i]->requires_grad) continue;
        auto& gp = impls[i]->grad_buffer();
        const std::size_t row = gp.size() / geom.outer;
        for (std::size_t o = 0; o < geom.outer; ++o) {
          const double* g = oi->grad.data() + o * out_row + offsets[i];
          for (std::size_t j = 0; j < row; ++j) gp[o * row + j] += g[j];
        }
      }
    });
  }
  return out;
}

std::vector<Tensor> split(const Tensor& x, int axis, std::span<const std::size_t> sizes) {
  const std::size_t ax = normalize_axis(axis, x.rank(), x.shape());
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total != x.shape()[ax]) {
    throw DimensionError("split sizes sum to " + std::to_string(total) + " but axis " + std::to_string(axis) +
                         " of " + shape_string(x.shape()) + " has length " + std::to_string(x.shape()[ax]));
  }
  const AxisSplit geom = split_at(x.shape(), ax);
  const std::size_t in_row = geom.extent * geom.inner;
  std::vector<Tensor> outs;
  std::size_t offset = 0;
  for (auto size : sizes) {
    Shape shape = x.shape();
    shape[ax] = size;
    const std::size_t row = size * geom.inner;
    std::vector<double> values(geom.outer * row);
    for (std::size_t o = 0; o < geom.outer; ++o) {
      std::copy_n(x.data().data() + o * in_row + offset, row, values.data() + o * row);
    }
    Tensor out(std::move(shape), std::move(values));
    if (tracking({&x})) {
      ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
      record({x}, out, [xi, oi, geom, in_row, offset, row] {
        auto& gx = xi->grad_buffer();
        for (std::size_t o = 0; o < geom.outer; ++o) {
          for (std::size_t j = 0; j < row; ++j) gx[o * in_row + offset + j] += oi->grad[o * row + j];
        }
      });
    }
    outs.push_back(std::move(out));
    offset += row;
  }
  return outs;
}

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inverse(perm.size(), perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    if (perm[j] >= perm.size() || inverse[perm[j]] != perm.size()) {
      throw std::invalid_argument("not a permutation of 0.." + std::to_string(perm.size() - 1));
    }
    inverse[perm[j]] = j;
  }
  return inverse;
}

Tensor permute_features(const Tensor& x, std::span<const std::size_t> perm) {
  const std::size_t d = x.dim(-1);
  if (perm.size() != d) {
    throw DimensionError("permutation of length " + std::to_string(perm.size()) + " applied to shape " +
                         shape_string(x.shape()));
  }
  invert_permutation(perm);  // validates
  const std::size_t rows = x.numel() / d;
  std::vector<std::size_t> p(perm.begin(), perm.end());
  std::vector<double> values(x.numel());
  const double* src = x.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) values[r * d + j] = src[r * d + p[j]];
  }
  Tensor out(x.shape(), std::move(values));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi, p = std::move(p), rows, d] {
      auto& gx = xi->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) gx[r * d + p[j]] += oi->grad[r * d + j];
      }
    });
  }
  return out;
}

// ---- nonlinearities and normalization ----

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  std::vector<double> values(x.numel());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * kInvSqrt2));
  }
  Tensor out(x.shape(), std::move(values));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi] {
      constexpr double kInvSqrt2Pi = 0.3989422804014326779;
      auto& gx = xi->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double v = xi->data[i];
        const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
        gx[i] += oi->grad[i] * (cdf + v * pdf);
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t d = x.dim(-1);
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw DimensionError("layer_norm over " + shape_string(x.shape()) + " with gain " +
                         shape_string(gain.shape()) + " and bias " + shape_string(bias.shape()));
  }
  const std::size_t rows = x.numel() / d;
  std::vector<double> values(x.numel()), xhat(x.numel()), rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* v = x.data().data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += v[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (v[j] - mean) * (v[j] - mean);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (v[j] - mean) * rstd[r];
      values[r * d + j] = xhat[r * d + j] * gain[j] + bias[j];
    }
  }
  Tensor out(x.shape(), std::move(values));
  if (tracking({&x, &gain, &bias})) {
    ImplPtr xi = x.shared_impl(), gi = gain.shared_impl(), bi = bias.shared_impl(), oi = out.shared_impl();
    record({x, gain, bias}, out, [xi, gi, bi, oi, xhat = std::move(xhat), rstd = std::move(rstd), rows, d] {
      const auto& g = oi->grad;
      if (gi->requires_grad || bi->requires_grad) {
        auto& gg = gi->grad_buffer();
        auto& gb = bi->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < d; ++j) {
            gg[j] += g[r * d + j] * xhat[r * d + j];
            gb[j] += g[r * d + j];
          }
        }
      }
      if (xi->requires_grad) {
        auto& gx = xi->grad_buffer();
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dy = 0.0, mean_dy_xhat = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double dy = g[r * d + j] * gi->data[j];
            mean_dy += dy;
            mean_dy_xhat += dy * xhat[r * d + j];
          }
          mean_dy *= inv_d;
          mean_dy_xhat *= inv_d;
          for (std::size_t j = 0; j < d; ++j) {
            const double dy = g[r * d + j] * gi->data[j];
            gx[r * d + j] += rstd[r] * (dy - mean_dy - xhat[r * d + j] * mean_dy_xhat);
          }
        }
      }
    });
  }
  return out;
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.numel());
  std::vector<double> values(x.numel());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = uniform01(rng) < p ? 0.0 : keep_scale;
    values[i] = x[i] * mask[i];
  }
  Tensor out(x.shape(), std::move(values));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi, mask = std::move(mask)] {
      auto& gx = xi->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += oi->grad[i] * mask[i];
    });
  }
  return out;
}

Tensor softmax(const Tensor& x, int axis) {
  const std::size_t ax = normalize_axis(axis, x.rank(), x.shape());
  const AxisSplit geom = split_at(x.shape(), ax);
  std::vector<double> values(x.numel());
  if (geom.inner == 1) {
    kernels::softmax_rows(x.data().data(), values.data(), geom.outer, geom.extent);
  } else {
    std::vector<double> lane(geom.extent), result(geom.extent);
    for (std::size_t o = 0; o < geom.outer; ++o) {
      for (std::size_t i = 0; i < geom.inner; ++i) {
        const std::size_t base = o * geom.extent * geom.inner + i;
        for (std::size_t e = 0; e < geom.extent; ++e) lane[e] = x[base + e * geom.inner];
        kernels::softmax_rows(lane.data(), result.data(), 1, geom.extent);
        for (std::size_t e = 0; e < geom.extent; ++e) values[base + e * geom.inner] = result[e];
      }
    }
  }
  Tensor out(x.shape(), std::move(values));
  if (tracking({&x})) {
    ImplPtr xi = x.shared_impl(), oi = out.shared_impl();
    record({x}, out, [xi, oi, geom] {
      auto& gx = xi->grad_buffer();
      const auto& y = oi->data;
      const auto& g = oi->grad;
      for (std::size_t o = 0; o < geom.outer; ++o) {
        for (std::size_t i = 0; i < geom.inner; ++i) {
          const std::size_t base = o * geom.extent * geom.inner + i;
          double dot = 0.0;
          for (std::size_t e = 0; e < geom.extent; ++e) {
            const std::size_t idx = base + e * geom.inner;
            dot += g[idx] * y[idx];
          }
          for (std::size_t e = 0; e < geom.extent; ++e) {
            const std::size_t idx = base + e * geom.inner;
            gx[idx] += y[idx] * (g[idx] - dot);
          }
        }
      }
    });
  }
  return out;
}

Tensor cross_entropy_smoothed(const Tensor& logits, std::span<const int> targets, double epsilon,
                              int ignore_index) {
  if (epsilon < 0.0 || epsilon >= 1.0) throw std::invalid_argument("label smoothing must lie in [0, 1)");
  const std::size_t vocab = logits.dim(-1);
  const std::size_t rows = logits.numel() / vocab;
  if (targets.size() != rows) {
    throw DimensionError("cross entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_string(logits.shape()));
  }
  if (vocab < 2 && epsilon > 0.0) throw std::invalid_argument("label smoothing needs at least two classes");
  const double q_gold = 1.0 - epsilon;
  const double q_other = vocab > 1 ? epsilon / static_cast<double>(vocab - 1) : 0.0;

  std::vector<double> probs(logits.numel());
  kernels::softmax_rows(logits.data().data(), probs.data(), rows, vocab);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t == ignore_index) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw std::out_of_range("target " + std::to_string(t) + " outside vocabulary of " + std::to_string(vocab));
    }
    const double* z = logits.data().data() + r * vocab;
    const double peak = *std::max_element(z, z + vocab);
    double lse = 0.0;
    for (std::size_t c = 0; c < vocab; ++c) lse += std::exp(z[c] - peak);
    lse = peak + std::log(lse);
    double row_loss = 0.0;
    for (std::size_t c = 0; c < vocab; ++c) {
      const double q = static_cast<std::size_t>(t) == c ? q_gold : q_other;
      if (q != 0.0) row_loss -= q * (z[c] - lse);
    }
    total += row_loss;
    ++counted;
  }
  Tensor out = Tensor::scalar(counted ? total / static_cast<double>(counted) : 0.0);
  if (counted && tracking({&logits})) {
    ImplPtr li = logits.shared_impl(), oi = out.shared_impl();
    std::vector<int> tgt(targets.begin(), targets.end());
    record({logits}, out,
           [li, oi, probs = std::move(probs), tgt = std::move(tgt), vocab, q_gold, q_other, counted, ignore_index] {
             auto& gl = li->grad_buffer();
             const double factor = oi->grad[0] / static_cast<double>(counted);
             for (std::size_t r = 0; r < tgt.size(); ++r) {
               if (tgt[r] == ignore_index) continue;
               for (std::size_t c = 0; c < vocab; ++c) {
                 const double q = static_cast<std::size_t>(tgt[r]) == c ? q_gold : q_other;
                 gl[r * vocab + c] += factor * (probs[r * vocab + c] - q);
               }
             }
           });
  }
  return out;
}

Tensor embedding(const Tensor& table, std::span<const int> ids, const Shape& index_shape) {
  if (table.rank() != 2) throw DimensionError("embedding table must be 2-D, got " + shape_string(table.shape()));
  if (shape_numel(index_shape) != ids.size()) {
    throw DimensionError("embedding: " + std::to_string(ids.size()) + " ids for index shape " +
                         shape_string(index_shape));
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> values(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw std::out_of_range("token id " + std::to_string(ids[i]) + " outside vocabulary of " +
                              std::to_string(vocab));
    }
    std::copy_n(table.data().data() + static_cast<std::size_t>(ids[i]) * d, d, values.data() + i * d);
  }
  Shape shape = index_shape;
  shape.push_back(d);
  Tensor out(std::move(shape), std::move(values));
  if (tracking({&table})) {
    ImplPtr ti = table.shared_impl(), oi = out.shared_impl();
    std::vector<int> idx(ids.begin(), ids.end());
    record({table}, out, [ti, oi, idx = std::move(idx), d] {
      auto& gt = ti->grad_buffer();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::size_t row = static_cast<std::size_t>(idx[i]) * d;
        for (std::size_t j = 0; j < d; ++j) gt[row + j] += oi->grad[i * d + j];
      }
    });
  }
  return out;
}

}  // namespace delight
