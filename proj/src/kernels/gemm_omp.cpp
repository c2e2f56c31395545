// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "delight/kernels/gemm.hpp"

namespace delight::kernels::parallel {

namespace {

constexpr std::size_t kParallelThreshold = 1u << 15;
constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 16;

inline double a_at(const GemmArgs& g, std::size_t i, std::size_t p) {
  return g.a.transposed ? g.a.data[p * g.a.ld + i] : g.a.data[i * g.a.ld + p];
}

// Full kTileRows x kTileCols tile of C held in registers over the whole k loop.
void tile_full(const GemmArgs& g, std::size_t i0, std::size_t j0) {
  double acc[kTileRows][kTileCols] = {};
  for (std::size_t p = 0; p < g.k; ++p) {
    const double* b = g.b.data + p * g.b.ld + j0;
    double a[kTileRows];
    for (std::size_t r = 0; r < kTileRows; ++r) a[r] = a_at(g, i0 + r, p);
    for (std::size_t r = 0; r < kTileRows; ++r) {
#pragma omp simd
      for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] += a[r] * b[j];
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    double* c = g.c + (i0 + r) * g.c_ld + j0;
    for (std::size_t j = 0; j < kTileCols; ++j) c[j] = g.accumulate ? c[j] + acc[r][j] : acc[r][j];
  }
}

// Ragged edge tile.
void tile_edge(const GemmArgs& g, std::size_t i0, std::size_t rows, std::size_t j0, std::size_t cols) {
  double acc[kTileRows][kTileCols] = {};
  for (std::size_t p = 0; p < g.k; ++p) {
    const double* b = g.b.data + p * g.b.ld + j0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = a_at(g, i0 + r, p);
      for (std::size_t j = 0; j < cols; ++j) acc[r][j] += a * b[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double* c = g.c + (i0 + r) * g.c_ld + j0;
    for (std::size_t j = 0; j < cols; ++j) c[j] = g.accumulate ? c[j] + acc[r][j] : acc[r][j];
  }
}

// B not transposed.
void gemm_nn(const GemmArgs& g) {
  const std::size_t row_tiles = (g.m + kTileRows - 1) / kTileRows;
  const std::size_t col_tiles = (g.n + kTileCols - 1) / kTileCols;
  const auto tiles = static_cast<std::int64_t>(row_tiles * col_tiles);
#pragma omp parallel for schedule(static) if (g.m * g.n * g.k > kParallelThreshold)
  for (std::int64_t t = 0; t < tiles; ++t) {
    const std::size_t i0 = static_cast<std::size_t>(t) / col_tiles * kTileRows;
    const std::size_t j0 = static_cast<std::size_t>(t) % col_tiles * kTileCols;
    const std::size_t rows = std::min(kTileRows, g.m - i0), cols = std::min(kTileCols, g.n - j0);
    if (rows == kTileRows && cols == kTileCols) {
      tile_full(g, i0, j0);
    } else {
      tile_edge(g, i0, rows, j0, cols);
    }
  }
}

}  // namespace

void gemm(const GemmArgs& args) {
  if (args.m == 0 || args.n == 0) return;
  if (args.k == 0) {
    if (!args.accumulate) {
      for (std::size_t i = 0; i < args.m; ++i) std::fill_n(args.c + i * args.c_ld, args.n, 0.0);
    }
    return;
  }
  if (!args.b.transposed) {
    gemm_nn(args);
    return;
  }
  // Pack B^T as a row-major [k, n] panel.
  std::vector<double> packed(args.k * args.n);
  for (std::size_t j = 0; j < args.n; ++j) {
    const double* src = args.b.data + j * args.b.ld;
    for (std::size_t p = 0; p < args.k; ++p) packed[p * args.n + j] = src[p];
  }
  GemmArgs nn = args;
  nn.b = {packed.data(), args.n, false};
  gemm_nn(nn);
}

void softmax_rows(const double* in, double* out, std::size_t rows, std::size_t cols) {
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols > kParallelThreshold)
  for (std::int64_t r = 0; r < n; ++r) {
    const double* x = in + r * cols;
    double* y = out + r * cols;
    const double peak = *std::max_element(x, x + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - peak);
      total += y[c];
    }
    const double inv = 1.0 / total;
    for (std::size_t c = 0; c < cols; ++c) y[c] *= inv;
  }
}

}  // namespace delight::kernels::parallel
