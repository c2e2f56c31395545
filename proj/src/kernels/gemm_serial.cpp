// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "delight/kernels/gemm.hpp"

namespace delight::kernels::serial {

namespace {
inline double element(const MatrixRef& ref, std::size_t row, std::size_t col) {
  return ref.transposed ? ref.data[col * ref.ld + row] : ref.data[row * ref.ld + col];
}
}  // namespace

void gemm(const GemmArgs& args) {
  for (std::size_t i = 0; i < args.m; ++i) {
    for (std::size_t j = 0; j < args.n; ++j) {
      double sum = 0.0;
      for (std::size_t p = 0; p < args.k; ++p) {
        sum += element(args.a, i, p) * element(args.b, p, j);
      }
      double& out = args.c[i * args.c_ld + j];
      out = args.accumulate ? out + sum : sum;
    }
  }
}

void softmax_rows(const double* in, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * cols;
    double* y = out + r * cols;
    const double peak = *std::max_element(x, x + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - peak);
      total += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= total;
  }
}

}  // namespace delight::kernels::serial
