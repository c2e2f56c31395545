// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace delight::kernels {

/// Operand layout for a row-major matrix stored with leading dimension `ld`.
/// When `transposed` is set the logical matrix is the transpose of the stored one.
struct MatrixRef {
  const double* data;
  std::size_t ld;
  bool transposed = false;
};

/// C[m x n] = op(A)[m x k] * op(B)[k x n]   (or += when accumulate is set).
///
/// `c_ld` is the leading dimension of C. All matrices are row-major.
struct GemmArgs {
  std::size_t m, n, k;
  MatrixRef a;
  MatrixRef b;
  double* c;
  std::size_t c_ld;
  bool accumulate = false;
};

namespace serial {
// Triple loop, one dot product per output element. Kept as the oracle for the
// optimized path.
void gemm(const GemmArgs& args);
void softmax_rows(const double* in, double* out, std::size_t rows, std::size_t cols);
}  // namespace serial

namespace parallel {
// Row-parallel (OpenMP) kernel with loop orders chosen per transpose case.
void gemm(const GemmArgs& args);
void softmax_rows(const double* in, double* out, std::size_t rows, std::size_t cols);
}  // namespace parallel

// Dispatch used by the autodiff engine.
inline void gemm(const GemmArgs& args) { parallel::gemm(args); }
inline void softmax_rows(const double* in, double* out, std::size_t rows, std::size_t cols) {
  parallel::softmax_rows(in, out, rows, cols);
}

}  // namespace delight::kernels
