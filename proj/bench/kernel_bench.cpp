// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against the OpenMP ones.
//   ./kernel_bench --benchmark_filter=Gemm

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "delight/kernels/gemm.hpp"

namespace {

using namespace delight::kernels;

std::vector<double> filled(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <void (*Gemm)(const GemmArgs&)>
void BM_Gemm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0)), n = static_cast<std::size_t>(state.range(1)),
             k = static_cast<std::size_t>(state.range(2));
  const bool trans_b = state.range(3) != 0;
  const auto a = filled(m * k, 1), b = filled(k * n, 2);
  std::vector<double> c(m * n);
  const GemmArgs args{m, n, k, {a.data(), k}, {b.data(), trans_b ? k : n, trans_b}, c.data(), n};
  for (auto _ : state) {
    Gemm(args);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.counters["GFLOP/s"] =
      benchmark::Counter(2.0 * static_cast<double>(m * n * k), benchmark::Counter::kIsIterationInvariantRate,
                         benchmark::Counter::kIs1000);
}

// Shapes seen in training: [batch*tokens, d] x [d, d'], attention scores, classifier.
void gemm_shapes(benchmark::internal::Benchmark* b) {
  b->ArgNames({"m", "n", "k", "tB"});
  b->Args({1024, 64, 64, 0});
  b->Args({1024, 128, 64, 0});
  b->Args({32, 32, 32, 1});
  b->Args({1024, 80, 64, 1});
  b->Args({256, 256, 256, 0});
}

BENCHMARK(BM_Gemm<serial::gemm>)->Name("Gemm/serial")->Apply(gemm_shapes);
BENCHMARK(BM_Gemm<parallel::gemm>)->Name("Gemm/parallel")->Apply(gemm_shapes);

template <void (*Softmax)(const double*, double*, std::size_t, std::size_t)>
void BM_Softmax(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0)), cols = static_cast<std::size_t>(state.range(1));
  const auto in = filled(rows * cols, 3);
  std::vector<double> out(rows * cols);
  for (auto _ : state) {
    Softmax(in.data(), out.data(), rows, cols);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows * cols));
}

BENCHMARK(BM_Softmax<serial::softmax_rows>)->Name("Softmax/serial")->Args({1024, 32})->Args({1024, 80});
BENCHMARK(BM_Softmax<parallel::softmax_rows>)->Name("Softmax/parallel")->Args({1024, 32})->Args({1024, 80});

}  // namespace

BENCHMARK_MAIN();
