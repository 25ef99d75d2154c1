// bench/bench_kernels.cpp

// Copyright 2026 The consep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "consep/kernels.hpp"

namespace {

using consep::kernels::ConvGeometry;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Shapes from the audio U-Net and consistency net at grid 64.
ConvGeometry geometry(int which) {
  ConvGeometry g;
  g.batch = 8;
  g.kernel_h = g.kernel_w = 4;
  g.stride_h = g.stride_w = 2;
  g.pad_h = g.pad_w = 1;
  switch (which) {
    case 0: g.in_channels = 1; g.out_channels = 8; g.in_h = g.in_w = 64; break;
    case 1: g.in_channels = 16; g.out_channels = 32; g.in_h = g.in_w = 16; break;
    default:
      g.in_channels = g.out_channels = 16;
      g.in_h = g.in_w = 16;
      g.kernel_h = g.kernel_w = 3;
      g.stride_h = g.stride_w = 1;
      break;
  }
  return g;
}

struct ConvBuffers {
  ConvGeometry g;
  std::vector<double> in, w, out;
  explicit ConvBuffers(int which) : g(geometry(which)) {
    in = random_vector(static_cast<std::size_t>(g.batch) * g.in_channels * g.in_h * g.in_w, 1);
    w = random_vector(static_cast<std::size_t>(g.out_channels) * g.in_channels * g.kernel_h * g.kernel_w, 2);
    out = random_vector(static_cast<std::size_t>(g.batch) * g.out_channels * g.out_h() * g.out_w(), 3);
  }
};

template <bool kParallel>
void BM_ConvForward(benchmark::State& state) {
  ConvBuffers b(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if (kParallel) consep::kernels::parallel::conv2d_forward(b.g, b.in, b.w, b.out);
    else consep::kernels::reference::conv2d_forward(b.g, b.in, b.w, b.out);
    benchmark::DoNotOptimize(b.out.data());
  }
}

template <bool kParallel>
void BM_ConvBackwardInput(benchmark::State& state) {
  ConvBuffers b(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if (kParallel) consep::kernels::parallel::conv2d_backward_input(b.g, b.out, b.w, b.in);
    else consep::kernels::reference::conv2d_backward_input(b.g, b.out, b.w, b.in);
    benchmark::DoNotOptimize(b.in.data());
  }
}

template <bool kParallel>
void BM_ConvBackwardWeight(benchmark::State& state) {
  ConvBuffers b(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if (kParallel) consep::kernels::parallel::conv2d_backward_weight(b.g, b.in, b.out, b.w);
    else consep::kernels::reference::conv2d_backward_weight(b.g, b.in, b.out, b.w);
    benchmark::DoNotOptimize(b.w.data());
  }
}

template <bool kParallel>
void BM_Gemm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_vector(static_cast<std::size_t>(n) * n, 4), bm = random_vector(static_cast<std::size_t>(n) * n, 5);
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (auto _ : state) {
    if (kParallel) consep::kernels::parallel::gemm(false, true, n, n, n, a, bm, c);
    else consep::kernels::reference::gemm(false, true, n, n, n, a, bm, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

BENCHMARK(BM_ConvForward<false>)->Name("conv2d_forward/reference")->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv2d_forward/parallel")->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvBackwardInput<false>)->Name("conv2d_backward_input/reference")->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvBackwardInput<true>)->Name("conv2d_backward_input/parallel")->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvBackwardWeight<false>)->Name("conv2d_backward_weight/reference")->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConvBackwardWeight<true>)->Name("conv2d_backward_weight/parallel")->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Gemm<false>)->Name("gemm/reference")->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
