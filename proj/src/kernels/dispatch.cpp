// src/kernels/dispatch.cpp

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

#include <atomic>
#include <string>

#include "consep/error.hpp"
#include "consep/kernels.hpp"

namespace consep::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::kParallel};
}  // namespace

void ConvGeometry::validate() const {
  if (batch <= 0 || in_channels <= 0 || in_h <= 0 || in_w <= 0 || out_channels <= 0 ||
      kernel_h <= 0 || kernel_w <= 0 || stride_h <= 0 || stride_w <= 0 || pad_h < 0 || pad_w < 0)
    throw ValidationError("conv: invalid geometry");
  if (in_h + 2 * pad_h < kernel_h || in_w + 2 * pad_w < kernel_w)
    throw ValidationError("conv: kernel " + std::to_string(kernel_h) + "x" + std::to_string(kernel_w) +
                          " larger than padded input " + std::to_string(in_h) + "x" +
                          std::to_string(in_w));
}

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> weight, std::span<double> output) {
  if (backend() == Backend::kReference) return reference::conv2d_forward(g, input, weight, output);
  parallel::conv2d_forward(g, input, weight, output);
}

void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in) {
  if (backend() == Backend::kReference)
    return reference::conv2d_backward_input(g, grad_out, weight, grad_in);
  parallel::conv2d_backward_input(g, grad_out, weight, grad_in);
}

void conv2d_backward_weight(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_out, std::span<double> grad_weight) {
  if (backend() == Backend::kReference)
    return reference::conv2d_backward_weight(g, input, grad_out, grad_weight);
  parallel::conv2d_backward_weight(g, input, grad_out, grad_weight);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, std::span<const double> a,
          std::span<const double> b, std::span<double> c) {
  if (backend() == Backend::kReference) return reference::gemm(trans_a, trans_b, m, n, k, a, b, c);
  parallel::gemm(trans_a, trans_b, m, n, k, a, b, c);
}

}  // namespace consep::kernels
