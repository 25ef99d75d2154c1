// include/consep/kernels.hpp

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

#ifndef CONSEP_KERNELS_HPP_
#define CONSEP_KERNELS_HPP_

// Dense compute kernels behind the autodiff engine. Every kernel exists twice:
// a plain serial reference (kept for testing) and an OpenMP version that the
// engine runs by default. The parallel versions split work over independent
// output elements only, so their results do not depend on the thread count.

#include <span>

namespace consep::kernels {

struct ConvGeometry {
  int batch = 1;
  int in_channels = 1;
  int in_h = 1;
  int in_w = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;

  int out_h() const { return (in_h + 2 * pad_h - kernel_h) / stride_h + 1; }
  int out_w() const { return (in_w + 2 * pad_w - kernel_w) / stride_w + 1; }
  /// Throws ValidationError on non-positive sizes or an empty output.
  void validate() const;
};

enum class Backend { kReference, kParallel };

/// Process-wide backend used by the dispatching entry points below.
void set_backend(Backend b);
Backend backend();

// Weight layout is [out_channels, in_channels, kernel_h, kernel_w]; tensors are
// NCHW. All outputs are overwritten. gemm computes C[m,n] = op(A)[m,k] * op(B)[k,n]
// where A is stored k x m when trans_a and B is stored n x k when trans_b.

namespace reference {
void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> weight, std::span<double> output);
void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in);
void conv2d_backward_weight(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_out, std::span<double> grad_weight);
void gemm(bool trans_a, bool trans_b, int m, int n, int k, std::span<const double> a,
          std::span<const double> b, std::span<double> c);
}  // namespace reference

namespace parallel {
void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> weight, std::span<double> output);
void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in);
void conv2d_backward_weight(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_out, std::span<double> grad_weight);
void gemm(bool trans_a, bool trans_b, int m, int n, int k, std::span<const double> a,
          std::span<const double> b, std::span<double> c);
}  // namespace parallel

// Dispatch on backend().
void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> weight, std::span<double> output);
void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in);
void conv2d_backward_weight(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_out, std::span<double> grad_weight);
void gemm(bool trans_a, bool trans_b, int m, int n, int k, std::span<const double> a,
          std::span<const double> b, std::span<double> c);

}  // namespace consep::kernels

#endif  // CONSEP_KERNELS_HPP_
