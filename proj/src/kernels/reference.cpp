// src/kernels/reference.cpp

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

// Straightforward serial kernels. The backward-input kernel gathers per input
// element instead of scattering, so it is an independent route from the
// parallel implementation.

#include <cstddef>

#include "consep/kernels.hpp"

namespace consep::kernels::reference {

namespace {

inline std::size_t at4(int a, int b, int c, int d, int nb, int nc, int nd) {
  return ((static_cast<std::size_t>(a) * nb + b) * nc + c) * nd + d;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> weight, std::span<double> output) {
  g.validate();
  const int oh_n = g.out_h(), ow_n = g.out_w();
  for (int n = 0; n < g.batch; ++n)
    for (int co = 0; co < g.out_channels; ++co)
      for (int oh = 0; oh < oh_n; ++oh)
        for (int ow = 0; ow < ow_n; ++ow) {
          double acc = 0.0;
          for (int ci = 0; ci < g.in_channels; ++ci)
            for (int kh = 0; kh < g.kernel_h; ++kh)
              for (int kw = 0; kw < g.kernel_w; ++kw) {
                const int ih = oh * g.stride_h - g.pad_h + kh;
                const int iw = ow * g.stride_w - g.pad_w + kw;
                if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
                acc += weight[at4(co, ci, kh, kw, g.in_channels, g.kernel_h, g.kernel_w)] *
                       input[at4(n, ci, ih, iw, g.in_channels, g.in_h, g.in_w)];
              }
          output[at4(n, co, oh, ow, g.out_channels, oh_n, ow_n)] = acc;
        }
}

void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in) {
  g.validate();
  const int oh_n = g.out_h(), ow_n = g.out_w();
  for (int n = 0; n < g.batch; ++n)
    for (int ci = 0; ci < g.in_channels; ++ci)
      for (int ih = 0; ih < g.in_h; ++ih)
        for (int iw = 0; iw < g.in_w; ++iw) {
          double acc = 0.0;
          for (int co = 0; co < g.out_channels; ++co)
            for (int kh = 0; kh < g.kernel_h; ++kh)
              for (int kw = 0; kw < g.kernel_w; ++kw) {
                const int th = ih + g.pad_h - kh;
                const int tw = iw + g.pad_w - kw;
                if (th < 0 || tw < 0 || th % g.stride_h || tw % g.stride_w) continue;
                const int oh = th / g.stride_h, ow = tw / g.stride_w;
                if (oh >= oh_n || ow >= ow_n) continue;
                acc += weight[at4(co, ci, kh, kw, g.in_channels, g.kernel_h, g.kernel_w)] *
                       grad_out[at4(n, co, oh, ow, g.out_channels, oh_n, ow_n)];
              }
          grad_in[at4(n, ci, ih, iw, g.in_channels, g.in_h, g.in_w)] = acc;
        }
}

void conv2d_backward_weight(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_out, std::span<double> grad_weight) {
  g.validate();
  const int oh_n = g.out_h(), ow_n = g.out_w();
  for (int co = 0; co < g.out_channels; ++co)
    for (int ci = 0; ci < g.in_channels; ++ci)
      for (int kh = 0; kh < g.kernel_h; ++kh)
        for (int kw = 0; kw < g.kernel_w; ++kw) {
          double acc = 0.0;
          for (int n = 0; n < g.batch; ++n)
            for (int oh = 0; oh < oh_n; ++oh)
              for (int ow = 0; ow < ow_n; ++ow) {
                const int ih = oh * g.stride_h - g.pad_h + kh;
                const int iw = ow * g.stride_w - g.pad_w + kw;
                if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
                acc += grad_out[at4(n, co, oh, ow, g.out_channels, oh_n, ow_n)] *
                       input[at4(n, ci, ih, iw, g.in_channels, g.in_h, g.in_w)];
              }
          grad_weight[at4(co, ci, kh, kw, g.in_channels, g.kernel_h, g.kernel_w)] = acc;
        }
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, std::span<const double> a,
          std::span<const double> b, std::span<double> c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        const double av = trans_a ? a[static_cast<std::size_t>(p) * m + i]
                                  : a[static_cast<std::size_t>(i) * k + p];
        const double bv = trans_b ? b[static_cast<std::size_t>(j) * k + p]
                                  : b[static_cast<std::size_t>(p) * n + j];
        acc += av * bv;
      }
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
}

}  // namespace consep::kernels::reference
