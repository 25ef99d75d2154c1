// src/kernels/parallel.cpp

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

// Lowered convolutions: each batch element is unfolded into a column matrix
// (im2col) and handed to Eigen's GEMM. Work is split over batch elements and
// Eigen's own threading is disabled, so results do not depend on the thread
// count. Weight gradients are summed over the batch in a fixed order.

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "consep/kernels.hpp"

namespace consep::kernels::parallel {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

// cols[(ci*kh + i)*kw + j, oh*out_w + ow] = input[ci, oh*s - p + i, ow*s - p + j] (0 outside).
void im2col(const ConvGeometry& g, const double* in, double* cols) {
  const int oh_n = g.out_h(), ow_n = g.out_w();
  const std::size_t out_plane = static_cast<std::size_t>(oh_n) * ow_n;
  for (int ci = 0; ci < g.in_channels; ++ci) {
    const double* plane = in + static_cast<std::size_t>(ci) * g.in_h * g.in_w;
    for (int kh = 0; kh < g.kernel_h; ++kh)
      for (int kw = 0; kw < g.kernel_w; ++kw) {
        double* row = cols + ((static_cast<std::size_t>(ci) * g.kernel_h + kh) * g.kernel_w + kw) * out_plane;
        for (int oh = 0; oh < oh_n; ++oh) {
          const int ih = oh * g.stride_h - g.pad_h + kh;
          double* dst = row + static_cast<std::size_t>(oh) * ow_n;
          if (ih < 0 || ih >= g.in_h) {
            std::fill(dst, dst + ow_n, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(ih) * g.in_w;
          for (int ow = 0; ow < ow_n; ++ow) {
            const int iw = ow * g.stride_w - g.pad_w + kw;
            dst[ow] = (iw >= 0 && iw < g.in_w) ? src[iw] : 0.0;
          }
        }
      }
  }
}

// Adjoint of im2col: scatter-add columns back into an input-shaped buffer.
void col2im(const ConvGeometry& g, const double* cols, double* in) {
  const int oh_n = g.out_h(), ow_n = g.out_w();
  const std::size_t out_plane = static_cast<std::size_t>(oh_n) * ow_n;
  std::fill(in, in + static_cast<std::size_t>(g.in_channels) * g.in_h * g.in_w, 0.0);
  for (int ci = 0; ci < g.in_channels; ++ci) {
    double* plane = in + static_cast<std::size_t>(ci) * g.in_h * g.in_w;
    for (int kh = 0; kh < g.kernel_h; ++kh)
      for (int kw = 0; kw < g.kernel_w; ++kw) {
        const double* row =
            cols + ((static_cast<std::size_t>(ci) * g.kernel_h + kh) * g.kernel_w + kw) * out_plane;
        for (int oh = 0; oh < oh_n; ++oh) {
          const int ih = oh * g.stride_h - g.pad_h + kh;
          if (ih < 0 || ih >= g.in_h) continue;
          const double* src = row + static_cast<std::size_t>(oh) * ow_n;
          double* dst = plane + static_cast<std::size_t>(ih) * g.in_w;
          for (int ow = 0; ow < ow_n; ++ow) {
            const int iw = ow * g.stride_w - g.pad_w + kw;
            if (iw >= 0 && iw < g.in_w) dst[iw] += src[ow];
          }
        }
      }
  }
}

struct Dims {
  int k;            // ci * kh * kw
  int p;            // out_h * out_w
  std::size_t in;   // per-element input size
  std::size_t out;  // per-element output size
};

Dims dims(const ConvGeometry& g) {
  Dims d;
  d.k = g.in_channels * g.kernel_h * g.kernel_w;
  d.p = g.out_h() * g.out_w();
  d.in = static_cast<std::size_t>(g.in_channels) * g.in_h * g.in_w;
  d.out = static_cast<std::size_t>(g.out_channels) * d.p;
  return d;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> weight, std::span<double> output) {
  g.validate();
  const Dims d = dims(g);
  ConstMap w(weight.data(), g.out_channels, d.k);

#pragma omp parallel
  {
    std::vector<double> cols(static_cast<std::size_t>(d.k) * d.p);
#pragma omp for schedule(static)
    for (int n = 0; n < g.batch; ++n) {
      im2col(g, input.data() + n * d.in, cols.data());
      Map out(output.data() + n * d.out, g.out_channels, d.p);
      out.noalias() = w * ConstMap(cols.data(), d.k, d.p);
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_out,
                           std::span<const double> weight, std::span<double> grad_in) {
  g.validate();
  const Dims d = dims(g);
  ConstMap w(weight.data(), g.out_channels, d.k);

#pragma omp parallel
  {
    std::vector<double> cols(static_cast<std::size_t>(d.k) * d.p);
#pragma omp for schedule(static)
    for (int n = 0; n < g.batch; ++n) {
      Map c(cols.data(), d.k, d.p);
      c.noalias() = w.transpose() * ConstMap(grad_out.data() + n * d.out, g.out_channels, d.p);
      col2im(g, cols.data(), grad_in.data() + n * d.in);
    }
  }
}

void conv2d_backward_weight(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_out, std::span<double> grad_weight) {
  g.validate();
  const Dims d = dims(g);
  const std::size_t wsize = static_cast<std::size_t>(g.out_channels) * d.k;
  std::vector<double> partial(wsize * g.batch);

#pragma omp parallel
  {
    std::vector<double> cols(static_cast<std::size_t>(d.k) * d.p);
#pragma omp for schedule(static)
    for (int n = 0; n < g.batch; ++n) {
      im2col(g, input.data() + n * d.in, cols.data());
      Map gw(partial.data() + n * wsize, g.out_channels, d.k);
      gw.noalias() = ConstMap(grad_out.data() + n * d.out, g.out_channels, d.p) *
                     ConstMap(cols.data(), d.k, d.p).transpose();
    }
  }
  std::copy(partial.begin(), partial.begin() + wsize, grad_weight.begin());
  for (int n = 1; n < g.batch; ++n) {
    const double* src = partial.data() + n * wsize;
    for (std::size_t i = 0; i < wsize; ++i) grad_weight[i] += src[i];
  }
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, std::span<const double> a,
          std::span<const double> b, std::span<double> c) {
  // Dense layers here are small; one product keeps the blocking fixed.
  Map out(c.data(), m, n);
  if (trans_a) {
    ConstMap at(a.data(), k, m);
    if (trans_b) out.noalias() = at.transpose() * ConstMap(b.data(), n, k).transpose();
    else out.noalias() = at.transpose() * ConstMap(b.data(), k, n);
  } else {
    ConstMap am(a.data(), m, k);
    if (trans_b) out.noalias() = am * ConstMap(b.data(), n, k).transpose();
    else out.noalias() = am * ConstMap(b.data(), k, n);
  }
}

}  // namespace consep::kernels::parallel
