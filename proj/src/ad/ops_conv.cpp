// src/ad/ops_conv.cpp

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

#include <cmath>
#include <string>

#include "consep/ad/ops.hpp"
#include "consep/error.hpp"
#include "consep/kernels.hpp"

namespace consep::ad {

namespace {

void add_bias(Array& out, const Array& bias, int n, int c) {
  const std::size_t plane = out.size() / (static_cast<std::size_t>(n) * c);
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) {
      double* p = out.data().data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      for (std::size_t k = 0; k < plane; ++k) p[k] += bias[ch];
    }
}

void bias_grad(Node& b, const Array& g, int n, int c) {
  if (!b.requires_grad) return;
  const std::size_t plane = g.size() / (static_cast<std::size_t>(n) * c);
  Array& gb = grad_buffer(b);
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const double* p = g.data().data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      double acc = 0.0;
      for (std::size_t k = 0; k < plane; ++k) acc += p[k];
      gb[ch] += acc;
    }
}

void check_bias(const char* op, const Tensor& b, int channels) {
  if (b.defined() && (b.value().rank() != 1 || b.dim(0) != channels))
    throw ValidationError(std::string(op) + ": bias " + to_string(b.shape()) + " does not match " +
                          std::to_string(channels) + " output channels");
}

Tensor conv2d_impl(const char* op, const Tensor& x, const Tensor& w, const Tensor& b, int stride_h,
                   int stride_w, int pad_h, int pad_w) {
  if (x.value().rank() != 4 || w.value().rank() != 4)
    throw ValidationError(std::string(op) + ": expected 4-d input and weight, got " + to_string(x.shape()) +
                          " and " + to_string(w.shape()));
  if (x.dim(1) != w.dim(1))
    throw ValidationError(std::string(op) + ": input " + to_string(x.shape()) + " has " +
                          std::to_string(x.dim(1)) + " channels but weight " + to_string(w.shape()) +
                          " expects " + std::to_string(w.dim(1)));
  kernels::ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3),
                          stride_h, stride_w, pad_h, pad_w};
  g.validate();
  check_bias(op, b, g.out_channels);
  Array out({g.batch, g.out_channels, g.out_h(), g.out_w()});
  kernels::conv2d_forward(g, x.value().data(), w.value().data(), out.data());
  if (b.defined()) add_bias(out, b.value(), g.batch, g.out_channels);

  Node* px = x.node().get();
  Node* pw = w.node().get();
  Node* pb = b.defined() ? b.node().get() : nullptr;
  std::vector<Tensor> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_result(std::move(out), parents, [g, px, pw, pb](const Array& grad) {
    if (px->requires_grad) {
      Array gx(px->value.shape());
      kernels::conv2d_backward_input(g, grad.data(), pw->value.data(), gx.data());
      accumulate(*px, gx);
    }
    if (pw->requires_grad) {
      Array gw(pw->value.shape());
      kernels::conv2d_backward_weight(g, px->value.data(), grad.data(), gw.data());
      accumulate(*pw, gw);
    }
    if (pb) bias_grad(*pb, grad, g.batch, g.out_channels);
  });
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  return conv2d_impl("conv2d", x, w, b, stride, stride, pad, pad);
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  if (x.value().rank() != 3 || w.value().rank() != 3)
    throw ValidationError("conv1d: expected 3-d input and weight, got " + to_string(x.shape()) + " and " +
                          to_string(w.shape()));
  Tensor x4 = reshape(x, {x.dim(0), x.dim(1), 1, x.dim(2)});
  Tensor w4 = reshape(w, {w.dim(0), w.dim(1), 1, w.dim(2)});
  Tensor y = conv2d_impl("conv1d", x4, w4, b, 1, stride, 0, pad);
  return reshape(y, {y.dim(0), y.dim(1), y.dim(3)});
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  if (x.value().rank() != 4 || w.value().rank() != 4)
    throw ValidationError("conv_transpose2d: expected 4-d input and weight, got " + to_string(x.shape()) +
                          " and " + to_string(w.shape()));
  if (x.dim(1) != w.dim(0))
    throw ValidationError("conv_transpose2d: input " + to_string(x.shape()) + " incompatible with weight " +
                          to_string(w.shape()));
  const int out_h = (x.dim(2) - 1) * stride - 2 * pad + w.dim(2);
  const int out_w = (x.dim(3) - 1) * stride - 2 * pad + w.dim(3);
  if (out_h <= 0 || out_w <= 0)
    throw ValidationError("conv_transpose2d: empty output for input " + to_string(x.shape()));
  // The transposed conv is the input-gradient of the conv mapping the output
  // back onto x.
  kernels::ConvGeometry g{x.dim(0), w.dim(1), out_h, out_w, w.dim(0), w.dim(2), w.dim(3), stride, stride, pad, pad};
  g.validate();
  if (g.out_h() != x.dim(2) || g.out_w() != x.dim(3))
    throw ValidationError("conv_transpose2d: inconsistent geometry for input " + to_string(x.shape()));
  check_bias("conv_transpose2d", b, g.in_channels);
  Array out({g.batch, g.in_channels, out_h, out_w});
  kernels::conv2d_backward_input(g, x.value().data(), w.value().data(), out.data());
  if (b.defined()) add_bias(out, b.value(), g.batch, g.in_channels);

  Node* px = x.node().get();
  Node* pw = w.node().get();
  Node* pb = b.defined() ? b.node().get() : nullptr;
  std::vector<Tensor> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_result(std::move(out), parents, [g, px, pw, pb](const Array& grad) {
    if (px->requires_grad) {
      Array gx(px->value.shape());
      kernels::conv2d_forward(g, grad.data(), pw->value.data(), gx.data());
      accumulate(*px, gx);
    }
    if (pw->requires_grad) {
      Array gw(pw->value.shape());
      kernels::conv2d_backward_weight(g, grad.data(), px->value.data(), gw.data());
      accumulate(*pw, gw);
    }
    if (pb) bias_grad(*pb, grad, g.batch, g.in_channels);
  });
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormStats& stats,
                  NormMode mode, double momentum, double eps) {
  if (x.value().rank() < 2)
    throw ValidationError("batch_norm: expected [N,C,...], got " + to_string(x.shape()));
  const int n = x.dim(0), c = x.dim(1);
  if (gamma.size() != static_cast<std::size_t>(c) || beta.size() != static_cast<std::size_t>(c) ||
      stats.running_mean.size() != static_cast<std::size_t>(c) ||
      stats.running_var.size() != static_cast<std::size_t>(c))
    throw ValidationError("batch_norm: parameters do not match " + std::to_string(c) + " channels of " +
                          to_string(x.shape()));
  const std::size_t spatial = x.size() / (static_cast<std::size_t>(n) * c);
  const std::size_t count = spatial * static_cast<std::size_t>(n);
  auto at = [c, spatial](int i, int ch, std::size_t k) {
    return (static_cast<std::size_t>(i) * c + ch) * spatial + k;
  };

  auto mu = std::make_shared<std::vector<double>>(c);
  auto inv_std = std::make_shared<std::vector<double>>(c);
  if (mode == NormMode::kTrain) {
    if (count < 2)
      throw ValidationError("batch_norm: training mode needs more than one value per channel, got " +
                            to_string(x.shape()));
    for (int ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < spatial; ++k) s += x.value()[at(i, ch, k)];
      const double m = s / static_cast<double>(count);
      double ss = 0.0;
      for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < spatial; ++k) {
          const double d = x.value()[at(i, ch, k)] - m;
          ss += d * d;
        }
      const double var = ss / static_cast<double>(count);
      (*mu)[ch] = m;
      (*inv_std)[ch] = 1.0 / std::sqrt(var + eps);
      stats.running_mean[ch] = (1.0 - momentum) * stats.running_mean[ch] + momentum * m;
      stats.running_var[ch] = (1.0 - momentum) * stats.running_var[ch] +
                              momentum * ss / static_cast<double>(count - 1);
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      (*mu)[ch] = stats.running_mean[ch];
      (*inv_std)[ch] = 1.0 / std::sqrt(stats.running_var[ch] + eps);
    }
  }

  Array out(x.shape());
  auto xhat = std::make_shared<Array>(x.shape());
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (std::size_t k = 0; k < spatial; ++k) {
        const std::size_t idx = at(i, ch, k);
        const double h = (x.value()[idx] - (*mu)[ch]) * (*inv_std)[ch];
        (*xhat)[idx] = h;
        out[idx] = gamma.value()[ch] * h + beta.value()[ch];
      }

  // Owning: in frozen mode gamma is not a graph parent but its value is read here.
  NodePtr px = x.node();
  NodePtr pg = gamma.node();
  NodePtr pb = beta.node();
  const bool affine_trainable = mode != NormMode::kFrozen;
  std::vector<Tensor> parents{x};
  if (affine_trainable) {
    parents.push_back(gamma);
    parents.push_back(beta);
  }
  return make_result(std::move(out), parents,
                     [=](const Array& g) {
                       std::vector<double> sum_g(c, 0.0), sum_gh(c, 0.0);
                       for (int i = 0; i < n; ++i)
                         for (int ch = 0; ch < c; ++ch)
                           for (std::size_t k = 0; k < spatial; ++k) {
                             const std::size_t idx = at(i, ch, k);
                             sum_g[ch] += g[idx];
                             sum_gh[ch] += g[idx] * (*xhat)[idx];
                           }
                       if (affine_trainable) {
                         if (pg->requires_grad) {
                           Array& gg = grad_buffer(*pg);
                           for (int ch = 0; ch < c; ++ch) gg[ch] += sum_gh[ch];
                         }
                         if (pb->requires_grad) {
                           Array& gb = grad_buffer(*pb);
                           for (int ch = 0; ch < c; ++ch) gb[ch] += sum_g[ch];
                         }
                       }
                       if (!px->requires_grad) return;
                       Array& gx = grad_buffer(*px);
                       const double inv_count = 1.0 / static_cast<double>(count);
                       for (int i = 0; i < n; ++i)
                         for (int ch = 0; ch < c; ++ch) {
                           const double scale = pg->value[ch] * (*inv_std)[ch];
                           for (std::size_t k = 0; k < spatial; ++k) {
                             const std::size_t idx = at(i, ch, k);
                             if (mode == NormMode::kTrain) {
                               gx[idx] += scale * (g[idx] - sum_g[ch] * inv_count -
                                                   (*xhat)[idx] * sum_gh[ch] * inv_count);
                             } else {
                               gx[idx] += scale * g[idx];
                             }
                           }
                         }
                     });
}

}  // namespace consep::ad
