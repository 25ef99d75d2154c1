// include/consep/ad/ops.hpp

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

#ifndef CONSEP_AD_OPS_HPP_
#define CONSEP_AD_OPS_HPP_

#include <vector>

#include "consep/ad/tensor.hpp"

namespace consep::ad {

// Elementwise. Binary ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
/// log(x + eps); throws NumericalError if any x + eps <= 0.
Tensor log_eps(const Tensor& x, double eps);

// Reductions to a scalar.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Layout.
Tensor reshape(const Tensor& x, Shape shape);
Tensor concat(const std::vector<Tensor>& xs, int axis);
/// Rows [begin, begin + count) along axis 0.
Tensor slice_rows(const Tensor& x, int begin, int count);

// Dense layers.
Tensor matmul(const Tensor& a, const Tensor& b);
/// x[N,in] * w[out,in]^T + b[out]. `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// NCHW convolution, weight [Co,Ci,k,k], optional bias [Co].
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);
/// Adjoint of conv2d, weight [Ci,Co,k,k]. Output side (H-1)*stride - 2*pad + k.
Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);
/// NCL convolution, weight [Co,Ci,k].
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

enum class NormMode {
  kTrain,   // batch statistics, running statistics updated
  kEval,    // running statistics, affine parameters trainable
  kFrozen,  // running statistics, affine parameters held constant
};

struct BatchNormStats {
  Array running_mean;
  Array running_var;
};

/// Per-channel normalisation over every axis except 1.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormStats& stats,
                  NormMode mode, double momentum = 0.1, double eps = 1e-5);

// Pooling.
Tensor max_pool2d(const Tensor& x, int kernel, int stride);
/// [N,C,...] -> [N,C]
Tensor global_max_pool(const Tensor& x);
Tensor global_avg_pool(const Tensor& x);

/// Row-wise x / sqrt(|x|^2 + 1e-12) for x[N,D].
Tensor l2_normalize(const Tensor& x);

/// out[n,0,h,w] = sum_c weights[n,c] * feat[n,c,h,w].
Tensor channel_weighted_sum(const Tensor& feat, const Tensor& weights);

/// Row-wise Euclidean distance |a-b| for a,b [N,D] -> [N]. The backward pass
/// divides by max(|a-b|, 1e-6).
Tensor row_distance(const Tensor& a, const Tensor& b);

/// Mean per-pixel binary cross-entropy with predictions clamped to [eps, 1-eps].
Tensor bce_loss(const Tensor& pred, const Array& target, double eps = 1e-7);

}  // namespace consep::ad

#endif  // CONSEP_AD_OPS_HPP_
