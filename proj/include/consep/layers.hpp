// include/consep/layers.hpp

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

#ifndef CONSEP_LAYERS_HPP_
#define CONSEP_LAYERS_HPP_

#include <random>
#include <string>
#include <vector>

#include "consep/ad/ops.hpp"
#include "consep/ad/params.hpp"

namespace consep::nn {

using ad::Tensor;

/// Collects named parameters and buffers from nested layers.
struct Registry {
  std::vector<ad::ParameterRef> params;
  std::vector<ad::BufferRef> buffers;
  std::string group;

  void param(const std::string& name, const Tensor& t, bool norm_affine = false) {
    params.push_back({name, t, group, norm_affine});
  }
  void buffer(const std::string& name, Array* a) { buffers.push_back({name, a}); }
};

// Weights are fan-in scaled uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)); biases zero.

struct Conv2d {
  Tensor weight, bias;  // bias undefined when disabled
  int stride = 1, pad = 0;

  Conv2d() = default;
  Conv2d(int in, int out, int kernel, int stride, int pad, bool with_bias, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const { return ad::conv2d(x, weight, bias, stride, pad); }
  void collect(const std::string& prefix, Registry& r);
};

struct ConvTranspose2d {
  Tensor weight, bias;
  int stride = 1, pad = 0;

  ConvTranspose2d() = default;
  ConvTranspose2d(int in, int out, int kernel, int stride, int pad, bool with_bias, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const { return ad::conv_transpose2d(x, weight, bias, stride, pad); }
  void collect(const std::string& prefix, Registry& r);
};

struct Conv1d {
  Tensor weight, bias;
  int stride = 1, pad = 0;

  Conv1d() = default;
  Conv1d(int in, int out, int kernel, int stride, int pad, bool with_bias, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const { return ad::conv1d(x, weight, bias, stride, pad); }
  void collect(const std::string& prefix, Registry& r);
};

struct Linear {
  Tensor weight, bias;

  Linear() = default;
  Linear(int in, int out, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const { return ad::linear(x, weight, bias); }
  void collect(const std::string& prefix, Registry& r);
};

struct BatchNorm {
  Tensor gamma, beta;
  ad::BatchNormStats stats;

  BatchNorm() = default;
  explicit BatchNorm(int channels);
  Tensor operator()(const Tensor& x, ad::NormMode mode) { return ad::batch_norm(x, gamma, beta, stats, mode); }
  void collect(const std::string& prefix, Registry& r);
};

}  // namespace consep::nn

#endif  // CONSEP_LAYERS_HPP_
