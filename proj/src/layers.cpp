// src/layers.cpp

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

#include "consep/layers.hpp"

#include <cmath>

namespace consep::nn {

namespace {

Tensor uniform_param(Shape shape, double fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Array a(std::move(shape));
  for (auto& v : a.data()) v = dist(rng);
  return Tensor::parameter(std::move(a));
}

Tensor zeros_param(int n) { return Tensor::parameter(Array({n}, 0.0)); }

void collect_weight_bias(const std::string& prefix, Registry& r, const Tensor& w, const Tensor& b) {
  r.param(prefix + ".weight", w);
  if (b.defined()) r.param(prefix + ".bias", b);
}

}  // namespace

Conv2d::Conv2d(int in, int out, int kernel, int stride_, int pad_, bool with_bias, std::mt19937_64& rng)
    : weight(uniform_param({out, in, kernel, kernel}, static_cast<double>(in) * kernel * kernel, rng)),
      bias(with_bias ? zeros_param(out) : Tensor()),
      stride(stride_),
      pad(pad_) {}

void Conv2d::collect(const std::string& prefix, Registry& r) { collect_weight_bias(prefix, r, weight, bias); }

ConvTranspose2d::ConvTranspose2d(int in, int out, int kernel, int stride_, int pad_, bool with_bias,
                                 std::mt19937_64& rng)
    : weight(uniform_param({in, out, kernel, kernel},
                           static_cast<double>(in) * kernel * kernel / (stride_ * stride_), rng)),
      bias(with_bias ? zeros_param(out) : Tensor()),
      stride(stride_),
      pad(pad_) {}

void ConvTranspose2d::collect(const std::string& prefix, Registry& r) { collect_weight_bias(prefix, r, weight, bias); }

Conv1d::Conv1d(int in, int out, int kernel, int stride_, int pad_, bool with_bias, std::mt19937_64& rng)
    : weight(uniform_param({out, in, kernel}, static_cast<double>(in) * kernel, rng)),
      bias(with_bias ? zeros_param(out) : Tensor()),
      stride(stride_),
      pad(pad_) {}

void Conv1d::collect(const std::string& prefix, Registry& r) { collect_weight_bias(prefix, r, weight, bias); }

Linear::Linear(int in, int out, std::mt19937_64& rng)
    : weight(uniform_param({out, in}, static_cast<double>(in), rng)), bias(zeros_param(out)) {}

void Linear::collect(const std::string& prefix, Registry& r) { collect_weight_bias(prefix, r, weight, bias); }

BatchNorm::BatchNorm(int channels)
    : gamma(Tensor::parameter(Array({channels}, 1.0))), beta(Tensor::parameter(Array({channels}, 0.0))) {
  stats.running_mean = Array({channels}, 0.0);
  stats.running_var = Array({channels}, 1.0);
}

void BatchNorm::collect(const std::string& prefix, Registry& r) {
  r.param(prefix + ".gamma", gamma, true);
  r.param(prefix + ".beta", beta, true);
  r.buffer(prefix + ".running_mean", &stats.running_mean);
  r.buffer(prefix + ".running_var", &stats.running_var);
}

}  // namespace consep::nn
