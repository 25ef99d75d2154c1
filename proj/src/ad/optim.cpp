// src/ad/optim.cpp

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

#include "consep/ad/optim.hpp"

#include <cmath>
#include <string>

#include "consep/error.hpp"

namespace consep::ad {

namespace {

void require_grads(const std::vector<Tensor>& params, const char* who) {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i].has_grad())
      throw ValidationError(std::string(who) + ": parameter " + std::to_string(i) + " " +
                            to_string(params[i].shape()) + " has no gradient");
}

}  // namespace

void adam_step(AdamState& state, std::vector<Tensor>& params) {
  require_grads(params, "adam_step");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.shape(), 0.0);
      state.second_moment.emplace_back(p.shape(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
    throw ValidationError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                          " parameters, got " + std::to_string(params.size()));
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Array& value = params[i].mutable_value();
    const Array& g = params[i].grad();
    Array& m = state.first_moment[i];
    Array& v = state.second_moment[i];
    if (m.shape() != value.shape())
      throw ValidationError("adam_step: moment shape " + to_string(m.shape()) + " does not match parameter " +
                            to_string(value.shape()));
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      value[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)) {
  state_.lr = lr;
  state_.beta1 = beta1;
  state_.beta2 = beta2;
  state_.eps = eps;
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Sgd::Sgd(std::vector<Tensor> params, double lr) : params_(std::move(params)), lr_(lr) {}

void Sgd::step() {
  require_grads(params_, "sgd_step");
  for (auto& p : params_) {
    Array& value = p.mutable_value();
    const Array& g = p.grad();
    for (std::size_t k = 0; k < value.size(); ++k) value[k] -= lr_ * g[k];
  }
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace consep::ad
