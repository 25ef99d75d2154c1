// include/consep/ad/optim.hpp

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

#ifndef CONSEP_AD_OPTIM_HPP_
#define CONSEP_AD_OPTIM_HPP_

#include <vector>

#include "consep/ad/tensor.hpp"

namespace consep::ad {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Array> first_moment;
  std::vector<Array> second_moment;
};

/// Bias-corrected Adam update of `params` in place. Moment buffers are created
/// on the first call. Throws ValidationError if any parameter has no gradient.
void adam_step(AdamState& state, std::vector<Tensor>& params);

class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step() { adam_step(state_, params_); }
  void zero_grad();

  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  AdamState state_;
};

/// theta <- theta - lr * grad.
class Sgd {
 public:
  Sgd(std::vector<Tensor> params, double lr);
  void step();
  void zero_grad();

 private:
  std::vector<Tensor> params_;
  double lr_;
};

}  // namespace consep::ad

#endif  // CONSEP_AD_OPTIM_HPP_
