// include/consep/ad/params.hpp

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

#ifndef CONSEP_AD_PARAMS_HPP_
#define CONSEP_AD_PARAMS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "consep/ad/tensor.hpp"

namespace consep::ad {

struct ParameterRef {
  std::string name;
  Tensor tensor;
  std::string group;
  bool norm_affine = false;  // batch-norm scale/shift
};

/// Non-trainable state that still belongs to the model (running statistics).
struct BufferRef {
  std::string name;
  Array* array = nullptr;
};

class Parameterized {
 public:
  virtual ~Parameterized() = default;
  virtual std::vector<ParameterRef> parameters() = 0;
  virtual std::vector<BufferRef> buffers() = 0;
};

/// Value copies of every parameter and buffer, keyed by name, in model order.
struct ParamSnapshot {
  std::vector<std::pair<std::string, Array>> entries;
};

ParamSnapshot snapshot(Parameterized& model);
/// Makes the model bitwise equal to the snapshot. Throws ValidationError if
/// names, order or shapes disagree.
void restore(Parameterized& model, const ParamSnapshot& snap);

}  // namespace consep::ad

#endif  // CONSEP_AD_PARAMS_HPP_
