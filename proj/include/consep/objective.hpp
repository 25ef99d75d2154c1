// include/consep/objective.hpp

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

#ifndef CONSEP_OBJECTIVE_HPP_
#define CONSEP_OBJECTIVE_HPP_

#include "consep/ad/tensor.hpp"
#include "consep/networks.hpp"
#include "consep/pipeline.hpp"

namespace consep {

struct ConsistencyTerms {
  bool inter = true;
  bool intra = true;
  bool any() const { return inter || intra; }
};

/// Undefined tensors for disabled terms.
struct ConsistencyLosses {
  ad::Tensor inter, intra;
};

/// Separated magnitudes mask x mixture, as fed to the consistency network.
ad::Tensor separated_magnitude(const ad::Tensor& mask, const ad::Tensor& mixture);

/// Consistency losses from the query alone; the ground-truth assisted
/// inter-modal term is absent. Used for test-time adaptation.
ConsistencyLosses self_consistency(SeparationModel& model, const SeparationOutput& out, const ad::Tensor& mixture,
                                   const SeparationQuery& q, ConsistencyTerms terms, Phase phase);

/// Training form: the assisted term, weighted by gamma, embeds the true
/// source magnitudes.
ConsistencyLosses assisted_consistency(SeparationModel& model, const SeparationOutput& out,
                                       const ad::Tensor& mixture, const SeparationQuery& q, const PairTruth& truth,
                                       double gamma, ConsistencyTerms terms, Phase phase);

}  // namespace consep

#endif  // CONSEP_OBJECTIVE_HPP_
