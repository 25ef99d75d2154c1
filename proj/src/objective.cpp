// src/objective.cpp

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

#include "consep/objective.hpp"

#include "consep/ad/ops.hpp"
#include "consep/losses.hpp"

namespace consep {

namespace {

ConsistencyLosses assemble(SeparationModel& model, const SeparationOutput& out, const ad::Tensor& mixture,
                           const SeparationQuery& q, const PairTruth* truth, double gamma, ConsistencyTerms terms,
                           Phase phase) {
  using ad::Tensor;
  ConsistencyLosses res;
  if (!terms.any()) return res;
  const int n = mixture.dim(0);
  std::vector<Tensor> inputs = {separated_magnitude(out.mask_p, mixture), separated_magnitude(out.mask_q, mixture)};
  if (terms.intra) {
    inputs.push_back(Tensor::constant(q.template_p));
    inputs.push_back(Tensor::constant(q.template_q));
  }
  const bool assisted = truth != nullptr && terms.inter;
  if (assisted) {
    inputs.push_back(Tensor::constant(truth->source_p));
    inputs.push_back(Tensor::constant(truth->source_q));
  }
  // One pass so batch statistics (in training) cover every input.
  const Tensor emb = model.consistency_embed(ad::concat(inputs, 0), phase);
  int at = 0;
  auto next = [&] {
    Tensor t = ad::slice_rows(emb, at, n);
    at += n;
    return t;
  };
  const Tensor pred_p = next(), pred_q = next();
  if (terms.intra) {
    const Tensor temp_p = next(), temp_q = next();
    res.intra = losses::intra_modal_loss(pred_p, pred_q, temp_p, temp_q);
  }
  if (terms.inter) {
    losses::InterModalInputs in;
    in.pred_p = pred_p;
    in.pred_q = pred_q;
    in.visual_p = model.visual_embed(out.visual_p);
    in.visual_q = model.visual_embed(out.visual_q);
    if (assisted) {
      in.gt_p = next();
      in.gt_q = next();
    }
    res.inter = losses::inter_modal_loss(in, gamma,
                                         assisted ? losses::GroundTruthTerm::kInclude : losses::GroundTruthTerm::kExclude);
  }
  return res;
}

}  // namespace

ad::Tensor separated_magnitude(const ad::Tensor& mask, const ad::Tensor& mixture) { return ad::mul(mask, mixture); }

ConsistencyLosses self_consistency(SeparationModel& model, const SeparationOutput& out, const ad::Tensor& mixture,
                                   const SeparationQuery& q, ConsistencyTerms terms, Phase phase) {
  return assemble(model, out, mixture, q, nullptr, 0.0, terms, phase);
}

ConsistencyLosses assisted_consistency(SeparationModel& model, const SeparationOutput& out,
                                       const ad::Tensor& mixture, const SeparationQuery& q, const PairTruth& truth,
                                       double gamma, ConsistencyTerms terms, Phase phase) {
  return assemble(model, out, mixture, q, &truth, gamma, terms, phase);
}

}  // namespace consep
