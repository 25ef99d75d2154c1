// src/losses.cpp

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

#include "consep/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "consep/ad/ops.hpp"
#include "consep/error.hpp"

namespace consep::losses {

double gamma_schedule(long iter) {
  if (iter < 0) throw ValidationError("gamma_schedule: negative iteration " + std::to_string(iter));
  return std::max(0.1, std::pow(0.9, static_cast<double>(iter) / 100.0));
}

LossBreakdown total_loss(double l_mask, double l_inter, double l_intra, double lambda, double gamma) {
  if (!(lambda >= 0.0)) throw ValidationError("total_loss: lambda must be >= 0");
  LossBreakdown b;
  b.l_mask = l_mask;
  b.l_inter = l_inter;
  b.l_intra = l_intra;
  b.l_cs = l_inter + l_intra;
  b.l_total = l_mask + lambda * b.l_cs;
  b.gamma = gamma;
  b.lambda = lambda;
  return b;
}

void require_unit_rows(const ad::Tensor& x, const char* what) {
  if (x.value().rank() != 2) throw ValidationError(std::string(what) + ": expected [N,D], got " + to_string(x.shape()));
  const int n = x.dim(0), d = x.dim(1);
  for (int i = 0; i < n; ++i) {
    double ss = 0.0;
    for (int j = 0; j < d; ++j) ss += x.value()[static_cast<std::size_t>(i) * d + j] * x.value()[static_cast<std::size_t>(i) * d + j];
    if (std::abs(std::sqrt(ss) - 1.0) > 1e-6)
      throw ValidationError(std::string(what) + ": row " + std::to_string(i) + " has norm " +
                            std::to_string(std::sqrt(ss)) + ", expected a unit vector");
  }
}

ad::Tensor inter_modal_loss(const InterModalInputs& in, double gamma, GroundTruthTerm term) {
  using namespace ad;
  require_unit_rows(in.pred_p, "inter_modal_loss pred_p");
  require_unit_rows(in.pred_q, "inter_modal_loss pred_q");
  require_unit_rows(in.visual_p, "inter_modal_loss visual_p");
  require_unit_rows(in.visual_q, "inter_modal_loss visual_q");
  Tensor positive = add(row_distance(in.pred_p, in.visual_p), row_distance(in.pred_q, in.visual_q));
  Tensor negative = add(row_distance(in.pred_p, in.visual_q), row_distance(in.pred_q, in.visual_p));
  Tensor per_sample = sub(positive, negative);
  if (term == GroundTruthTerm::kInclude) {
    require_unit_rows(in.gt_p, "inter_modal_loss gt_p");
    require_unit_rows(in.gt_q, "inter_modal_loss gt_q");
    Tensor assisted = add(row_distance(in.gt_p, in.visual_p), row_distance(in.gt_q, in.visual_q));
    per_sample = add(scale(assisted, gamma), per_sample);
  }
  return mean(per_sample);
}

ad::Tensor intra_modal_loss(const ad::Tensor& pred_p, const ad::Tensor& pred_q, const ad::Tensor& temp_p,
                            const ad::Tensor& temp_q) {
  using namespace ad;
  require_unit_rows(pred_p, "intra_modal_loss pred_p");
  require_unit_rows(pred_q, "intra_modal_loss pred_q");
  require_unit_rows(temp_p, "intra_modal_loss temp_p");
  require_unit_rows(temp_q, "intra_modal_loss temp_q");
  Tensor pull = add(row_distance(pred_p, temp_p), row_distance(pred_q, temp_q));
  return mean(sub(pull, row_distance(pred_p, pred_q)));
}

}  // namespace consep::losses
