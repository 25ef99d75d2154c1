// include/consep/losses.hpp

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

#ifndef CONSEP_LOSSES_HPP_
#define CONSEP_LOSSES_HPP_

#include "consep/ad/tensor.hpp"

namespace consep::losses {

/// Weight of the ground-truth assisted inter-modal term at optimizer step
/// `iter`: max(0.1, 0.9^(iter/100)).
double gamma_schedule(long iter);

inline constexpr double kTrainLambda = 0.01;
inline constexpr double kAdaptLambda = 1.0;

struct LossBreakdown {
  double l_mask = 0.0;
  double l_inter = 0.0;
  double l_intra = 0.0;
  double l_cs = 0.0;     // l_inter + l_intra
  double l_total = 0.0;  // l_mask + lambda * l_cs
  double gamma = 0.0;
  double lambda = 0.0;
};

LossBreakdown total_loss(double l_mask, double l_inter, double l_intra, double lambda, double gamma = 0.0);

enum class GroundTruthTerm { kInclude, kExclude };

/// Embeddings are [N, D] batches of unit rows.
struct InterModalInputs {
  ad::Tensor pred_p, pred_q;
  ad::Tensor gt_p, gt_q;  // ignored when the ground-truth term is excluded
  ad::Tensor visual_p, visual_q;
};

/// Batch mean of
///   gamma (D(gt_p, v_p) + D(gt_q, v_q)) + D(pred_p, v_p) + D(pred_q, v_q)
///   - D(pred_p, v_q) - D(pred_q, v_p)
/// with D the Euclidean distance.
ad::Tensor inter_modal_loss(const InterModalInputs& in, double gamma, GroundTruthTerm term);

/// Batch mean of D(pred_p, temp_p) + D(pred_q, temp_q) - D(pred_p, pred_q).
ad::Tensor intra_modal_loss(const ad::Tensor& pred_p, const ad::Tensor& pred_q, const ad::Tensor& temp_p,
                            const ad::Tensor& temp_q);

/// Throws ValidationError if any row norm differs from 1 by more than 1e-6.
void require_unit_rows(const ad::Tensor& x, const char* what);

}  // namespace consep::losses

#endif  // CONSEP_LOSSES_HPP_
