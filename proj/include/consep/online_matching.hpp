// include/consep/online_matching.hpp

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

#ifndef CONSEP_ONLINE_MATCHING_HPP_
#define CONSEP_ONLINE_MATCHING_HPP_

#include <string>
#include <vector>

#include "consep/bsseval.hpp"
#include "consep/losses.hpp"
#include "consep/networks.hpp"
#include "consep/objective.hpp"
#include "consep/pipeline.hpp"
#include "json.hpp"

namespace consep::om {

enum class Optimizer { kSgd, kAdam };

struct OMConfig {
  int iterations = 5;  // T
  double beta = 1e-4;  // step size
  double lambda = losses::kAdaptLambda;
  bool freeze_bn = true;
  Optimizer optimizer = Optimizer::kSgd;
  ConsistencyTerms terms;

  void validate() const;
  nlohmann::json to_json() const;
  static OMConfig from_json(const nlohmann::json& j);
};

struct AdaptResult {
  MaskPair masks;               // computed with the adapted parameters
  std::vector<double> l_cs;     // L_cs at tau = 0..T (the last under the adapted parameters)
  bool warning = false;         // non-finite loss: masks are the unadapted ones
  std::string message;
  /// Masks after each requested iteration count, in the order requested.
  std::vector<MaskPair> captured;
};

/// Test-time adaptation of one pair. The model is snapshotted, adapted for
/// cfg.iterations steps on the consistency loss, used to predict masks, and
/// restored bitwise before returning. Only the query is visible: there is no
/// ground-truth input on this path.
///
/// `capture` lists iteration counts (each <= cfg.iterations) at which masks
/// are also recorded; capturing at t gives the same masks as a run with T=t.
AdaptResult adapt_pair(SeparationModel& model, const SeparationQuery& query, const OMConfig& cfg,
                       const std::vector<int>& capture = {});

/// Per-pair row of the adaptation report.
struct PairOutcome {
  int pair_id = 0;
  std::vector<double> l_cs;
  bool warning = false;
  bss::MetricsReport before, after;
};

/// pair_id,T,l_cs_trajectory,warning,SDR/SIR/SAR before and after per source.
std::string outcome_csv_header();
std::string outcome_csv_row(const PairOutcome& o, int T);

struct SweepRow {
  int T = 0;
  double mean_sdr = 0.0, mean_sir = 0.0, mean_sar = 0.0;
  double lcs_decreased_fraction = 0.0;  // pairs with L_cs(T) <= L_cs(0)
};

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& r);

}  // namespace consep::om

#endif  // CONSEP_ONLINE_MATCHING_HPP_
