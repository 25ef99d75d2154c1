// include/consep/evaluation.hpp

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

#ifndef CONSEP_EVALUATION_HPP_
#define CONSEP_EVALUATION_HPP_

#include <string>
#include <vector>

#include "consep/bsseval.hpp"
#include "consep/networks.hpp"
#include "consep/online_matching.hpp"
#include "consep/pipeline.hpp"
#include "consep/synthdata.hpp"

namespace consep::eval {

struct EvalSettings {
  int filter_len = bss::kDefaultFilterLength;
  bool permute = false;
  int jobs = 1;
  om::OMConfig om;           // om.iterations is raised to max(t_values)
  std::vector<int> t_values = {0};
};

struct PairRecord {
  int pair_id = 0;
  std::vector<double> l_cs;                 // trajectory of the longest adaptation
  bool warning = false;
  std::vector<bss::MetricsReport> metrics;  // one per t_values entry
};

/// Separates (and, for T > 0, adapts) every pair and scores the
/// reconstructions. With t_values == {0} no adaptation runs and no
/// consistency loss is evaluated. Results are independent of `jobs`.
std::vector<PairRecord> evaluate_pairs(SeparationModel& model, const synth::Dataset& ds,
                                       const std::vector<synth::TestPair>& pairs, const SpectrogramConfig& spec,
                                       const synth::SegmentGeometry& g, const EvalSettings& settings);

/// metrics.csv body for t_values[index].
std::string metrics_csv(const std::vector<PairRecord>& records, std::size_t index);
om::SweepRow sweep_row(const std::vector<PairRecord>& records, std::size_t index, int T);

}  // namespace consep::eval

#endif  // CONSEP_EVALUATION_HPP_
