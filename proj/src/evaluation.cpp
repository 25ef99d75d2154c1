// src/evaluation.cpp

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

#include "consep/evaluation.hpp"

#include <algorithm>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "consep/error.hpp"

namespace consep::eval {

namespace {

PairRecord evaluate_one(SeparationModel& model, const synth::Dataset& ds, const synth::TestPair& pair,
                        const SpectrogramConfig& spec, const synth::SegmentGeometry& g, const EvalSettings& s,
                        const om::OMConfig& om_cfg, bool adapt) {
  const PreparedPair prepared = prepare_pair(ds, pair.draw, spec, g);
  PairRecord rec;
  rec.pair_id = pair.pair_id;
  std::vector<MaskPair> masks;
  if (adapt) {
    om::AdaptResult r = om::adapt_pair(model, prepared.query, om_cfg, s.t_values);
    rec.l_cs = std::move(r.l_cs);
    rec.warning = r.warning;
    masks = std::move(r.captured);
  } else {
    masks.assign(s.t_values.size(), infer_masks(model, prepared.query));
  }
  const bss::Evaluator refs({prepared.reference_p, prepared.reference_q}, s.filter_len);
  for (const MaskPair& m : masks) {
    const std::array<dsp::Waveform, 2> est = {reconstruct(m.mask_p, prepared.mixture_stft),
                                              reconstruct(m.mask_q, prepared.mixture_stft)};
    rec.metrics.push_back(bss::evaluate_pair(est, refs, s.permute));
  }
  return rec;
}

}  // namespace

std::vector<PairRecord> evaluate_pairs(SeparationModel& model, const synth::Dataset& ds,
                                       const std::vector<synth::TestPair>& pairs, const SpectrogramConfig& spec,
                                       const synth::SegmentGeometry& g, const EvalSettings& settings) {
  if (settings.t_values.empty()) throw ValidationError("evaluation: no iteration counts requested");
  if (settings.jobs < 1) throw ValidationError("evaluation: --jobs must be at least 1");
  int max_t = 0;
  for (int t : settings.t_values) {
    if (t < 0) throw ValidationError("evaluation: iteration counts must be >= 0");
    max_t = std::max(max_t, t);
  }
  om::OMConfig om_cfg = settings.om;
  om_cfg.iterations = max_t;
  om_cfg.validate();
  const bool adapt = max_t > 0;

  const int n = static_cast<int>(pairs.size());
  std::vector<PairRecord> out(n);
  std::vector<std::string> errors(n);
  const int jobs = std::min(settings.jobs, std::max(1, n));
  std::vector<std::unique_ptr<SeparationModel>> clones;
  for (int j = 1; j < jobs; ++j) clones.push_back(model.clone());

#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int i = 0; i < n; ++i) {
    int worker = 0;
#ifdef _OPENMP
    worker = omp_get_thread_num();
#endif
    SeparationModel& m = worker == 0 ? model : *clones[worker - 1];
    try {
      out[i] = evaluate_one(m, ds, pairs[i], spec, g, settings, om_cfg, adapt);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty()) throw NumericalError("pair " + std::to_string(pairs[i].pair_id) + ": " + errors[i]);
  return out;
}

std::string metrics_csv(const std::vector<PairRecord>& records, std::size_t index) {
  std::string out = bss::csv_header();
  for (const auto& r : records) out += bss::csv_rows(r.pair_id, r.metrics.at(index));
  return out;
}

om::SweepRow sweep_row(const std::vector<PairRecord>& records, std::size_t index, int T) {
  om::SweepRow row;
  row.T = T;
  if (records.empty()) return row;
  std::size_t decreased = 0, with_traj = 0;
  for (const auto& r : records) {
    for (const auto& m : r.metrics.at(index).per_source) {
      row.mean_sdr += m.sdr;
      row.mean_sir += m.sir;
      row.mean_sar += m.sar;
    }
    if (static_cast<int>(r.l_cs.size()) > T) {
      ++with_traj;
      if (r.l_cs[T] <= r.l_cs[0]) ++decreased;
    }
  }
  const double count = 2.0 * static_cast<double>(records.size());
  row.mean_sdr /= count;
  row.mean_sir /= count;
  row.mean_sar /= count;
  row.lcs_decreased_fraction = with_traj ? static_cast<double>(decreased) / with_traj : 0.0;
  return row;
}

}  // namespace consep::eval
