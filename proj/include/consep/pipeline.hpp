// include/consep/pipeline.hpp

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

#ifndef CONSEP_PIPELINE_HPP_
#define CONSEP_PIPELINE_HPP_

#include <vector>

#include "consep/array.hpp"
#include "consep/dsp.hpp"
#include "consep/networks.hpp"
#include "consep/synthdata.hpp"
#include "json.hpp"

namespace consep {

/// STFT and network-grid sizes. A segment spans exactly grid_side frames,
/// so the log-frequency magnitude grid is grid_side x grid_side.
struct SpectrogramConfig {
  int sample_rate_hz = 8000;
  int window = 256;
  int hop = 128;
  int grid_side = 64;

  void validate() const;
  int linear_bins() const { return window / 2 + 1; }
  /// (grid_side - 1) * hop + window
  int segment_samples() const;
  /// Motion rate at which `motion_frames` frames cover one segment.
  double motion_fps(int motion_frames) const;
  synth::SegmentGeometry geometry(int motion_frames) const;
  nlohmann::json to_json() const;
  static SpectrogramConfig from_json(const nlohmann::json& j);
  bool operator==(const SpectrogramConfig&) const = default;
};

/// Throws ValidationError unless the dataset's motion rate and sample rate
/// match the segment geometry implied by `spec` and `net`.
synth::SegmentGeometry checked_geometry(const SpectrogramConfig& spec, const NetworkConfig& net,
                                        const synth::DatasetManifest& m);

/// Everything separation and adaptation may look at. Holds no ground truth.
struct SeparationQuery {
  Array mixture;                 // [N,1,S,S] log-frequency magnitude of the mixture
  Array motion_p, motion_q;      // [N,T_v,C_v]
  Array template_p, template_q;  // [N,1,S,S] magnitudes of same-category template clips
};

/// Training / scoring targets for a query.
struct PairTruth {
  Array source_p, source_q;      // [N,1,S,S] log-frequency magnitudes
  Array gt_mask_p, gt_mask_q;    // [N,1,S,S] binary masks
};

/// One prepared pair with what is needed to reconstruct and score it.
struct PreparedPair {
  SeparationQuery query;  // N = 1
  PairTruth truth;
  dsp::ComplexSpectrogram mixture_stft;
  dsp::Waveform reference_p, reference_q;
};

/// Log-frequency magnitude of a segment as a [1,1,S,S] array.
Array log_magnitude(const dsp::Waveform& w, const SpectrogramConfig& spec);

PreparedPair prepare_pair(const synth::Dataset& ds, const synth::PairDraw& draw, const SpectrogramConfig& spec,
                          const synth::SegmentGeometry& g);

/// Stacks N single-pair queries / truths along the batch axis.
SeparationQuery stack_queries(const std::vector<const SeparationQuery*>& qs);
PairTruth stack_truths(const std::vector<const PairTruth*>& ts);

/// Log-grid mask [1,1,S,S] -> waveform: back to linear bins, onto the mixture
/// STFT, inverse STFT.
dsp::Waveform reconstruct(const Array& mask, const dsp::ComplexSpectrogram& mixture_stft);

/// Predicted masks under inference (running batch-norm statistics, no tape).
struct MaskPair {
  Array mask_p, mask_q;  // [N,1,S,S]
};
MaskPair infer_masks(SeparationModel& model, const SeparationQuery& q);

}  // namespace consep

#endif  // CONSEP_PIPELINE_HPP_
