// src/pipeline.cpp

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

#include "consep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "consep/ad/tensor.hpp"
#include "consep/error.hpp"
#include "consep/masks.hpp"

namespace consep {

void SpectrogramConfig::validate() const {
  if (sample_rate_hz <= 0) throw ValidationError("spectrogram: sample rate must be positive");
  if (window < 4 || (window & (window - 1)) != 0)
    throw ValidationError("spectrogram: window " + std::to_string(window) + " is not a power of two");
  if (hop < 1 || window % hop != 0 || window / hop < 2)
    throw ValidationError("spectrogram: hop " + std::to_string(hop) + " must divide the window with overlap");
  if (grid_side < 2) throw ValidationError("spectrogram: grid side must be at least 2");
}

int SpectrogramConfig::segment_samples() const { return (grid_side - 1) * hop + window; }

double SpectrogramConfig::motion_fps(int motion_frames) const {
  return static_cast<double>(motion_frames) * sample_rate_hz / segment_samples();
}

synth::SegmentGeometry SpectrogramConfig::geometry(int motion_frames) const {
  return {segment_samples(), motion_frames, sample_rate_hz, motion_fps(motion_frames)};
}

nlohmann::json SpectrogramConfig::to_json() const {
  return {{"sample_rate_hz", sample_rate_hz}, {"window", window}, {"hop", hop}, {"grid_side", grid_side}};
}

SpectrogramConfig SpectrogramConfig::from_json(const nlohmann::json& j) {
  SpectrogramConfig c;
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.window = j.value("window", c.window);
  c.hop = j.value("hop", c.hop);
  c.grid_side = j.value("grid_side", c.grid_side);
  c.validate();
  return c;
}

synth::SegmentGeometry checked_geometry(const SpectrogramConfig& spec, const NetworkConfig& net,
                                        const synth::DatasetManifest& m) {
  spec.validate();
  if (spec.grid_side != net.grid_side)
    throw ValidationError("spectrogram grid side " + std::to_string(spec.grid_side) +
                          " does not match the network's " + std::to_string(net.grid_side));
  if (m.sample_rate_hz != spec.sample_rate_hz)
    throw ValidationError("dataset sample rate " + std::to_string(m.sample_rate_hz) + " Hz does not match " +
                          std::to_string(spec.sample_rate_hz) + " Hz");
  if (m.motion_channels != net.motion_channels)
    throw ValidationError("dataset has " + std::to_string(m.motion_channels) + " motion channels, network expects " +
                          std::to_string(net.motion_channels));
  synth::SegmentGeometry g = spec.geometry(net.motion_frames);
  g.motion_fps = m.motion_fps;
  // The motion window must cover the audio window to within one motion frame.
  const double audio_s = static_cast<double>(g.samples) / g.sample_rate_hz;
  const double motion_s = g.motion_frames / g.motion_fps;
  if (std::abs(audio_s - motion_s) > 1.0 / g.motion_fps)
    throw ValidationError("dataset motion rate " + std::to_string(m.motion_fps) + " fps gives " +
                          std::to_string(motion_s) + " s per " + std::to_string(g.motion_frames) +
                          " frames, but a segment is " + std::to_string(audio_s) + " s");
  return g;
}

Array log_magnitude(const dsp::Waveform& w, const SpectrogramConfig& spec) {
  const auto stft = dsp::stft(w, spec.window, spec.hop);
  if (stft.frames != spec.grid_side)
    throw ValidationError("log_magnitude: segment gives " + std::to_string(stft.frames) + " frames, expected " +
                          std::to_string(spec.grid_side));
  const auto mag = dsp::log_freq_rescale(dsp::magnitude(stft), spec.grid_side);
  return Array({1, 1, spec.grid_side, spec.grid_side}, mag.grid.values);
}

namespace {

Array motion_batch(const Array& m) { return m.reshaped({1, m.dim(0), m.dim(1)}); }

Array mask_array(const masks::BinaryMask& m) { return Array({1, 1, m.grid.rows, m.grid.cols}, m.grid.values); }

dsp::Grid grid_of(const Array& a) {
  dsp::Grid g(a.dim(2), a.dim(3));
  std::copy(a.data().begin(), a.data().end(), g.values.begin());
  return g;
}

Array stack(const std::vector<const Array*>& xs) {
  Shape s = xs.front()->shape();
  for (const Array* x : xs)
    if (x->shape() != s) throw ValidationError("stack: shape mismatch " + to_string(x->shape()) + " vs " + to_string(s));
  s[0] *= static_cast<int>(xs.size());
  Array out(s);
  std::size_t at = 0;
  for (const Array* x : xs) {
    std::copy(x->data().begin(), x->data().end(), out.data().begin() + at);
    at += x->size();
  }
  return out;
}

}  // namespace

PreparedPair prepare_pair(const synth::Dataset& ds, const synth::PairDraw& draw, const SpectrogramConfig& spec,
                          const synth::SegmentGeometry& g) {
  const auto p = synth::extract_segment(ds, draw.p, g);
  const auto q = synth::extract_segment(ds, draw.q, g);
  const auto tp = synth::extract_segment(ds, draw.template_p, g);
  const auto tq = synth::extract_segment(ds, draw.template_q, g);
  const dsp::Waveform mixture = dsp::mix(p.audio, q.audio);

  PreparedPair out;
  out.mixture_stft = dsp::stft(mixture, spec.window, spec.hop);
  out.query.mixture = log_magnitude(mixture, spec);
  out.query.motion_p = motion_batch(p.motion);
  out.query.motion_q = motion_batch(q.motion);
  out.query.template_p = log_magnitude(tp.audio, spec);
  out.query.template_q = log_magnitude(tq.audio, spec);
  out.truth.source_p = log_magnitude(p.audio, spec);
  out.truth.source_q = log_magnitude(q.audio, spec);
  const dsp::Grid mix_grid = grid_of(out.query.mixture);
  out.truth.gt_mask_p = mask_array(masks::ground_truth_mask(grid_of(out.truth.source_p), mix_grid));
  out.truth.gt_mask_q = mask_array(masks::ground_truth_mask(grid_of(out.truth.source_q), mix_grid));
  out.reference_p = p.audio;
  out.reference_q = q.audio;
  return out;
}

SeparationQuery stack_queries(const std::vector<const SeparationQuery*>& qs) {
  if (qs.empty()) throw ValidationError("stack_queries: empty batch");
  auto field = [&](Array SeparationQuery::*f) {
    std::vector<const Array*> xs;
    for (const auto* q : qs) xs.push_back(&(q->*f));
    return stack(xs);
  };
  return {field(&SeparationQuery::mixture), field(&SeparationQuery::motion_p), field(&SeparationQuery::motion_q),
          field(&SeparationQuery::template_p), field(&SeparationQuery::template_q)};
}

PairTruth stack_truths(const std::vector<const PairTruth*>& ts) {
  if (ts.empty()) throw ValidationError("stack_truths: empty batch");
  auto field = [&](Array PairTruth::*f) {
    std::vector<const Array*> xs;
    for (const auto* t : ts) xs.push_back(&(t->*f));
    return stack(xs);
  };
  return {field(&PairTruth::source_p), field(&PairTruth::source_q), field(&PairTruth::gt_mask_p),
          field(&PairTruth::gt_mask_q)};
}

dsp::Waveform reconstruct(const Array& mask, const dsp::ComplexSpectrogram& mixture_stft) {
  if (mask.rank() != 4 || mask.dim(0) != 1 || mask.dim(1) != 1 || mask.dim(3) != mixture_stft.frames)
    throw ValidationError("reconstruct: mask " + to_string(mask.shape()) + " does not fit a " +
                          std::to_string(mixture_stft.frames) + "-frame spectrogram");
  dsp::MagnitudeSpectrogram m;
  m.grid = grid_of(mask);
  m.axis = dsp::FrequencyAxis::kLog;
  m.linear_bins = mixture_stft.bins;
  m.window_size = mixture_stft.window_size;
  m.hop = mixture_stft.hop;
  m.sample_rate_hz = mixture_stft.sample_rate_hz;
  const dsp::Grid linear = dsp::inv_log_freq_rescale(m).grid;
  return dsp::istft(masks::apply_mask(mixture_stft, linear));
}

MaskPair infer_masks(SeparationModel& model, const SeparationQuery& q) {
  ad::NoGradGuard no_grad;
  const auto out = model.separate(ad::Tensor::constant(q.mixture), q.motion_p, q.motion_q, Phase::kEval);
  return {out.mask_p.value(), out.mask_q.value()};
}

}  // namespace consep
