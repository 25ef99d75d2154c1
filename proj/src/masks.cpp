// src/masks.cpp

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

#include "consep/masks.hpp"

#include <string>

#include "consep/ad/ops.hpp"
#include "consep/error.hpp"

namespace consep::masks {

namespace {

std::string shape_str(const dsp::Grid& g) { return std::to_string(g.rows) + "x" + std::to_string(g.cols); }

}  // namespace

void SoftMask::validate() const {
  for (double v : grid.values)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("soft mask entry " + std::to_string(v) + " outside [0,1]");
}

BinaryMask ground_truth_mask(const dsp::Grid& target, const dsp::Grid& mixture) {
  if (!target.same_shape(mixture))
    throw ValidationError("ground_truth_mask: shape mismatch " + shape_str(target) + " vs " + shape_str(mixture));
  BinaryMask m{dsp::Grid(target.rows, target.cols)};
  for (std::size_t i = 0; i < target.values.size(); ++i)
    m.grid.values[i] = target.values[i] >= mixture.values[i] ? 1.0 : 0.0;
  return m;
}

BinaryMask ground_truth_mask(const dsp::MagnitudeSpectrogram& target, const dsp::MagnitudeSpectrogram& mixture) {
  if (target.axis != mixture.axis) throw ValidationError("ground_truth_mask: frequency axes differ");
  return ground_truth_mask(target.grid, mixture.grid);
}

dsp::ComplexSpectrogram apply_mask(const dsp::ComplexSpectrogram& s, const dsp::Grid& mask) {
  if (mask.rows != s.bins || mask.cols != s.frames)
    throw ValidationError("apply_mask: mask " + shape_str(mask) + " does not match spectrogram " +
                          std::to_string(s.bins) + "x" + std::to_string(s.frames));
  dsp::ComplexSpectrogram out = s;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= mask.values[i];
  return out;
}

ad::Tensor bce_mask_loss(const ad::Tensor& pred, const Array& gt) { return ad::bce_loss(pred, gt, kBceClamp); }

double bce_mask_loss(const SoftMask& pred, const BinaryMask& gt) {
  if (!pred.grid.same_shape(gt.grid))
    throw ValidationError("bce_mask_loss: shape mismatch " + shape_str(pred.grid) + " vs " + shape_str(gt.grid));
  const Shape shape{pred.grid.rows, pred.grid.cols};
  ad::NoGradGuard no_grad;
  return bce_mask_loss(ad::Tensor::constant(Array(shape, pred.grid.values)), Array(shape, gt.grid.values)).item();
}

}  // namespace consep::masks
