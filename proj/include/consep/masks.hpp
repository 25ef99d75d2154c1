// include/consep/masks.hpp

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

#ifndef CONSEP_MASKS_HPP_
#define CONSEP_MASKS_HPP_

#include "consep/ad/tensor.hpp"
#include "consep/dsp.hpp"

namespace consep::masks {

/// Entries in {0, 1}; same shape as the spectrogram it was derived from.
struct BinaryMask {
  dsp::Grid grid;
};

/// Entries in [0, 1].
struct SoftMask {
  dsp::Grid grid;
  /// Throws ValidationError if any entry falls outside [0, 1].
  void validate() const;
};

/// Cell is 1 iff target >= mixture (ties count as dominant).
BinaryMask ground_truth_mask(const dsp::Grid& target, const dsp::Grid& mixture);
BinaryMask ground_truth_mask(const dsp::MagnitudeSpectrogram& target, const dsp::MagnitudeSpectrogram& mixture);

/// Complex spectrogram times a real mask on the same bin/frame grid.
dsp::ComplexSpectrogram apply_mask(const dsp::ComplexSpectrogram& s, const dsp::Grid& mask);

inline constexpr double kBceClamp = 1e-7;

/// Mean per-pixel binary cross-entropy, predictions clamped to [1e-7, 1 - 1e-7].
double bce_mask_loss(const SoftMask& pred, const BinaryMask& gt);
/// Differentiable form over a prediction tensor of any layout matching `gt`.
ad::Tensor bce_mask_loss(const ad::Tensor& pred, const Array& gt);

}  // namespace consep::masks

#endif  // CONSEP_MASKS_HPP_
