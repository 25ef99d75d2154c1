// include/consep/dsp.hpp

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

#ifndef CONSEP_DSP_HPP_
#define CONSEP_DSP_HPP_

#include <complex>
#include <filesystem>
#include <vector>

namespace consep::dsp {

/// Mono signal.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  std::size_t size() const { return samples.size(); }
  /// Throws ValidationError unless non-empty, finite, and rate > 0.
  void validate() const;
};

/// Row-major real grid. Spectrogram-shaped grids use rows = frequency bins
/// and cols = time frames.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
};

/// One-sided STFT: bins = window_size/2 + 1, values stored bin-major.
struct ComplexSpectrogram {
  int bins = 0;
  int frames = 0;
  std::vector<std::complex<double>> values;
  int window_size = 0;
  int hop = 0;
  int sample_rate_hz = 0;

  std::complex<double>& at(int f, int t) { return values[static_cast<std::size_t>(f) * frames + t]; }
  const std::complex<double>& at(int f, int t) const { return values[static_cast<std::size_t>(f) * frames + t]; }
};

enum class FrequencyAxis { kLinear, kLog };

struct MagnitudeSpectrogram {
  Grid grid;
  FrequencyAxis axis = FrequencyAxis::kLinear;
  int linear_bins = 0;  // bin count of the linear grid this came from
  int window_size = 0;
  int hop = 0;
  int sample_rate_hz = 0;
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

/// Frame count floor((len - window)/hop) + 1.
int frame_count(std::size_t length, int window_size, int hop);

/// Throws ValidationError("signal too short") when len < window_size, and on a
/// window that is not a power of two or hop outside [1, window_size].
ComplexSpectrogram stft(const Waveform& w, int window_size, int hop);

/// Overlap-add inverse normalised by the constant Hann window sum. Output
/// length (frames-1)*hop + window_size; the first and last window-hop samples
/// are only partially covered and come out tapered.
/// Requires hop to divide window_size with at least two frames of overlap.
Waveform istft(const ComplexSpectrogram& s);

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& s);

/// Fractional linear-bin positions of the log-spaced rows, from bin 1 to the
/// Nyquist bin.
std::vector<double> log_frequency_positions(int linear_bins, int out_bins);

Grid resample_rows_to_log(const Grid& linear, int out_bins);
Grid resample_rows_to_linear(const Grid& log_grid, int linear_bins);

/// Linear-axis magnitude -> log-axis magnitude with `out_bins` rows.
MagnitudeSpectrogram log_freq_rescale(const MagnitudeSpectrogram& m, int out_bins);
/// Log-axis magnitude -> linear axis with m.linear_bins rows.
MagnitudeSpectrogram inv_log_freq_rescale(const MagnitudeSpectrogram& m);

/// Elementwise sum; lengths and rates must agree.
Waveform mix(const Waveform& a, const Waveform& b);

// Files. Raw waveforms are little-endian f32 with a JSON sidecar
// {"sample_rate_hz", "length"} at `<path>.json`; 16-bit mono WAV is also read.
void write_waveform(const std::filesystem::path& path, const Waveform& w);
Waveform read_waveform(const std::filesystem::path& path);
void write_wav16(const std::filesystem::path& path, const Waveform& w);

}  // namespace consep::dsp

#endif  // CONSEP_DSP_HPP_
