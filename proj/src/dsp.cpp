// src/dsp.cpp

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

#include "consep/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "consep/error.hpp"
#include "consep/io.hpp"

namespace consep::dsp {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per size with FFTW_ESTIMATE so the chosen algorithm,
// and therefore every output bit, is the same on each run.
struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

std::mutex g_plan_mutex;
std::map<int, Plans>& plan_cache() {
  static std::map<int, Plans> cache;
  return cache;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {}
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

const Plans& plans_for(int n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  FftwBuffer real(sizeof(double) * n);
  FftwBuffer cplx(sizeof(fftw_complex) * (n / 2 + 1));
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(n, static_cast<double*>(real.ptr), static_cast<fftw_complex*>(cplx.ptr),
                                   FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(cplx.ptr), static_cast<double*>(real.ptr),
                                   FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_frame_params(int window_size, int hop) {
  if (!is_power_of_two(window_size))
    throw ValidationError("stft: window size " + std::to_string(window_size) + " is not a power of two");
  if (hop < 1 || hop > window_size)
    throw ValidationError("stft: hop " + std::to_string(hop) + " outside [1, " + std::to_string(window_size) + "]");
}

double lerp_at(const Grid& g, double pos, int col) {
  const int last = g.rows - 1;
  if (pos <= 0.0) return g.at(0, col);
  if (pos >= last) return g.at(last, col);
  const int lo = static_cast<int>(std::floor(pos));
  const double frac = pos - lo;
  if (frac == 0.0) return g.at(lo, col);
  return (1.0 - frac) * g.at(lo, col) + frac * g.at(lo + 1, col);
}

}  // namespace

void Waveform::validate() const {
  if (samples.empty()) throw ValidationError("waveform: empty signal");
  if (sample_rate_hz <= 0) throw ValidationError("waveform: sample rate must be positive");
  for (double v : samples)
    if (!std::isfinite(v)) throw ValidationError("waveform: non-finite sample");
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

int frame_count(std::size_t length, int window_size, int hop) {
  if (length < static_cast<std::size_t>(window_size)) return 0;
  return static_cast<int>((length - window_size) / hop) + 1;
}

ComplexSpectrogram stft(const Waveform& w, int window_size, int hop) {
  check_frame_params(window_size, hop);
  if (w.samples.size() < static_cast<std::size_t>(window_size))
    throw ValidationError("stft: signal too short (" + std::to_string(w.samples.size()) + " samples < window " +
                          std::to_string(window_size) + ")");
  ComplexSpectrogram s;
  s.window_size = window_size;
  s.hop = hop;
  s.sample_rate_hz = w.sample_rate_hz;
  s.bins = window_size / 2 + 1;
  s.frames = frame_count(w.samples.size(), window_size, hop);
  s.values.assign(static_cast<std::size_t>(s.bins) * s.frames, {0.0, 0.0});

  const auto window = hann_window(window_size);
  const Plans& plans = plans_for(window_size);
  FftwBuffer in(sizeof(double) * window_size);
  FftwBuffer out(sizeof(fftw_complex) * s.bins);
  auto* frame = static_cast<double*>(in.ptr);
  auto* spec = static_cast<fftw_complex*>(out.ptr);
  for (int t = 0; t < s.frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * hop;
    for (int n = 0; n < window_size; ++n) frame[n] = window[n] * w.samples[start + n];
    fftw_execute_dft_r2c(plans.forward, frame, spec);
    for (int f = 0; f < s.bins; ++f) s.at(f, t) = {spec[f][0], spec[f][1]};
  }
  return s;
}

Waveform istft(const ComplexSpectrogram& s) {
  check_frame_params(s.window_size, s.hop);
  if (s.window_size % s.hop != 0 || s.window_size / s.hop < 2)
    throw ValidationError("istft: hop " + std::to_string(s.hop) + " with Hann window " +
                          std::to_string(s.window_size) + " is not a constant-overlap-add combination");
  if (s.bins != s.window_size / 2 + 1 || s.frames < 1 ||
      s.values.size() != static_cast<std::size_t>(s.bins) * s.frames)
    throw ValidationError("istft: spectrogram shape inconsistent with its window size");
  const int n = s.window_size;
  const std::size_t length = static_cast<std::size_t>(s.frames - 1) * s.hop + n;
  std::vector<double> acc(length, 0.0);
  const Plans& plans = plans_for(n);
  FftwBuffer in(sizeof(fftw_complex) * s.bins);
  FftwBuffer out(sizeof(double) * n);
  auto* spec = static_cast<fftw_complex*>(in.ptr);
  auto* frame = static_cast<double*>(out.ptr);
  for (int t = 0; t < s.frames; ++t) {
    for (int f = 0; f < s.bins; ++f) {
      spec[f][0] = s.at(f, t).real();
      spec[f][1] = s.at(f, t).imag();
    }
    // c2r is unnormalised and may overwrite its input.
    fftw_execute_dft_c2r(plans.inverse, spec, frame);
    const std::size_t start = static_cast<std::size_t>(t) * s.hop;
    for (int k = 0; k < n; ++k) acc[start + k] += frame[k] / n;
  }
  // Shifted periodic Hann windows sum to window/(2 hop) wherever every
  // covering frame is present. Dividing by that constant rather than by the
  // per-sample window sum leaves the partially covered edges attenuated
  // instead of amplifying masked (inconsistent) frames there.
  const double cola = static_cast<double>(n) / (2.0 * s.hop);
  Waveform w;
  w.sample_rate_hz = s.sample_rate_hz;
  w.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) w.samples[i] = acc[i] / cola;
  return w;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& s) {
  MagnitudeSpectrogram m;
  m.grid = Grid(s.bins, s.frames);
  for (std::size_t i = 0; i < s.values.size(); ++i) m.grid.values[i] = std::abs(s.values[i]);
  m.axis = FrequencyAxis::kLinear;
  m.linear_bins = s.bins;
  m.window_size = s.window_size;
  m.hop = s.hop;
  m.sample_rate_hz = s.sample_rate_hz;
  return m;
}

std::vector<double> log_frequency_positions(int linear_bins, int out_bins) {
  if (out_bins < 2) throw ValidationError("log_freq_rescale: out_bins must be >= 2, got " + std::to_string(out_bins));
  if (linear_bins < 3) throw ValidationError("log_freq_rescale: need at least 3 linear bins");
  const double top = std::log(static_cast<double>(linear_bins - 1));
  std::vector<double> pos(out_bins);
  for (int j = 0; j < out_bins; ++j) pos[j] = std::exp(top * j / (out_bins - 1));
  pos.back() = linear_bins - 1;
  return pos;
}

Grid resample_rows_to_log(const Grid& linear, int out_bins) {
  const auto pos = log_frequency_positions(linear.rows, out_bins);
  Grid out(out_bins, linear.cols);
  for (int j = 0; j < out_bins; ++j)
    for (int c = 0; c < linear.cols; ++c) out.at(j, c) = lerp_at(linear, pos[j], c);
  return out;
}

Grid resample_rows_to_linear(const Grid& log_grid, int linear_bins) {
  if (log_grid.rows < 2) throw ValidationError("inv_log_freq_rescale: need at least 2 log rows");
  if (linear_bins < 3) throw ValidationError("inv_log_freq_rescale: need at least 3 linear bins");
  const double top = std::log(static_cast<double>(linear_bins - 1));
  Grid out(linear_bins, log_grid.cols);
  for (int k = 0; k < linear_bins; ++k) {
    // Log-grid coordinate of linear bin k; DC and bin 1 map onto the first row.
    const double u = k <= 1 ? 0.0 : std::log(static_cast<double>(k)) / top * (log_grid.rows - 1);
    for (int c = 0; c < log_grid.cols; ++c) out.at(k, c) = lerp_at(log_grid, u, c);
  }
  return out;
}

MagnitudeSpectrogram log_freq_rescale(const MagnitudeSpectrogram& m, int out_bins) {
  if (m.axis != FrequencyAxis::kLinear) throw ValidationError("log_freq_rescale: input is not on a linear axis");
  MagnitudeSpectrogram out = m;
  out.grid = resample_rows_to_log(m.grid, out_bins);
  out.axis = FrequencyAxis::kLog;
  out.linear_bins = m.grid.rows;
  return out;
}

MagnitudeSpectrogram inv_log_freq_rescale(const MagnitudeSpectrogram& m) {
  if (m.axis != FrequencyAxis::kLog) throw ValidationError("inv_log_freq_rescale: input is not on a log axis");
  MagnitudeSpectrogram out = m;
  out.grid = resample_rows_to_linear(m.grid, m.linear_bins);
  out.axis = FrequencyAxis::kLinear;
  return out;
}

Waveform mix(const Waveform& a, const Waveform& b) {
  if (a.samples.size() != b.samples.size())
    throw ValidationError("mix: length mismatch " + std::to_string(a.samples.size()) + " vs " +
                          std::to_string(b.samples.size()));
  if (a.sample_rate_hz != b.sample_rate_hz)
    throw ValidationError("mix: sample rate mismatch " + std::to_string(a.sample_rate_hz) + " vs " +
                          std::to_string(b.sample_rate_hz));
  Waveform out;
  out.sample_rate_hz = a.sample_rate_hz;
  out.samples.resize(a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) out.samples[i] = a.samples[i] + b.samples[i];
  return out;
}

void write_waveform(const std::filesystem::path& path, const Waveform& w) {
  w.validate();
  io::write_f32(path, w.samples);
  io::write_json(io::sidecar_path(path), {{"sample_rate_hz", w.sample_rate_hz}, {"length", w.samples.size()}});
}

namespace {

Waveform read_wav16(const std::filesystem::path& path) {
  const std::string buf = io::read_text(path);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  auto u16 = [&](std::size_t o) { return static_cast<unsigned>(p[o] | (p[o + 1] << 8)); };
  auto u32 = [&](std::size_t o) {
    return static_cast<std::uint32_t>(p[o]) | (static_cast<std::uint32_t>(p[o + 1]) << 8) |
           (static_cast<std::uint32_t>(p[o + 2]) << 16) | (static_cast<std::uint32_t>(p[o + 3]) << 24);
  };
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0)
    throw ValidationError("wav: '" + path.string() + "' is not a RIFF/WAVE file");
  std::size_t off = 12;
  int rate = 0;
  bool have_fmt = false;
  while (off + 8 <= buf.size()) {
    const std::string id = buf.substr(off, 4);
    const std::size_t len = u32(off + 4);
    const std::size_t body = off + 8;
    if (body + len > buf.size()) throw ValidationError("wav: truncated chunk '" + id + "'");
    if (id == "fmt ") {
      if (len < 16 || u16(body) != 1 || u16(body + 2) != 1 || u16(body + 14) != 16)
        throw ValidationError("wav: only 16-bit mono PCM is supported");
      rate = static_cast<int>(u32(body + 4));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ValidationError("wav: data chunk before fmt chunk");
      Waveform w;
      w.sample_rate_hz = rate;
      w.samples.resize(len / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] = static_cast<std::int16_t>(u16(body + 2 * i)) / 32768.0;
      return w;
    }
    off = body + len + (len & 1);
  }
  throw ValidationError("wav: no data chunk in '" + path.string() + "'");
}

}  // namespace

Waveform read_waveform(const std::filesystem::path& path) {
  if (path.extension() == ".wav") return read_wav16(path);
  const auto meta = io::read_json(io::sidecar_path(path));
  Waveform w;
  w.sample_rate_hz = meta.at("sample_rate_hz").get<int>();
  w.samples = io::read_f32(path);
  if (w.samples.size() != meta.at("length").get<std::size_t>())
    throw ValidationError("waveform: '" + path.string() + "' length does not match its sidecar");
  w.validate();
  return w;
}

void write_wav16(const std::filesystem::path& path, const Waveform& w) {
  w.validate();
  std::string buf;
  auto put16 = [&](unsigned v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
  };
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  const auto data_len = static_cast<std::uint32_t>(w.samples.size() * 2);
  buf += "RIFF";
  put32(36 + data_len);
  buf += "WAVEfmt ";
  put32(16);
  put16(1);
  put16(1);
  put32(static_cast<std::uint32_t>(w.sample_rate_hz));
  put32(static_cast<std::uint32_t>(w.sample_rate_hz * 2));
  put16(2);
  put16(16);
  buf += "data";
  put32(data_len);
  for (double v : w.samples) {
    const double c = std::clamp(v, -1.0, 32767.0 / 32768.0);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32768.0))));
  }
  io::write_text(path, buf);
}

}  // namespace consep::dsp
