// include/consep/synthdata.hpp

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

#ifndef CONSEP_SYNTHDATA_HPP_
#define CONSEP_SYNTHDATA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "consep/array.hpp"
#include "consep/dsp.hpp"
#include "json.hpp"

namespace consep::synth {

inline constexpr int kHarmonics = 8;
inline constexpr int kMotionChannels = 4;  // onset, energy, pitch proxy, vibrato phase
inline constexpr double kMinProfileDistance = 0.1;

/// Parametric instrument: timbre, register, envelope, vibrato.
struct CategorySpec {
  int category_id = 0;
  std::array<double, kHarmonics> profile{};  // unit L2 norm, nonnegative
  double f0_min_hz = 0.0, f0_max_hz = 0.0;
  double attack_s = 0.0, decay_s = 0.0, sustain = 0.0, release_s = 0.0;
  double vibrato_rate_hz = 0.0, vibrato_depth = 0.0;  // depth as a fraction of f0
  double note_min_s = 0.0, note_max_s = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError on negative or all-zero profiles and on an
  /// f0 range outside (50, sample_rate/16).
  void validate(int sample_rate_hz) const;
  nlohmann::json to_json() const;
  static CategorySpec from_json(const nlohmann::json& j);
};

double profile_distance(const CategorySpec& a, const CategorySpec& b);

/// Deterministic in (seed, sample rate).
CategorySpec make_category(std::uint64_t seed, int sample_rate_hz);

/// `count` categories with ids 0..count-1 whose profiles are pairwise more
/// than kMinProfileDistance apart; candidates too close to an accepted one
/// are rejected and redrawn from the next seed.
std::vector<CategorySpec> make_category_set(int count, std::uint64_t seed, int sample_rate_hz);

struct Note {
  double onset_s = 0.0;
  double duration_s = 0.0;  // gate length; release follows
  double f0_hz = 0.0;
  double gain = 0.0;
  double vibrato_phase = 0.0;
};

struct RenderedClip {
  dsp::Waveform audio;
  Array motion;  // [frames, kMotionChannels]
  std::vector<Note> notes;
};

struct RenderOptions {
  int sample_rate_hz = 8000;
  double motion_fps = 24.0;
  double motion_noise = 0.05;  // std of additive Gaussian noise on motion features
  double peak = 0.5;           // waveform peak after normalisation
};

/// Random note sequence of `spec`, rendered to audio and to motion features
/// derived from the same notes. Deterministic in (spec, duration, seed, opts).
RenderedClip render_clip(const CategorySpec& spec, double duration_s, std::uint64_t seed,
                         const RenderOptions& opts = {});

/// Motion frames for a clip of `samples` samples.
int motion_frame_count(std::size_t samples, int sample_rate_hz, double motion_fps);

struct ClipRecord {
  int category_id = 0;
  int video_id = 0;
  std::string waveform_path;  // relative to the manifest directory
  std::string motion_path;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  int sample_rate_hz = 0;
  double motion_fps = 0.0;
  int motion_channels = kMotionChannels;
  std::vector<CategorySpec> categories;
  std::vector<int> train_categories;
  std::vector<int> test_categories;
  std::vector<ClipRecord> clips;

  /// Disjoint splits, every split category known and holding at least two
  /// videos, clip categories known.
  void validate() const;
  std::vector<int> clips_of(int category_id) const;
  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

struct DatasetConfig {
  int train_categories = 8;
  int test_categories = 3;
  int videos_per_category = 12;
  double clip_seconds = 6.0;
  int sample_rate_hz = 8000;
  double motion_fps = 24.0;
  double motion_noise = 0.05;
  std::uint64_t seed = 1;
};

/// Renders every clip into `dir` (clips/…) and writes `dir/manifest.json`.
DatasetManifest generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& dir, int jobs = 1);

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

/// A clip held in memory.
struct LoadedClip {
  ClipRecord record;
  dsp::Waveform audio;
  Array motion;  // [frames, channels]
};

/// Manifest plus every clip's samples.
struct Dataset {
  DatasetManifest manifest;
  std::vector<LoadedClip> clips;  // index-aligned with manifest.clips
};

Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Fixed-length window on a clip. Audio and motion are cut at the same time:
/// the audio window starts at the first sample of motion frame `motion_start`.
struct SegmentGeometry {
  int samples = 0;        // audio samples per segment
  int motion_frames = 0;  // T_v
  int sample_rate_hz = 0;
  double motion_fps = 0.0;

  /// Last valid motion start frame for a clip of `clip_samples` samples.
  int max_motion_start(std::size_t clip_samples) const;
  std::size_t sample_offset(int motion_start) const;
};

struct ClipWindow {
  int clip = 0;          // index into the dataset's clip list
  int motion_start = 0;  // first motion frame of the window
};

struct Segment {
  dsp::Waveform audio;
  Array motion;  // [T_v, channels]
};

Segment extract_segment(const Dataset& ds, const ClipWindow& w, const SegmentGeometry& g);

/// Two clips from different categories plus, for each, a template window
/// from another video of the same category.
struct PairDraw {
  ClipWindow p, q;
  ClipWindow template_p, template_q;
};

/// Training draw over the train split.
PairDraw sample_training_pair(const Dataset& ds, const SegmentGeometry& g, std::mt19937_64& rng);

struct TestPair {
  int pair_id = 0;
  PairDraw draw;
};

/// Deterministic list of cross-category pairs from the test split.
std::vector<TestPair> build_test_set(const Dataset& ds, int n_pairs, std::uint64_t seed, const SegmentGeometry& g);

nlohmann::json test_set_to_json(const std::vector<TestPair>& pairs);
std::vector<TestPair> test_set_from_json(const nlohmann::json& j);

}  // namespace consep::synth

#endif  // CONSEP_SYNTHDATA_HPP_
