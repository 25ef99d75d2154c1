// src/synthdata.cpp

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

#include "consep/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "consep/error.hpp"
#include "consep/io.hpp"
#include "consep/random.hpp"

namespace consep::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOnsetDecayS = 0.05;
constexpr double kHarmonicCeiling = 0.95;  // fraction of Nyquist a partial may reach

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// ADSR level at time tau after onset for a note gated for `gate` seconds.
double envelope(const CategorySpec& s, double tau, double gate) {
  auto held = [&](double t) {
    if (t < s.attack_s) return t / s.attack_s;
    if (t < s.attack_s + s.decay_s) return 1.0 - (1.0 - s.sustain) * (t - s.attack_s) / s.decay_s;
    return s.sustain;
  };
  if (tau < 0.0) return 0.0;
  if (tau < gate) return held(tau);
  const double r = (tau - gate) / s.release_s;
  return r >= 1.0 ? 0.0 : held(gate) * (1.0 - r);
}

double spectral_centroid_hz(const CategorySpec& s, double f0) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < kHarmonics; ++k) {
    const double e = s.profile[k] * s.profile[k];
    num += e * (k + 1) * f0;
    den += e;
  }
  return num / den;
}

std::string clip_stem(int category, int video) {
  return "clips/c" + std::to_string(category) + "_v" + std::to_string(video);
}

}  // namespace

void CategorySpec::validate(int sample_rate_hz) const {
  double total = 0.0;
  for (double a : profile) {
    if (!(a >= 0.0)) throw ValidationError("category " + std::to_string(category_id) + ": negative harmonic amplitude");
    total += a;
  }
  if (total <= 0.0) throw ValidationError("category " + std::to_string(category_id) + ": all harmonic amplitudes are zero");
  const double limit = sample_rate_hz / 16.0;
  if (!(f0_min_hz > 50.0 && f0_max_hz < limit && f0_min_hz <= f0_max_hz))
    throw ValidationError("category " + std::to_string(category_id) + ": fundamental range [" +
                          std::to_string(f0_min_hz) + ", " + std::to_string(f0_max_hz) + "] not inside (50, " +
                          std::to_string(limit) + ")");
  if (!(attack_s > 0 && decay_s > 0 && release_s > 0 && sustain >= 0 && sustain <= 1 && note_min_s > 0 &&
        note_min_s <= note_max_s && vibrato_rate_hz > 0 && vibrato_depth >= 0))
    throw ValidationError("category " + std::to_string(category_id) + ": invalid envelope or note parameters");
}

nlohmann::json CategorySpec::to_json() const {
  return {{"category_id", category_id}, {"profile", profile},         {"f0_min_hz", f0_min_hz},
          {"f0_max_hz", f0_max_hz},     {"attack_s", attack_s},       {"decay_s", decay_s},
          {"sustain", sustain},         {"release_s", release_s},     {"vibrato_rate_hz", vibrato_rate_hz},
          {"vibrato_depth", vibrato_depth}, {"note_min_s", note_min_s}, {"note_max_s", note_max_s},
          {"seed", seed}};
}

CategorySpec CategorySpec::from_json(const nlohmann::json& j) {
  CategorySpec s;
  s.category_id = j.at("category_id").get<int>();
  s.profile = j.at("profile").get<std::array<double, kHarmonics>>();
  s.f0_min_hz = j.at("f0_min_hz").get<double>();
  s.f0_max_hz = j.at("f0_max_hz").get<double>();
  s.attack_s = j.at("attack_s").get<double>();
  s.decay_s = j.at("decay_s").get<double>();
  s.sustain = j.at("sustain").get<double>();
  s.release_s = j.at("release_s").get<double>();
  s.vibrato_rate_hz = j.at("vibrato_rate_hz").get<double>();
  s.vibrato_depth = j.at("vibrato_depth").get<double>();
  s.note_min_s = j.at("note_min_s").get<double>();
  s.note_max_s = j.at("note_max_s").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

double profile_distance(const CategorySpec& a, const CategorySpec& b) {
  double ss = 0.0;
  for (int k = 0; k < kHarmonics; ++k) ss += (a.profile[k] - b.profile[k]) * (a.profile[k] - b.profile[k]);
  return std::sqrt(ss);
}

CategorySpec make_category(std::uint64_t seed, int sample_rate_hz) {
  if (sample_rate_hz < 1600) throw ValidationError("make_category: sample rate too low for the 50 Hz floor");
  std::mt19937_64 rng(splitmix64(seed));
  CategorySpec s;
  s.seed = seed;
  // Random spectral tilt times per-partial jitter, then unit norm.
  const double tilt = uniform(rng, 0.3, 2.0);
  double norm = 0.0;
  for (int k = 0; k < kHarmonics; ++k) {
    const double keep = uniform(rng, 0.0, 1.0) < 0.2 && k > 0 ? 0.0 : 1.0;
    s.profile[k] = keep * uniform(rng, 0.2, 1.0) / std::pow(k + 1.0, tilt);
    norm += s.profile[k] * s.profile[k];
  }
  norm = std::sqrt(norm);
  for (double& a : s.profile) a /= norm;

  const double ceiling = sample_rate_hz / 16.0;
  const double lo = 55.0, hi = ceiling * 0.98;
  // Register spans at most an octave and a half.
  const double log_lo = std::log(lo), log_hi = std::log(hi / 1.5);
  s.f0_min_hz = std::exp(uniform(rng, log_lo, log_hi));
  s.f0_max_hz = std::min(s.f0_min_hz * uniform(rng, 1.3, 1.5), hi);
  s.attack_s = uniform(rng, 0.005, 0.08);
  s.decay_s = uniform(rng, 0.05, 0.4);
  s.sustain = uniform(rng, 0.2, 0.9);
  s.release_s = uniform(rng, 0.03, 0.2);
  s.vibrato_rate_hz = uniform(rng, 3.0, 8.0);
  s.vibrato_depth = uniform(rng, 0.0, 0.02);
  s.note_min_s = uniform(rng, 0.15, 0.4);
  s.note_max_s = s.note_min_s + uniform(rng, 0.1, 0.6);
  s.validate(sample_rate_hz);
  return s;
}

std::vector<CategorySpec> make_category_set(int count, std::uint64_t seed, int sample_rate_hz) {
  if (count < 0) throw ValidationError("make_category_set: negative count");
  std::vector<CategorySpec> out;
  std::uint64_t draw = 0;
  while (static_cast<int>(out.size()) < count) {
    CategorySpec c = make_category(derive_seed(seed, {draw++}), sample_rate_hz);
    bool distinct = true;
    for (const auto& o : out) distinct = distinct && profile_distance(c, o) > kMinProfileDistance;
    if (!distinct) continue;
    c.category_id = static_cast<int>(out.size());
    out.push_back(c);
  }
  return out;
}

int motion_frame_count(std::size_t samples, int sample_rate_hz, double motion_fps) {
  return static_cast<int>(std::floor(static_cast<double>(samples) * motion_fps / sample_rate_hz + 1e-9));
}

RenderedClip render_clip(const CategorySpec& spec, double duration_s, std::uint64_t seed, const RenderOptions& opts) {
  if (!(duration_s > 0.0)) throw ValidationError("render_clip: duration must be positive");
  if (!(opts.motion_fps > 0.0) || opts.motion_noise < 0.0 || !(opts.peak > 0.0))
    throw ValidationError("render_clip: invalid render options");
  spec.validate(opts.sample_rate_hz);
  const int sr = opts.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sr));
  std::mt19937_64 rng(derive_seed(seed, {0}));

  RenderedClip clip;
  for (double t = 0.0; t < duration_s;) {
    Note note;
    note.onset_s = t + (uniform(rng, 0.0, 1.0) < 0.3 ? uniform(rng, 0.05, 0.3) : 0.02);
    note.duration_s = uniform(rng, spec.note_min_s, spec.note_max_s);
    note.f0_hz = std::exp(uniform(rng, std::log(spec.f0_min_hz), std::log(spec.f0_max_hz)));
    note.gain = uniform(rng, 0.5, 1.0);
    note.vibrato_phase = uniform(rng, 0.0, kTwoPi);
    if (note.onset_s >= duration_s) break;
    clip.notes.push_back(note);
    t = note.onset_s + note.duration_s;
  }

  // Per-sample note state, shared by the audio and motion renderers.
  std::vector<double> audio(n, 0.0), energy(n, 0.0), onset(n, 0.0), pitch(n, 0.0), vibrato(n, 0.0);
  const double nyquist = sr / 2.0;
  for (const Note& note : clip.notes) {
    const auto first = static_cast<std::size_t>(std::ceil(note.onset_s * sr));
    const double end_s = note.onset_s + note.duration_s + spec.release_s;
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(end_s * sr)));
    const double centroid = spectral_centroid_hz(spec, note.f0_hz) / 1000.0;
    const double w = kTwoPi * spec.vibrato_rate_hz;
    for (std::size_t i = first; i < last; ++i) {
      const double tau = static_cast<double>(i) / sr - note.onset_s;
      const double env = note.gain * envelope(spec, tau, note.duration_s);
      // Phase of f0 * (1 + depth * sin(w tau + phi)), integrated in closed form.
      const double vib = std::sin(w * tau + note.vibrato_phase);
      const double theta = kTwoPi * note.f0_hz *
                           (tau - spec.vibrato_depth / w * (std::cos(w * tau + note.vibrato_phase) -
                                                            std::cos(note.vibrato_phase)));
      double v = 0.0;
      for (int k = 0; k < kHarmonics; ++k) {
        if ((k + 1) * note.f0_hz * (1.0 + spec.vibrato_depth) >= kHarmonicCeiling * nyquist) break;
        v += spec.profile[k] * std::sin((k + 1) * theta);
      }
      audio[i] += env * v;
      energy[i] += env;
      onset[i] += note.gain * std::exp(-tau / kOnsetDecayS);
      pitch[i] += env * centroid;
      vibrato[i] += env * vib;
    }
  }

  double peak = 0.0;
  for (double v : audio) peak = std::max(peak, std::abs(v));
  const double gain = peak > 0.0 ? opts.peak / peak : 0.0;
  clip.audio.sample_rate_hz = sr;
  clip.audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) clip.audio.samples[i] = audio[i] * gain;

  // Frame averages of the note-state curves.
  const int frames = motion_frame_count(n, sr, opts.motion_fps);
  clip.motion = Array({frames, kMotionChannels});
  const std::vector<double>* curves[kMotionChannels] = {&onset, &energy, &pitch, &vibrato};
  std::mt19937_64 noise_rng(derive_seed(seed, {1}));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int f = 0; f < frames; ++f) {
    const auto a = static_cast<std::size_t>(std::llround(f * sr / opts.motion_fps));
    const auto b = std::min(n, static_cast<std::size_t>(std::llround((f + 1) * sr / opts.motion_fps)));
    for (int c = 0; c < kMotionChannels; ++c) {
      double acc = 0.0;
      for (std::size_t i = a; i < b; ++i) acc += (*curves[c])[i];
      clip.motion[static_cast<std::size_t>(f) * kMotionChannels + c] = b > a ? acc / static_cast<double>(b - a) : 0.0;
    }
  }
  // Noise is drawn even at zero sigma so the stream layout does not depend on it.
  for (double& v : clip.motion.data()) v += opts.motion_noise * noise(noise_rng);
  return clip;
}

void DatasetManifest::validate() const {
  if (sample_rate_hz <= 0 || !(motion_fps > 0.0) || motion_channels <= 0)
    throw ValidationError("manifest: invalid sample rate, motion rate, or channel count");
  std::set<int> known;
  for (const auto& c : categories) {
    c.validate(sample_rate_hz);
    if (!known.insert(c.category_id).second)
      throw ValidationError("manifest: duplicate category id " + std::to_string(c.category_id));
  }
  std::set<int> train(train_categories.begin(), train_categories.end());
  for (int t : test_categories)
    if (train.count(t)) throw ValidationError("manifest: category " + std::to_string(t) + " is in both splits");
  for (const auto* split : {&train_categories, &test_categories}) {
    for (int c : *split) {
      if (!known.count(c)) throw ValidationError("manifest: split names unknown category " + std::to_string(c));
      std::set<int> videos;
      for (int i : clips_of(c)) videos.insert(clips[i].video_id);
      if (videos.size() < 2)
        throw ValidationError("manifest: category " + std::to_string(c) +
                              " has fewer than two videos; template sampling needs a second video");
    }
  }
  for (const auto& r : clips)
    if (!known.count(r.category_id))
      throw ValidationError("manifest: clip refers to unknown category " + std::to_string(r.category_id));
}

std::vector<int> DatasetManifest::clips_of(int category_id) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < clips.size(); ++i)
    if (clips[i].category_id == category_id) out.push_back(static_cast<int>(i));
  return out;
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json cats = nlohmann::json::array(), recs = nlohmann::json::array();
  for (const auto& c : categories) cats.push_back(c.to_json());
  for (const auto& r : clips)
    recs.push_back({{"category_id", r.category_id},
                    {"video_id", r.video_id},
                    {"waveform", r.waveform_path},
                    {"motion", r.motion_path},
                    {"duration_s", r.duration_s},
                    {"seed", r.seed}});
  return {{"format", "consep-manifest"}, {"version", 1},
          {"sample_rate_hz", sample_rate_hz}, {"motion_fps", motion_fps},
          {"motion_channels", motion_channels}, {"train_categories", train_categories},
          {"test_categories", test_categories}, {"categories", cats},
          {"clips", recs}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "consep-manifest") throw ValidationError("not a consep manifest");
    DatasetManifest m;
    m.sample_rate_hz = j.at("sample_rate_hz").get<int>();
    m.motion_fps = j.at("motion_fps").get<double>();
    m.motion_channels = j.at("motion_channels").get<int>();
    m.train_categories = j.at("train_categories").get<std::vector<int>>();
    m.test_categories = j.at("test_categories").get<std::vector<int>>();
    for (const auto& c : j.at("categories")) m.categories.push_back(CategorySpec::from_json(c));
    for (const auto& r : j.at("clips")) {
      ClipRecord rec;
      rec.category_id = r.at("category_id").get<int>();
      rec.video_id = r.at("video_id").get<int>();
      rec.waveform_path = r.at("waveform").get<std::string>();
      rec.motion_path = r.at("motion").get<std::string>();
      rec.duration_s = r.at("duration_s").get<double>();
      rec.seed = r.at("seed").get<std::uint64_t>();
      m.clips.push_back(rec);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  DatasetManifest m = DatasetManifest::from_json(io::read_json(path));
  m.validate();
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) { io::write_json(path, m.to_json()); }

DatasetManifest generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& dir, int jobs) {
  if (cfg.train_categories < 2 || cfg.test_categories < 2)
    throw ValidationError("gen-data: each split needs at least two categories to form cross-category pairs");
  if (cfg.videos_per_category < 2)
    throw ValidationError("gen-data: videos per category must be at least 2 (a template needs a second video)");
  if (!(cfg.clip_seconds > 0.0)) throw ValidationError("gen-data: clip length must be positive");

  DatasetManifest m;
  m.sample_rate_hz = cfg.sample_rate_hz;
  m.motion_fps = cfg.motion_fps;
  const int total = cfg.train_categories + cfg.test_categories;
  m.categories = make_category_set(total, derive_seed(cfg.seed, {0}), cfg.sample_rate_hz);
  std::vector<int> ids(total);
  for (int i = 0; i < total; ++i) ids[i] = i;
  std::mt19937_64 split_rng(derive_seed(cfg.seed, {1}));
  std::shuffle(ids.begin(), ids.end(), split_rng);
  m.train_categories.assign(ids.begin(), ids.begin() + cfg.train_categories);
  m.test_categories.assign(ids.begin() + cfg.train_categories, ids.end());
  std::sort(m.train_categories.begin(), m.train_categories.end());
  std::sort(m.test_categories.begin(), m.test_categories.end());

  for (int c = 0; c < total; ++c)
    for (int v = 0; v < cfg.videos_per_category; ++v) {
      ClipRecord r;
      r.category_id = c;
      r.video_id = v;
      r.waveform_path = clip_stem(c, v) + ".f32";
      r.motion_path = clip_stem(c, v) + ".motion.f32";
      r.duration_s = cfg.clip_seconds;
      r.seed = derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(v)});
      m.clips.push_back(r);
    }
  m.validate();

  std::filesystem::create_directories(dir / "clips");
  RenderOptions opts;
  opts.sample_rate_hz = cfg.sample_rate_hz;
  opts.motion_fps = cfg.motion_fps;
  opts.motion_noise = cfg.motion_noise;
  const int count = static_cast<int>(m.clips.size());
  std::vector<std::string> failures(count);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int i = 0; i < count; ++i) {
    try {
      const ClipRecord& r = m.clips[i];
      RenderedClip clip = render_clip(m.categories[r.category_id], r.duration_s, r.seed, opts);
      dsp::write_waveform(dir / r.waveform_path, clip.audio);
      io::write_f32(dir / r.motion_path, clip.motion.storage());
      io::write_json(io::sidecar_path(dir / r.motion_path),
                     {{"rows", clip.motion.dim(0)}, {"cols", clip.motion.dim(1)}, {"fps", cfg.motion_fps}});
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw ValidationError("gen-data: " + f);
  write_manifest(dir / "manifest.json", m);
  return m;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset ds;
  ds.manifest = read_manifest(manifest_path);
  const auto root = manifest_path.parent_path();
  for (const auto& r : ds.manifest.clips) {
    LoadedClip c;
    c.record = r;
    c.audio = dsp::read_waveform(root / r.waveform_path);
    if (c.audio.sample_rate_hz != ds.manifest.sample_rate_hz)
      throw ValidationError("dataset: " + r.waveform_path + " has the wrong sample rate");
    const auto meta = io::read_json(io::sidecar_path(root / r.motion_path));
    const int rows = meta.at("rows").get<int>(), cols = meta.at("cols").get<int>();
    if (cols != ds.manifest.motion_channels)
      throw ValidationError("dataset: " + r.motion_path + " has " + std::to_string(cols) + " channels");
    c.motion = Array({rows, cols}, io::read_f32(root / r.motion_path));
    ds.clips.push_back(std::move(c));
  }
  return ds;
}

int SegmentGeometry::max_motion_start(std::size_t clip_samples) const {
  const int frames = motion_frame_count(clip_samples, sample_rate_hz, motion_fps);
  int m = frames - motion_frames;
  while (m >= 0 && sample_offset(m) + static_cast<std::size_t>(samples) > clip_samples) --m;
  return m;
}

std::size_t SegmentGeometry::sample_offset(int motion_start) const {
  return static_cast<std::size_t>(std::llround(motion_start * sample_rate_hz / motion_fps));
}

Segment extract_segment(const Dataset& ds, const ClipWindow& w, const SegmentGeometry& g) {
  if (w.clip < 0 || w.clip >= static_cast<int>(ds.clips.size()))
    throw ValidationError("extract_segment: clip index " + std::to_string(w.clip) + " out of range");
  const LoadedClip& c = ds.clips[w.clip];
  if (w.motion_start < 0 || w.motion_start > g.max_motion_start(c.audio.size()))
    throw ValidationError("extract_segment: window start " + std::to_string(w.motion_start) + " out of range");
  Segment s;
  const std::size_t a = g.sample_offset(w.motion_start);
  s.audio.sample_rate_hz = c.audio.sample_rate_hz;
  s.audio.samples.assign(c.audio.samples.begin() + a, c.audio.samples.begin() + a + g.samples);
  const int ch = c.motion.dim(1);
  s.motion = Array({g.motion_frames, ch});
  std::copy_n(c.motion.data().begin() + static_cast<std::size_t>(w.motion_start) * ch,
              static_cast<std::size_t>(g.motion_frames) * ch, s.motion.data().begin());
  return s;
}

namespace {

// Pair of cross-category windows with templates, drawn from `categories`.
PairDraw draw_pair(const Dataset& ds, const std::vector<int>& categories, const SegmentGeometry& g,
                   std::mt19937_64& rng) {
  const int n = static_cast<int>(categories.size());
  const int i = uniform_int(rng, 0, n - 1);
  int j = uniform_int(rng, 0, n - 2);
  if (j >= i) ++j;
  auto pick = [&](int category, ClipWindow* clip, ClipWindow* templ) {
    const std::vector<int> members = ds.manifest.clips_of(category);
    const int a = uniform_int(rng, 0, static_cast<int>(members.size()) - 1);
    int b = a;
    while (ds.manifest.clips[members[b]].video_id == ds.manifest.clips[members[a]].video_id)
      b = uniform_int(rng, 0, static_cast<int>(members.size()) - 1);
    for (auto [w, idx] : {std::pair{clip, members[a]}, std::pair{templ, members[b]}}) {
      const int last = g.max_motion_start(ds.clips[idx].audio.size());
      if (last < 0) throw ValidationError("clip shorter than one segment");
      w->clip = idx;
      w->motion_start = uniform_int(rng, 0, last);
    }
  };
  PairDraw d;
  pick(categories[i], &d.p, &d.template_p);
  pick(categories[j], &d.q, &d.template_q);
  return d;
}

}  // namespace

PairDraw sample_training_pair(const Dataset& ds, const SegmentGeometry& g, std::mt19937_64& rng) {
  if (ds.manifest.train_categories.size() < 2)
    throw ValidationError("sample_training_pair: training split needs two categories");
  return draw_pair(ds, ds.manifest.train_categories, g, rng);
}

std::vector<TestPair> build_test_set(const Dataset& ds, int n_pairs, std::uint64_t seed, const SegmentGeometry& g) {
  if (n_pairs <= 0) throw ValidationError("build_test_set: pair count must be positive");
  if (ds.manifest.test_categories.size() < 2)
    throw ValidationError("build_test_set: test split needs at least two categories");
  std::mt19937_64 rng(derive_seed(seed, {3}));
  std::vector<TestPair> out;
  for (int k = 0; k < n_pairs; ++k) out.push_back({k, draw_pair(ds, ds.manifest.test_categories, g, rng)});
  return out;
}

nlohmann::json test_set_to_json(const std::vector<TestPair>& pairs) {
  nlohmann::json arr = nlohmann::json::array();
  auto win = [](const ClipWindow& w) { return nlohmann::json::array({w.clip, w.motion_start}); };
  for (const auto& p : pairs)
    arr.push_back({{"pair_id", p.pair_id},
                   {"p", win(p.draw.p)},
                   {"q", win(p.draw.q)},
                   {"template_p", win(p.draw.template_p)},
                   {"template_q", win(p.draw.template_q)}});
  return arr;
}

std::vector<TestPair> test_set_from_json(const nlohmann::json& j) {
  auto win = [](const nlohmann::json& a) { return ClipWindow{a.at(0).get<int>(), a.at(1).get<int>()}; };
  std::vector<TestPair> out;
  try {
    for (const auto& e : j) {
      TestPair p;
      p.pair_id = e.at("pair_id").get<int>();
      p.draw = {win(e.at("p")), win(e.at("q")), win(e.at("template_p")), win(e.at("template_q"))};
      out.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("test set: ") + e.what());
  }
  return out;
}

}  // namespace consep::synth
