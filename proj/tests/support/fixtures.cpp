// tests/support/fixtures.cpp

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

#include "support/fixtures.hpp"

namespace consep::testing {

SpectrogramConfig small_spectrogram() {
  SpectrogramConfig s;
  s.grid_side = 32;
  return s;
}

NetworkConfig small_network(unsigned long long seed) {
  NetworkConfig c;
  c.grid_side = 32;
  c.unet_channels = {4, 4, 8, 8, 8};
  c.audio_dim = 8;
  c.motion_frames = 8;
  c.vision_channels = {8};
  c.vision_dim = 8;
  c.consistency_width = 4;
  c.consistency_blocks = 3;
  c.embed_dim = 16;
  c.init_seed = seed;
  return c;
}

synth::Dataset make_small_dataset(const std::filesystem::path& dir, int train_categories, int test_categories,
                                  int videos, double clip_seconds, std::uint64_t seed) {
  synth::DatasetConfig cfg;
  cfg.train_categories = train_categories;
  cfg.test_categories = test_categories;
  cfg.videos_per_category = videos;
  cfg.clip_seconds = clip_seconds;
  cfg.motion_fps = small_spectrogram().motion_fps(small_network().motion_frames);
  cfg.seed = seed;
  synth::generate_dataset(cfg, dir);
  return synth::load_dataset(dir / "manifest.json");
}

train::TrainConfig small_train_config(long iters, std::uint64_t seed) {
  train::TrainConfig c;
  c.batch_size = 2;
  c.total_iters = iters;
  c.seed = seed;
  c.log_interval = 1;
  c.spectrogram = small_spectrogram();
  c.network = small_network(seed);
  return c;
}

}  // namespace consep::testing
