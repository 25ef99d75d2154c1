// tests/support/fixtures.hpp

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

#ifndef CONSEP_TESTS_SUPPORT_FIXTURES_HPP_
#define CONSEP_TESTS_SUPPORT_FIXTURES_HPP_

#include <filesystem>

#include "consep/networks.hpp"
#include "consep/pipeline.hpp"
#include "consep/synthdata.hpp"
#include "consep/trainer.hpp"

namespace consep::testing {

/// Grid 32 with the default STFT.
SpectrogramConfig small_spectrogram();

/// A few thousand parameters; fast enough for per-test training runs.
NetworkConfig small_network(unsigned long long seed = 1);

/// Writes a dataset sized for tests into `dir` and loads it back.
synth::Dataset make_small_dataset(const std::filesystem::path& dir, int train_categories, int test_categories,
                                  int videos, double clip_seconds, std::uint64_t seed);

/// Training config tied to small_spectrogram() and small_network().
train::TrainConfig small_train_config(long iters, std::uint64_t seed = 1);

}  // namespace consep::testing

#endif  // CONSEP_TESTS_SUPPORT_FIXTURES_HPP_
