// include/consep/trainer.hpp

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

#ifndef CONSEP_TRAINER_HPP_
#define CONSEP_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "consep/ad/checkpoint.hpp"
#include "consep/ad/optim.hpp"
#include "consep/losses.hpp"
#include "consep/networks.hpp"
#include "consep/objective.hpp"
#include "consep/pipeline.hpp"
#include "consep/synthdata.hpp"
#include "json.hpp"

namespace consep::train {

struct LearningRates {
  double audio = 1e-3;
  double fusion = 1e-3;
  double vision = 1e-4;
  double consistency = 1e-4;

  double for_group(const std::string& group) const;
};

struct TrainConfig {
  int batch_size = 8;
  long total_iters = 2000;
  double lambda = losses::kTrainLambda;
  LearningRates lr;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t seed = 1;
  int log_interval = 10;
  long checkpoint_interval = 0;  // 0: only at the end
  ConsistencyTerms terms;
  SpectrogramConfig spectrogram;
  NetworkConfig network;

  void validate() const;
  /// Consistency losses enter the objective at all.
  bool consistency_active() const { return lambda > 0.0 && terms.any(); }
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainBatch {
  long iter = 0;
  std::vector<synth::PairDraw> draws;
  SeparationQuery query;
  PairTruth truth;
};

/// Batch for optimizer step `iter`; deterministic in (cfg.seed, iter).
/// Throws ValidationError if any drawn clip is outside the train split.
TrainBatch make_batch(const synth::Dataset& ds, const TrainConfig& cfg, const synth::SegmentGeometry& g, long iter);

/// Forward pass and loss assembly. `total` receives the differentiable objective.
losses::LossBreakdown compute_loss(SeparationModel& model, const TrainBatch& batch, const TrainConfig& cfg,
                                   ad::Tensor* total);

class Trainer {
 public:
  Trainer(SeparationModel& model, TrainConfig cfg);

  /// One optimizer step on `batch` (which must be for iteration()).
  /// Throws NumericalError on a non-finite loss, before any parameter moves.
  losses::LossBreakdown step(const TrainBatch& batch);
  long iteration() const { return iter_; }
  const TrainConfig& config() const { return cfg_; }

  /// Model, optimizer moments and iteration count.
  ad::Checkpoint checkpoint() const;
  /// Restores optimizer moments and iteration from a checkpoint written by
  /// checkpoint(); the model itself is loaded separately.
  void resume(const ad::Checkpoint& ckpt);

 private:
  struct Group {
    std::string name;
    std::vector<std::string> names;
    std::unique_ptr<ad::Adam> adam;
  };
  SeparationModel& model_;
  TrainConfig cfg_;
  std::vector<Group> groups_;
  long iter_ = 0;
};

/// Parameters the objective reaches under `cfg`, grouped by sub-network.
std::map<std::string, std::vector<ad::ParameterRef>> trainable_groups(SeparationModel& model, const TrainConfig& cfg);

std::string log_header();
std::string log_row(long iter, const losses::LossBreakdown& b);

struct TrainOutputs {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  long iterations = 0;
};

/// Full training run writing `model.ckpt` and `train_log.csv` into `out_dir`.
/// With `resume_from`, continues from that checkpoint (model, optimizer,
/// iteration) and keeps the earlier log rows.
TrainOutputs train(const TrainConfig& cfg, const synth::Dataset& ds, const std::filesystem::path& out_dir,
                   const std::filesystem::path& resume_from = {});

}  // namespace consep::train

#endif  // CONSEP_TRAINER_HPP_
