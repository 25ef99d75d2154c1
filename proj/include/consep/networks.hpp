// include/consep/networks.hpp

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

#ifndef CONSEP_NETWORKS_HPP_
#define CONSEP_NETWORKS_HPP_

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "consep/ad/checkpoint.hpp"
#include "consep/ad/params.hpp"
#include "consep/layers.hpp"
#include "json.hpp"

namespace consep {

struct NetworkConfig {
  int grid_side = 64;                                // log-frequency rows == frames
  std::array<int, 5> unet_channels = {8, 16, 32, 64, 64};
  int audio_dim = 64;                                // D_a
  int motion_frames = 24;                            // T_v
  int motion_channels = 4;                           // C_v
  std::vector<int> vision_channels = {16, 32};
  int vision_dim = 32;
  int consistency_width = 16;
  int consistency_blocks = 10;
  int embed_dim = 256;
  unsigned long long init_seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static NetworkConfig from_json(const nlohmann::json& j);
  bool operator==(const NetworkConfig&) const = default;
};

/// Forward-pass regime. kAdapt uses running batch-norm statistics and keeps the
/// batch-norm affine parameters out of the graph.
enum class Phase { kTrain, kEval, kAdapt };

ad::NormMode norm_mode(Phase phase);

/// Magnitudes enter every spectrogram network as log(m + kLogFloor).
inline constexpr double kLogFloor = 1e-3;

namespace nn {

/// Encoder-decoder with skip connections: five stride-2 convolutions down,
/// five stride-2 transposed convolutions up.
class AudioUNet {
 public:
  AudioUNet() = default;
  AudioUNet(const NetworkConfig& cfg, std::mt19937_64& rng);
  /// [N,1,S,S] magnitudes -> [N,D_a,S,S]. S must be a multiple of 32.
  Tensor operator()(const Tensor& magnitude, Phase phase);
  void collect(Registry& r);

 private:
  BatchNorm input_norm_;
  std::array<Conv2d, 5> down_;
  std::array<BatchNorm, 3> down_norm_;  // levels 2..4
  std::array<ConvTranspose2d, 5> up_;
  std::array<BatchNorm, 4> up_norm_;    // all but the output layer
};

/// Temporal 1-D convolutions over motion features followed by average pooling.
class VisionEncoder {
 public:
  VisionEncoder() = default;
  VisionEncoder(const NetworkConfig& cfg, std::mt19937_64& rng);
  /// [N, T_v, C_v] -> [N, vision_dim]
  Tensor operator()(const Array& motion, Phase phase);
  void collect(Registry& r);

 private:
  int frames_ = 0, channels_ = 0;
  std::vector<Conv1d> convs_;
  std::vector<BatchNorm> norms_;
};

/// sigmoid(sum_c sigmoid(W f_v + b)_c * audio_c)
class FusionHead {
 public:
  FusionHead() = default;
  FusionHead(const NetworkConfig& cfg, std::mt19937_64& rng);
  /// audio [N,D_a,S,S], visual [N,vision_dim] -> mask [N,1,S,S] in (0,1).
  Tensor operator()(const Tensor& audio_feature, const Tensor& visual_feature) const;
  void collect(Registry& r);

 private:
  int audio_dim_ = 0;
  Linear project_;
};

struct ResidualBlock {
  Conv2d conv1, conv2, shortcut;  // shortcut only when downsampling
  BatchNorm norm1, norm2, shortcut_norm;
  bool downsample = false;

  Tensor operator()(const Tensor& x, Phase phase);
  void collect(const std::string& prefix, Registry& r);
};

/// Stem convolution, residual blocks, global max pool, projection, L2 norm.
class ConsistencyNet {
 public:
  ConsistencyNet() = default;
  ConsistencyNet(const NetworkConfig& cfg, std::mt19937_64& rng);
  /// [N,1,S,S] magnitudes -> [N, embed_dim] unit rows.
  Tensor operator()(const Tensor& magnitude, Phase phase);
  void collect(Registry& r);

 private:
  BatchNorm input_norm_;
  Conv2d stem_;
  BatchNorm stem_norm_;
  std::vector<ResidualBlock> blocks_;
  Linear project_;
};

/// Linear map of the visual feature into the consistency embedding space.
class VisualConsistencyHead {
 public:
  VisualConsistencyHead() = default;
  VisualConsistencyHead(const NetworkConfig& cfg, std::mt19937_64& rng);
  Tensor operator()(const Tensor& visual_feature) const;
  void collect(Registry& r);

 private:
  Linear project_;
};

}  // namespace nn

struct SeparationOutput {
  ad::Tensor mask_p, mask_q;          // [N,1,S,S]
  ad::Tensor visual_p, visual_q;      // [N, vision_dim]
};

/// The full model. Parameter groups: "audio", "vision", "fusion", "consistency".
class SeparationModel : public ad::Parameterized {
 public:
  explicit SeparationModel(const NetworkConfig& cfg);

  SeparationModel(const SeparationModel&) = delete;
  SeparationModel& operator=(const SeparationModel&) = delete;
  /// Independent deep copy.
  std::unique_ptr<SeparationModel> clone() const;

  const NetworkConfig& config() const { return cfg_; }

  ad::Tensor audio_forward(const ad::Tensor& magnitude, Phase phase) { return audio_(magnitude, phase); }
  ad::Tensor vision_forward(const Array& motion, Phase phase) { return vision_(motion, phase); }
  ad::Tensor fuse(const ad::Tensor& audio_feature, const ad::Tensor& visual_feature) const {
    return fusion_(audio_feature, visual_feature);
  }
  ad::Tensor consistency_embed(const ad::Tensor& magnitude, Phase phase) { return consistency_(magnitude, phase); }
  ad::Tensor visual_embed(const ad::Tensor& visual_feature) const { return visual_head_(visual_feature); }

  /// One audio pass over the mixtures, fused with both visual streams.
  /// mixture [N,1,S,S]; motion arrays [N,T_v,C_v].
  SeparationOutput separate(const ad::Tensor& mixture, const Array& motion_p, const Array& motion_q, Phase phase);

  std::vector<ad::ParameterRef> parameters() override;
  std::vector<ad::BufferRef> buffers() override;

 private:
  NetworkConfig cfg_;
  nn::AudioUNet audio_;
  nn::VisionEncoder vision_;
  nn::FusionHead fusion_;
  nn::ConsistencyNet consistency_;
  nn::VisualConsistencyHead visual_head_;
};

/// Parameters, buffers and config in one checkpoint; extra metadata under "meta".
ad::Checkpoint model_checkpoint(SeparationModel& model, const nlohmann::json& meta = nlohmann::json::object());
void save_model(SeparationModel& model, const std::filesystem::path& path,
                const nlohmann::json& meta = nlohmann::json::object());
std::unique_ptr<SeparationModel> model_from_checkpoint(const ad::Checkpoint& ckpt);
std::unique_ptr<SeparationModel> load_model(const std::filesystem::path& path);

}  // namespace consep

#endif  // CONSEP_NETWORKS_HPP_
