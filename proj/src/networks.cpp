// src/networks.cpp

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

#include "consep/networks.hpp"

#include <string>

#include "consep/error.hpp"

namespace consep {

using ad::Tensor;

namespace {

constexpr double kLeakySlope = 0.2;

Array transpose_motion(const Array& motion, int frames, int channels) {
  if (motion.rank() != 3 || motion.dim(1) != frames || motion.dim(2) != channels)
    throw ValidationError("vision_forward: expected motion [N," + std::to_string(frames) + "," +
                          std::to_string(channels) + "], got " + to_string(motion.shape()));
  const int n = motion.dim(0);
  Array out({n, channels, frames});
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < frames; ++t)
      for (int c = 0; c < channels; ++c)
        out[(static_cast<std::size_t>(i) * channels + c) * frames + t] =
            motion[(static_cast<std::size_t>(i) * frames + t) * channels + c];
  return out;
}

void require_square_input(const Tensor& x, int side, const char* who) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != side || s[3] != side)
    throw ValidationError(std::string(who) + ": expected [N,1," + std::to_string(side) + "," +
                          std::to_string(side) + "], got " + to_string(s));
}

}  // namespace

void NetworkConfig::validate() const {
  if (grid_side <= 0 || grid_side % 32 != 0)
    throw ValidationError("network config: grid side " + std::to_string(grid_side) +
                          " must be a positive multiple of 32 (five stride-2 levels)");
  for (int c : unet_channels)
    if (c <= 0) throw ValidationError("network config: U-Net channels must be positive");
  if (audio_dim <= 0 || motion_frames <= 0 || motion_channels <= 0 || vision_dim <= 0 || consistency_width <= 0 ||
      consistency_blocks <= 0 || embed_dim <= 0)
    throw ValidationError("network config: sizes must be positive");
  for (int c : vision_channels)
    if (c <= 0) throw ValidationError("network config: vision channels must be positive");
}

nlohmann::json NetworkConfig::to_json() const {
  return {{"grid_side", grid_side},
          {"unet_channels", unet_channels},
          {"audio_dim", audio_dim},
          {"motion_frames", motion_frames},
          {"motion_channels", motion_channels},
          {"vision_channels", vision_channels},
          {"vision_dim", vision_dim},
          {"consistency_width", consistency_width},
          {"consistency_blocks", consistency_blocks},
          {"embed_dim", embed_dim},
          {"init_seed", init_seed}};
}

NetworkConfig NetworkConfig::from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.grid_side = j.value("grid_side", c.grid_side);
  c.unet_channels = j.value("unet_channels", c.unet_channels);
  c.audio_dim = j.value("audio_dim", c.audio_dim);
  c.motion_frames = j.value("motion_frames", c.motion_frames);
  c.motion_channels = j.value("motion_channels", c.motion_channels);
  c.vision_channels = j.value("vision_channels", c.vision_channels);
  c.vision_dim = j.value("vision_dim", c.vision_dim);
  c.consistency_width = j.value("consistency_width", c.consistency_width);
  c.consistency_blocks = j.value("consistency_blocks", c.consistency_blocks);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.init_seed = j.value("init_seed", c.init_seed);
  c.validate();
  return c;
}

ad::NormMode norm_mode(Phase phase) {
  switch (phase) {
    case Phase::kTrain: return ad::NormMode::kTrain;
    case Phase::kEval: return ad::NormMode::kEval;
    case Phase::kAdapt: return ad::NormMode::kFrozen;
  }
  return ad::NormMode::kEval;
}

namespace nn {

AudioUNet::AudioUNet(const NetworkConfig& cfg, std::mt19937_64& rng) : input_norm_(1) {
  const auto& c = cfg.unet_channels;
  down_[0] = Conv2d(1, c[0], 4, 2, 1, true, rng);
  for (int i = 1; i < 5; ++i) down_[i] = Conv2d(c[i - 1], c[i], 4, 2, 1, /*with_bias=*/i == 4, rng);
  for (int i = 0; i < 3; ++i) down_norm_[i] = BatchNorm(c[i + 1]);
  up_[0] = ConvTranspose2d(c[4], c[3], 4, 2, 1, false, rng);
  up_[1] = ConvTranspose2d(2 * c[3], c[2], 4, 2, 1, false, rng);
  up_[2] = ConvTranspose2d(2 * c[2], c[1], 4, 2, 1, false, rng);
  up_[3] = ConvTranspose2d(2 * c[1], c[0], 4, 2, 1, false, rng);
  up_[4] = ConvTranspose2d(2 * c[0], cfg.audio_dim, 4, 2, 1, true, rng);
  for (int i = 0; i < 4; ++i) up_norm_[i] = BatchNorm(i == 0 ? c[3] : c[3 - i]);
}

Tensor AudioUNet::operator()(const Tensor& magnitude, Phase phase) {
  const auto mode = norm_mode(phase);
  const Shape& s = magnitude.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != s[3] || s[2] % 32 != 0)
    throw ValidationError("audio_forward: expected a square [N,1,S,S] input with S divisible by 32, got " +
                          to_string(s));
  Tensor x = input_norm_(ad::log_eps(magnitude, kLogFloor), mode);
  std::array<Tensor, 5> d;
  d[0] = ad::leaky_relu(down_[0](x), kLeakySlope);
  for (int i = 1; i < 4; ++i) d[i] = ad::leaky_relu(down_norm_[i - 1](down_[i](d[i - 1]), mode), kLeakySlope);
  d[4] = ad::relu(down_[4](d[3]));
  Tensor u = ad::relu(up_norm_[0](up_[0](d[4]), mode));
  for (int i = 1; i < 4; ++i) u = ad::relu(up_norm_[i](up_[i](ad::concat({u, d[4 - i]}, 1)), mode));
  return up_[4](ad::concat({u, d[0]}, 1));
}

void AudioUNet::collect(Registry& r) {
  input_norm_.collect("audio.input_norm", r);
  for (int i = 0; i < 5; ++i) down_[i].collect("audio.down" + std::to_string(i + 1), r);
  for (int i = 0; i < 3; ++i) down_norm_[i].collect("audio.down_norm" + std::to_string(i + 2), r);
  for (int i = 0; i < 5; ++i) up_[i].collect("audio.up" + std::to_string(5 - i), r);
  for (int i = 0; i < 4; ++i) up_norm_[i].collect("audio.up_norm" + std::to_string(5 - i), r);
}

VisionEncoder::VisionEncoder(const NetworkConfig& cfg, std::mt19937_64& rng)
    : frames_(cfg.motion_frames), channels_(cfg.motion_channels) {
  int in = cfg.motion_channels;
  for (int width : cfg.vision_channels) {
    convs_.emplace_back(in, width, 3, 1, 1, false, rng);
    norms_.emplace_back(width);
    in = width;
  }
  convs_.emplace_back(in, cfg.vision_dim, 3, 1, 1, true, rng);
}

Tensor VisionEncoder::operator()(const Array& motion, Phase phase) {
  Tensor x = Tensor::constant(transpose_motion(motion, frames_, channels_));
  for (std::size_t i = 0; i < norms_.size(); ++i) x = ad::relu(norms_[i](convs_[i](x), norm_mode(phase)));
  return ad::global_avg_pool(convs_.back()(x));
}

void VisionEncoder::collect(Registry& r) {
  for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].collect("vision.conv" + std::to_string(i + 1), r);
  for (std::size_t i = 0; i < norms_.size(); ++i) norms_[i].collect("vision.norm" + std::to_string(i + 1), r);
}

FusionHead::FusionHead(const NetworkConfig& cfg, std::mt19937_64& rng)
    : audio_dim_(cfg.audio_dim), project_(cfg.vision_dim, cfg.audio_dim, rng) {}

Tensor FusionHead::operator()(const Tensor& audio_feature, const Tensor& visual_feature) const {
  if (audio_feature.value().rank() != 4 || audio_feature.dim(1) != audio_dim_)
    throw ValidationError("fuse: audio feature " + to_string(audio_feature.shape()) + " does not have " +
                          std::to_string(audio_dim_) + " channels");
  if (visual_feature.value().rank() != 2 || visual_feature.dim(0) != audio_feature.dim(0) ||
      visual_feature.dim(1) != project_.weight.dim(1))
    throw ValidationError("fuse: visual feature " + to_string(visual_feature.shape()) +
                          " incompatible with audio feature " + to_string(audio_feature.shape()));
  Tensor weights = ad::sigmoid(project_(visual_feature));
  return ad::sigmoid(ad::channel_weighted_sum(audio_feature, weights));
}

void FusionHead::collect(Registry& r) { project_.collect("fusion.project", r); }

Tensor ResidualBlock::operator()(const Tensor& x, Phase phase) {
  const auto mode = norm_mode(phase);
  Tensor h = ad::relu(norm1(conv1(x), mode));
  h = norm2(conv2(h), mode);
  Tensor skip = downsample ? shortcut_norm(shortcut(x), mode) : x;
  return ad::relu(ad::add(h, skip));
}

void ResidualBlock::collect(const std::string& prefix, Registry& r) {
  conv1.collect(prefix + ".conv1", r);
  norm1.collect(prefix + ".norm1", r);
  conv2.collect(prefix + ".conv2", r);
  norm2.collect(prefix + ".norm2", r);
  if (downsample) {
    shortcut.collect(prefix + ".shortcut", r);
    shortcut_norm.collect(prefix + ".shortcut_norm", r);
  }
}

ConsistencyNet::ConsistencyNet(const NetworkConfig& cfg, std::mt19937_64& rng)
    : input_norm_(1),
      stem_(1, cfg.consistency_width, 3, 2, 1, false, rng),
      stem_norm_(cfg.consistency_width),
      project_(cfg.consistency_width, cfg.embed_dim, rng) {
  const int w = cfg.consistency_width;
  const int n = cfg.consistency_blocks;
  // Two stride-2 stages, at roughly one and two thirds of the depth.
  const int first_down = n >= 3 ? n / 3 : -1;
  const int second_down = n >= 3 ? (2 * n) / 3 : -1;
  for (int i = 0; i < n; ++i) {
    ResidualBlock b;
    b.downsample = i == first_down || i == second_down;
    const int stride = b.downsample ? 2 : 1;
    b.conv1 = Conv2d(w, w, 3, stride, 1, false, rng);
    b.norm1 = BatchNorm(w);
    b.conv2 = Conv2d(w, w, 3, 1, 1, false, rng);
    b.norm2 = BatchNorm(w);
    if (b.downsample) {
      b.shortcut = Conv2d(w, w, 1, 2, 0, false, rng);
      b.shortcut_norm = BatchNorm(w);
    }
    blocks_.push_back(std::move(b));
  }
}

Tensor ConsistencyNet::operator()(const Tensor& magnitude, Phase phase) {
  const auto mode = norm_mode(phase);
  if (magnitude.value().rank() != 4 || magnitude.dim(1) != 1)
    throw ValidationError("consistency_embed: expected [N,1,H,W], got " + to_string(magnitude.shape()));
  Tensor x = input_norm_(ad::log_eps(magnitude, kLogFloor), mode);
  x = ad::relu(stem_norm_(stem_(x), mode));
  for (auto& b : blocks_) x = b(x, phase);
  return ad::l2_normalize(project_(ad::global_max_pool(x)));
}

void ConsistencyNet::collect(Registry& r) {
  input_norm_.collect("consistency.input_norm", r);
  stem_.collect("consistency.stem", r);
  stem_norm_.collect("consistency.stem_norm", r);
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect("consistency.block" + std::to_string(i + 1), r);
  project_.collect("consistency.project", r);
}

VisualConsistencyHead::VisualConsistencyHead(const NetworkConfig& cfg, std::mt19937_64& rng)
    : project_(cfg.vision_dim, cfg.embed_dim, rng) {}

Tensor VisualConsistencyHead::operator()(const Tensor& visual_feature) const {
  return ad::l2_normalize(project_(visual_feature));
}

void VisualConsistencyHead::collect(Registry& r) { project_.collect("visual_head.project", r); }

}  // namespace nn

SeparationModel::SeparationModel(const NetworkConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  // One generator per sub-network so widening one leaves the others' init unchanged.
  std::mt19937_64 audio_rng(cfg_.init_seed * 4 + 0), vision_rng(cfg_.init_seed * 4 + 1),
      fusion_rng(cfg_.init_seed * 4 + 2), consistency_rng(cfg_.init_seed * 4 + 3);
  audio_ = nn::AudioUNet(cfg_, audio_rng);
  vision_ = nn::VisionEncoder(cfg_, vision_rng);
  fusion_ = nn::FusionHead(cfg_, fusion_rng);
  consistency_ = nn::ConsistencyNet(cfg_, consistency_rng);
  visual_head_ = nn::VisualConsistencyHead(cfg_, consistency_rng);
}

std::unique_ptr<SeparationModel> SeparationModel::clone() const {
  auto copy = std::make_unique<SeparationModel>(cfg_);
  auto& self = const_cast<SeparationModel&>(*this);
  ad::restore(*copy, ad::snapshot(self));
  return copy;
}

SeparationOutput SeparationModel::separate(const ad::Tensor& mixture, const Array& motion_p, const Array& motion_q,
                                           Phase phase) {
  require_square_input(mixture, cfg_.grid_side, "separate");
  const int n = mixture.dim(0);
  if (motion_p.rank() != 3 || motion_q.rank() != 3 || motion_p.dim(0) != n || motion_q.dim(0) != n)
    throw ValidationError("separate: motion batches must match the mixture batch of " + std::to_string(n));
  Tensor feature = audio_forward(mixture, phase);
  SeparationOutput out;
  // Both visual streams go through the encoder together so batch statistics see the full batch.
  Array motion(Shape{2 * n, motion_p.dim(1), motion_p.dim(2)});
  std::copy(motion_p.data().begin(), motion_p.data().end(), motion.data().begin());
  std::copy(motion_q.data().begin(), motion_q.data().end(), motion.data().begin() + motion_p.size());
  Tensor visual = vision_forward(motion, phase);
  Tensor masks = fuse(ad::concat({feature, feature}, 0), visual);
  out.mask_p = ad::slice_rows(masks, 0, n);
  out.mask_q = ad::slice_rows(masks, n, n);
  out.visual_p = ad::slice_rows(visual, 0, n);
  out.visual_q = ad::slice_rows(visual, n, n);
  return out;
}

std::vector<ad::ParameterRef> SeparationModel::parameters() {
  nn::Registry r;
  r.group = "audio";
  audio_.collect(r);
  r.group = "vision";
  vision_.collect(r);
  r.group = "fusion";
  fusion_.collect(r);
  r.group = "consistency";
  consistency_.collect(r);
  visual_head_.collect(r);
  return r.params;
}

std::vector<ad::BufferRef> SeparationModel::buffers() {
  nn::Registry r;
  audio_.collect(r);
  vision_.collect(r);
  fusion_.collect(r);
  consistency_.collect(r);
  visual_head_.collect(r);
  return r.buffers;
}

ad::Checkpoint model_checkpoint(SeparationModel& model, const nlohmann::json& meta) {
  ad::Checkpoint ckpt;
  ckpt.meta = meta;
  ckpt.meta["network"] = model.config().to_json();
  for (auto& [name, value] : ad::snapshot(model).entries) ckpt.tensors.emplace_back(name, std::move(value));
  return ckpt;
}

void save_model(SeparationModel& model, const std::filesystem::path& path, const nlohmann::json& meta) {
  ad::write_checkpoint(path, model_checkpoint(model, meta));
}

std::unique_ptr<SeparationModel> model_from_checkpoint(const ad::Checkpoint& ckpt) {
  if (!ckpt.meta.contains("network")) throw ValidationError("checkpoint has no network configuration");
  auto model = std::make_unique<SeparationModel>(NetworkConfig::from_json(ckpt.meta.at("network")));
  ad::ParamSnapshot snap;
  for (auto& p : model->parameters()) snap.entries.emplace_back(p.name, ckpt.at(p.name));
  for (auto& b : model->buffers()) snap.entries.emplace_back(b.name, ckpt.at(b.name));
  ad::restore(*model, snap);
  return model;
}

std::unique_ptr<SeparationModel> load_model(const std::filesystem::path& path) {
  return model_from_checkpoint(ad::read_checkpoint(path));
}

}  // namespace consep
