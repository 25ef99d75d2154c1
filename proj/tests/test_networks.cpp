// tests/test_networks.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "consep/ad/ops.hpp"
#include "consep/ad/params.hpp"
#include "consep/error.hpp"
#include "consep/networks.hpp"
#include "support/oracles.hpp"

namespace consep {
namespace {

using ad::Tensor;

NetworkConfig small_config() {
  NetworkConfig c;
  c.grid_side = 32;
  c.unet_channels = {4, 4, 8, 8, 8};
  c.audio_dim = 6;
  c.motion_frames = 8;
  c.motion_channels = 4;
  c.vision_channels = {6};
  c.vision_dim = 5;
  c.consistency_width = 4;
  c.consistency_blocks = 3;
  c.embed_dim = 12;
  c.init_seed = 3;
  return c;
}

Array magnitudes(int n, int side, std::mt19937_64& rng) {
  return testing::random_array({n, 1, side, side}, rng, 0.0, 2.0);
}

Array motion(int n, const NetworkConfig& c, std::mt19937_64& rng) {
  return testing::random_array({n, c.motion_frames, c.motion_channels}, rng, 0.0, 1.0);
}

double row_norm(const Array& a, int row) {
  const int d = a.dim(1);
  double ss = 0.0;
  for (int j = 0; j < d; ++j) ss += a[static_cast<std::size_t>(row * d + j)] * a[static_cast<std::size_t>(row * d + j)];
  return std::sqrt(ss);
}

TEST(Networks, ForwardShapes) {
  const NetworkConfig c = small_config();
  SeparationModel m(c);
  std::mt19937_64 rng(1);
  ad::NoGradGuard ng;
  const Tensor mix = Tensor::constant(magnitudes(2, 32, rng));
  const Tensor a = m.audio_forward(mix, Phase::kEval);
  EXPECT_EQ(a.shape(), (Shape{2, c.audio_dim, 32, 32}));
  const Tensor v = m.vision_forward(motion(2, c, rng), Phase::kEval);
  EXPECT_EQ(v.shape(), (Shape{2, c.vision_dim}));
  EXPECT_EQ(m.fuse(a, v).shape(), (Shape{2, 1, 32, 32}));
  const Tensor e = m.consistency_embed(mix, Phase::kEval);
  EXPECT_EQ(e.shape(), (Shape{2, c.embed_dim}));
  EXPECT_EQ(m.visual_embed(v).shape(), (Shape{2, c.embed_dim}));
}

TEST(Networks, DefaultSizes) {
  NetworkConfig c;
  EXPECT_EQ(c.audio_dim, 64);
  EXPECT_EQ(c.embed_dim, 256);
  EXPECT_EQ(c.consistency_blocks, 10);
  EXPECT_EQ(c.motion_frames, 24);
  c.grid_side = 64;
  SeparationModel m(c);
  std::mt19937_64 rng(2);
  ad::NoGradGuard ng;
  const Tensor mix = Tensor::constant(magnitudes(1, 64, rng));
  EXPECT_EQ(m.audio_forward(mix, Phase::kEval).shape(), (Shape{1, 64, 64, 64}));
  const Tensor e = m.consistency_embed(mix, Phase::kEval);
  ASSERT_EQ(e.shape(), (Shape{1, 256}));
  EXPECT_NEAR(row_norm(e.value(), 0), 1.0, 1e-9);
}

TEST(Networks, RejectsBadShapes) {
  NetworkConfig c = small_config();
  c.grid_side = 48;
  EXPECT_THROW(SeparationModel{c}, ValidationError);
  c = small_config();
  SeparationModel m(c);
  std::mt19937_64 rng(3);
  EXPECT_THROW(m.vision_forward(testing::random_array({1, c.motion_frames + 1, c.motion_channels}, rng), Phase::kEval),
               ValidationError);
  EXPECT_THROW(m.vision_forward(testing::random_array({1, c.motion_frames, c.motion_channels + 1}, rng), Phase::kEval),
               ValidationError);
  const Tensor a = Tensor::constant(testing::random_array({1, c.audio_dim + 1, 32, 32}, rng));
  const Tensor v = Tensor::constant(testing::random_array({1, c.vision_dim}, rng));
  EXPECT_THROW(m.fuse(a, v), ValidationError);
}

TEST(Networks, EvalForwardIsPure) {
  SeparationModel m(small_config());
  std::mt19937_64 rng(4);
  const Array mix = magnitudes(2, 32, rng);
  const Array mp = motion(2, m.config(), rng), mq = motion(2, m.config(), rng);
  ad::NoGradGuard ng;
  const SeparationOutput o1 = m.separate(Tensor::constant(mix), mp, mq, Phase::kEval);
  const SeparationOutput o2 = m.separate(Tensor::constant(mix), mp, mq, Phase::kEval);
  EXPECT_EQ(o1.mask_p.value().storage(), o2.mask_p.value().storage());
  EXPECT_EQ(o1.mask_q.value().storage(), o2.mask_q.value().storage());
  for (double v : o1.mask_p.value().storage()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Networks, FusionMatchesLoopOracle) {
  NetworkConfig c = small_config();
  c.audio_dim = 2;
  SeparationModel m(c);
  std::mt19937_64 rng(5);
  const Array feat = testing::random_array({1, 2, 2, 2}, rng);
  const Array vis = testing::random_array({1, c.vision_dim}, rng);
  const Tensor mask = m.fuse(Tensor::constant(feat), Tensor::constant(vis));

  Array w, b;
  for (const auto& p : m.parameters()) {
    if (p.name == "fusion.project.weight") w = p.tensor.value();
    if (p.name == "fusion.project.bias") b = p.tensor.value();
  }
  ASSERT_EQ(w.shape(), (Shape{2, c.vision_dim}));
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  for (int h = 0; h < 2; ++h) {
    for (int x = 0; x < 2; ++x) {
      double s = 0.0;
      for (int ch = 0; ch < 2; ++ch) {
        double z = b[static_cast<std::size_t>(ch)];
        for (int k = 0; k < c.vision_dim; ++k)
          z += w[static_cast<std::size_t>(ch * c.vision_dim + k)] * vis[static_cast<std::size_t>(k)];
        s += sig(z) * feat[static_cast<std::size_t>((ch * 2 + h) * 2 + x)];
      }
      EXPECT_NEAR(mask.value()[static_cast<std::size_t>(h * 2 + x)], sig(s), 1e-12);
    }
  }
  const Tensor half = m.fuse(Tensor::constant(Array({1, 2, 2, 2}, 0.0)), Tensor::constant(vis));
  for (double v : half.value().storage()) EXPECT_EQ(v, 0.5);
}

TEST(Networks, ZeroMotionGivesSameFeatureForEverySample) {
  SeparationModel m(small_config());
  ad::NoGradGuard ng;
  const Tensor v = m.vision_forward(Array({3, m.config().motion_frames, m.config().motion_channels}, 0.0),
                                    Phase::kEval);
  for (int r = 1; r < 3; ++r)
    for (int j = 0; j < v.dim(1); ++j)
      EXPECT_EQ(v.value()[static_cast<std::size_t>(r * v.dim(1) + j)], v.value()[static_cast<std::size_t>(j)]);
}

TEST(Networks, ShiftedMotionChangeMatchesReevaluation) {
  const NetworkConfig c = small_config();
  SeparationModel m(c);
  std::mt19937_64 rng(6);
  const Array x = motion(1, c, rng);
  Array shifted(x.shape());
  for (int t = 1; t < c.motion_frames; ++t)
    for (int ch = 0; ch < c.motion_channels; ++ch)
      shifted[static_cast<std::size_t>(t * c.motion_channels + ch)] =
          x[static_cast<std::size_t>((t - 1) * c.motion_channels + ch)];
  ad::NoGradGuard ng;
  const Array a = m.vision_forward(x, Phase::kEval).value();
  const Array b = m.vision_forward(shifted, Phase::kEval).value();
  const Array b2 = m.vision_forward(shifted, Phase::kEval).value();
  EXPECT_EQ(b.storage(), b2.storage());
  // Bound from the input change and the layer weights: the encoder is a
  // composition of Lipschitz maps, so the change stays finite and small.
  const double dout = testing::max_abs_diff(a.data(), b.data());
  const double din = testing::max_abs_diff(x.data(), shifted.data());
  EXPECT_TRUE(std::isfinite(dout));
  EXPECT_LT(dout, 1e3 * din);
}

TEST(Networks, EmbeddingsAreUnitAndBatchPermutationEquivariant) {
  SeparationModel m(small_config());
  std::mt19937_64 rng(7);
  const Array mix = magnitudes(3, 32, rng);
  Array perm(mix.shape());
  const std::size_t per = mix.size() / 3;
  const int order[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    std::copy_n(mix.storage().begin() + static_cast<long>(order[i] * per), per,
                perm.storage().begin() + static_cast<long>(i * per));
  ad::NoGradGuard ng;
  const Array e = m.consistency_embed(Tensor::constant(mix), Phase::kEval).value();
  const Array ep = m.consistency_embed(Tensor::constant(perm), Phase::kEval).value();
  const int d = e.dim(1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(row_norm(e, i), 1.0, 1e-9);
    for (int j = 0; j < d; ++j)
      EXPECT_EQ(ep[static_cast<std::size_t>(i * d + j)], e[static_cast<std::size_t>(order[i] * d + j)]);
  }

  // Biases start at zero, so give the head one before probing the zero input.
  Array bias;
  for (auto& p : m.parameters()) {
    if (p.name != "visual_head.project.bias") continue;
    for (std::size_t j = 0; j < p.tensor.size(); ++j) p.tensor.mutable_value()[j] = 0.5 - 0.1 * static_cast<double>(j);
    bias = p.tensor.value();
  }
  ASSERT_EQ(bias.size(), static_cast<std::size_t>(d));
  const double bn = testing::l2_norm(bias.data());
  const Array z = m.visual_embed(Tensor::constant(Array({2, m.config().vision_dim}, 0.0))).value();
  EXPECT_NEAR(row_norm(z, 0), 1.0, 1e-9);
  for (int j = 0; j < d; ++j) {
    EXPECT_EQ(z[static_cast<std::size_t>(j)], z[static_cast<std::size_t>(d + j)]);
    EXPECT_NEAR(z[static_cast<std::size_t>(j)], bias[static_cast<std::size_t>(j)] / bn, 1e-12);
  }
}

TEST(Networks, UNetAndVisualHeadGradientsMatchFiniteDifferences) {
  NetworkConfig c = small_config();
  c.unet_channels = {2, 2, 2, 2, 2};
  c.audio_dim = 2;
  SeparationModel m(c);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 3; ++i) {
    const Array mix = magnitudes(1, 32, rng);
    const double err = testing::gradient_relative_error(
        [&](const std::vector<Tensor>& in) { return ad::sum(m.audio_forward(in[0], Phase::kEval)); }, {mix});
    EXPECT_LT(err, 1e-4);
    const Array v = testing::random_array({2, c.vision_dim}, rng);
    const double err_v = testing::gradient_relative_error(
        [&](const std::vector<Tensor>& in) { return testing::weighted_sum(m.visual_embed(in[0]), 9); }, {v});
    EXPECT_LT(err_v, 1e-4);
  }
}

TEST(Networks, EveryGroupReceivesGradient) {
  SeparationModel m(small_config());
  std::mt19937_64 rng(9);
  const Tensor mix = Tensor::constant(magnitudes(2, 32, rng));
  const Array mp = motion(2, m.config(), rng), mq = motion(2, m.config(), rng);
  const SeparationOutput o = m.separate(mix, mp, mq, Phase::kTrain);
  const Tensor e = m.consistency_embed(ad::mul(o.mask_p, mix), Phase::kTrain);
  const Tensor ev = m.visual_embed(o.visual_p);
  Tensor loss = ad::add(testing::weighted_sum(o.mask_p, 1), testing::weighted_sum(o.mask_q, 2));
  loss = ad::add(loss, ad::sum(ad::row_distance(e, ev)));
  ad::backward(loss);
  std::map<std::string, double> group_norm;
  for (const auto& p : m.parameters()) {
    ASSERT_TRUE(p.tensor.has_grad()) << p.name;
    group_norm[p.group] += testing::l2_norm(p.tensor.grad().data());
  }
  for (const char* g : {"audio", "vision", "fusion", "consistency"}) EXPECT_GT(group_norm[g], 0.0) << g;
}

TEST(Networks, CloneIsIndependentDeepCopy) {
  SeparationModel m(small_config());
  auto copy = m.clone();
  const ad::ParamSnapshot a = ad::snapshot(m), b = ad::snapshot(*copy);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].second.storage(), b.entries[i].second.storage());
  copy->parameters().front().tensor.mutable_value()[0] += 1.0;
  EXPECT_NE(m.parameters().front().tensor.value()[0], copy->parameters().front().tensor.value()[0]);
}

TEST(Networks, CheckpointRoundTripIsExact) {
  testing::TempDir dir("net_ckpt");
  SeparationModel m(small_config());
  // Move the running statistics off their initial values.
  std::mt19937_64 rng(10);
  m.separate(Tensor::constant(magnitudes(2, 32, rng)), motion(2, m.config(), rng), motion(2, m.config(), rng),
             Phase::kTrain);
  save_model(m, dir / "m.ckpt", {{"note", "x"}});
  auto loaded = load_model(dir / "m.ckpt");
  EXPECT_EQ(loaded->config(), m.config());
  const ad::ParamSnapshot a = ad::snapshot(m), b = ad::snapshot(*loaded);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].first, b.entries[i].first);
    EXPECT_EQ(a.entries[i].second.storage(), b.entries[i].second.storage());
  }
  EXPECT_EQ(ad::read_checkpoint(dir / "m.ckpt").meta["note"], "x");
}

TEST(Networks, SameSeedSameInitDifferentSeedDifferent) {
  NetworkConfig c = small_config();
  SeparationModel a(c), b(c);
  c.init_seed = 4;
  SeparationModel d(c);
  auto weight = [](SeparationModel& m, const std::string& name) {
    for (const auto& p : m.parameters())
      if (p.name == name) return p.tensor.value().storage();
    return std::vector<double>{};
  };
  for (const char* name : {"audio.down1.weight", "vision.conv1.weight", "consistency.stem.weight"}) {
    ASSERT_FALSE(weight(a, name).empty()) << name;
    EXPECT_EQ(weight(a, name), weight(b, name));
    EXPECT_NE(weight(a, name), weight(d, name));
  }
}

}  // namespace
}  // namespace consep
