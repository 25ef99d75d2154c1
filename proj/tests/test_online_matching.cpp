// tests/test_online_matching.cpp

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
#include <limits>
#include <type_traits>

#include "consep/ad/params.hpp"
#include "consep/error.hpp"
#include "consep/online_matching.hpp"
#include "consep/trainer.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace consep {
namespace {

using om::OMConfig;

// The adaptation entry point accepts a query and nothing that carries targets.
template <class Input>
concept AdaptAccepts = requires(SeparationModel& m, const Input& in, const OMConfig& c) { om::adapt_pair(m, in, c); };
static_assert(AdaptAccepts<SeparationQuery>);
static_assert(!AdaptAccepts<PreparedPair>);
static_assert(!AdaptAccepts<PairTruth>);
static_assert(!std::is_invocable_v<decltype(om::adapt_pair), SeparationModel&, const SeparationQuery&,
                                   const PairTruth&, const OMConfig&, const std::vector<int>&>);
static_assert(!std::is_convertible_v<PairTruth, SeparationQuery>);
static_assert(!std::is_convertible_v<PreparedPair, SeparationQuery>);
// Mixture, two motion streams, two templates; any new field needs a look here.
static_assert(sizeof(SeparationQuery) == 5 * sizeof(Array));
static_assert(!std::is_invocable_v<decltype(self_consistency), SeparationModel&, const SeparationOutput&,
                                   const ad::Tensor&, const SeparationQuery&, const PairTruth&, ConsistencyTerms,
                                   Phase>);

class OnlineMatching : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("om_ds");
    ds_ = new synth::Dataset(testing::make_small_dataset(dir_->path(), 3, 3, 3, 1.0, 21));
    train::TrainConfig c = testing::small_train_config(30);
    c.batch_size = 4;
    c.log_interval = 10;
    train::train(c, *ds_, dir_->path() / "run");
    model_ = load_model(dir_->path() / "run" / "model.ckpt").release();
    const auto g = testing::small_spectrogram().geometry(c.network.motion_frames);
    pairs_ = new std::vector<PreparedPair>;
    for (const auto& tp : synth::build_test_set(*ds_, 20, 7, g))
      pairs_->push_back(prepare_pair(*ds_, tp.draw, testing::small_spectrogram(), g));
  }
  static void TearDownTestSuite() {
    delete pairs_;
    delete model_;
    delete ds_;
    delete dir_;
  }

  static void expect_bitwise_equal(const ad::ParamSnapshot& a, const ad::ParamSnapshot& b) {
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      ASSERT_EQ(a.entries[i].first, b.entries[i].first);
      ASSERT_EQ(a.entries[i].second.storage(), b.entries[i].second.storage()) << a.entries[i].first;
    }
  }

  static testing::TempDir* dir_;
  static synth::Dataset* ds_;
  static SeparationModel* model_;
  static std::vector<PreparedPair>* pairs_;
};
testing::TempDir* OnlineMatching::dir_ = nullptr;
synth::Dataset* OnlineMatching::ds_ = nullptr;
SeparationModel* OnlineMatching::model_ = nullptr;
std::vector<PreparedPair>* OnlineMatching::pairs_ = nullptr;

TEST_F(OnlineMatching, RestoresParametersAndStatisticsBitwise) {
  for (bool freeze : {true, false}) {
    for (auto opt : {om::Optimizer::kSgd, om::Optimizer::kAdam}) {
      OMConfig cfg;
      cfg.freeze_bn = freeze;
      cfg.optimizer = opt;
      cfg.beta = 1e-2;
      const ad::ParamSnapshot before = ad::snapshot(*model_);
      const auto res = om::adapt_pair(*model_, pairs_->at(0).query, cfg);
      EXPECT_FALSE(res.warning);
      expect_bitwise_equal(before, ad::snapshot(*model_));
    }
  }
}

TEST_F(OnlineMatching, AdaptationChangesMasksButNotTheModel) {
  OMConfig cfg;
  cfg.beta = 1e-2;
  const auto& q = pairs_->at(1).query;
  const MaskPair plain = infer_masks(*model_, q);
  const auto res = om::adapt_pair(*model_, q, cfg);
  EXPECT_NE(res.masks.mask_p.storage(), plain.mask_p.storage());
  // Same fixed input after the cycle: identical forward.
  EXPECT_EQ(infer_masks(*model_, q).mask_p.storage(), plain.mask_p.storage());
  EXPECT_EQ(infer_masks(*model_, q).mask_q.storage(), plain.mask_q.storage());
}

TEST_F(OnlineMatching, ZeroIterationsEqualsPlainInference) {
  OMConfig cfg;
  cfg.iterations = 0;
  for (int k = 0; k < 3; ++k) {
    const auto& q = pairs_->at(static_cast<std::size_t>(k)).query;
    const MaskPair plain = infer_masks(*model_, q);
    const auto res = om::adapt_pair(*model_, q, cfg);
    EXPECT_EQ(res.masks.mask_p.storage(), plain.mask_p.storage());
    EXPECT_EQ(res.masks.mask_q.storage(), plain.mask_q.storage());
    EXPECT_EQ(res.l_cs.size(), 1u);
  }
}

TEST_F(OnlineMatching, FrozenNormStatisticsUntouched) {
  std::vector<Array> stats;
  for (const auto& b : model_->buffers()) stats.push_back(*b.array);
  OMConfig cfg;
  cfg.beta = 1e-2;
  cfg.iterations = 3;
  // Inspect mid-adaptation state through the captured masks: the masks after
  // step 0 must equal plain inference, which reads the running statistics.
  const auto res = om::adapt_pair(*model_, pairs_->at(2).query, cfg, {0});
  EXPECT_EQ(res.captured[0].mask_p.storage(), infer_masks(*model_, pairs_->at(2).query).mask_p.storage());
  std::size_t i = 0;
  for (const auto& b : model_->buffers()) EXPECT_EQ(b.array->storage(), stats[i++].storage()) << b.name;
}

TEST_F(OnlineMatching, PairsAreIndependent) {
  OMConfig cfg;
  cfg.beta = 1e-2;
  std::vector<MaskPair> chained;
  for (int k = 0; k < 3; ++k) chained.push_back(om::adapt_pair(*model_, pairs_->at(static_cast<std::size_t>(k)).query, cfg).masks);
  for (int k = 0; k < 3; ++k) {
    auto fresh = model_->clone();
    const auto alone = om::adapt_pair(*fresh, pairs_->at(static_cast<std::size_t>(k)).query, cfg).masks;
    EXPECT_EQ(alone.mask_p.storage(), chained[static_cast<std::size_t>(k)].mask_p.storage());
    EXPECT_EQ(alone.mask_q.storage(), chained[static_cast<std::size_t>(k)].mask_q.storage());
  }
}

TEST_F(OnlineMatching, CapturedMasksMatchShorterRuns) {
  OMConfig cfg;
  cfg.iterations = 4;
  cfg.beta = 1e-2;
  const auto& q = pairs_->at(3).query;
  const auto res = om::adapt_pair(*model_, q, cfg, {0, 2, 4});
  ASSERT_EQ(res.captured.size(), 3u);
  const int ts[3] = {0, 2, 4};
  for (int k = 0; k < 3; ++k) {
    OMConfig c2 = cfg;
    c2.iterations = ts[k];
    const auto short_run = om::adapt_pair(*model_, q, c2);
    EXPECT_EQ(res.captured[static_cast<std::size_t>(k)].mask_p.storage(), short_run.masks.mask_p.storage());
  }
  EXPECT_EQ(res.captured[2].mask_p.storage(), res.masks.mask_p.storage());
  EXPECT_EQ(res.l_cs.size(), 5u);
  EXPECT_THROW(om::adapt_pair(*model_, q, cfg, {5}), ValidationError);
}

TEST_F(OnlineMatching, ConsistencyLossUsuallyDecreases) {
  OMConfig cfg;
  int decreased = 0;
  for (const auto& p : *pairs_) {
    const auto res = om::adapt_pair(*model_, p.query, cfg);
    ASSERT_EQ(res.l_cs.size(), 6u);
    if (res.l_cs.back() <= res.l_cs.front()) ++decreased;
  }
  EXPECT_GE(decreased, static_cast<int>(0.8 * static_cast<double>(pairs_->size())));
}

TEST_F(OnlineMatching, PlainGradientStepOnFirstIteration) {
  // One SGD step: theta_1 = theta_0 - beta * lambda * grad. Checked through a
  // model adapted by hand with the same loss.
  OMConfig cfg;
  cfg.iterations = 1;
  cfg.beta = 1e-3;
  const auto& q = pairs_->at(4).query;
  const auto res = om::adapt_pair(*model_, q, cfg);

  auto manual = model_->clone();
  const ad::Tensor mix = ad::Tensor::constant(q.mixture);
  const SeparationOutput out = manual->separate(mix, q.motion_p, q.motion_q, Phase::kAdapt);
  const ConsistencyLosses cs = self_consistency(*manual, out, mix, q, cfg.terms, Phase::kAdapt);
  const ad::Tensor loss = ad::add(cs.inter, cs.intra);
  EXPECT_EQ(loss.item(), res.l_cs[0]);
  ad::backward(ad::scale(loss, cfg.lambda));
  for (auto& p : manual->parameters()) {
    if (p.norm_affine || !p.tensor.has_grad()) continue;
    for (std::size_t i = 0; i < p.tensor.size(); ++i)
      p.tensor.mutable_value()[i] -= cfg.beta * p.tensor.grad()[i];
  }
  const MaskPair want = infer_masks(*manual, q);
  EXPECT_LT(testing::max_abs_diff(want.mask_p.data(), res.masks.mask_p.data()), 1e-12);
  EXPECT_LT(testing::max_abs_diff(want.mask_q.data(), res.masks.mask_q.data()), 1e-12);
}

TEST_F(OnlineMatching, DivergenceRestoresAndWarns) {
  OMConfig cfg;
  cfg.beta = 1e300;
  const auto& q = pairs_->at(5).query;
  const ad::ParamSnapshot before = ad::snapshot(*model_);
  const MaskPair plain = infer_masks(*model_, q);
  const auto res = om::adapt_pair(*model_, q, cfg);
  EXPECT_TRUE(res.warning);
  EXPECT_FALSE(res.message.empty());
  EXPECT_EQ(res.masks.mask_p.storage(), plain.mask_p.storage());
  expect_bitwise_equal(before, ad::snapshot(*model_));
}

TEST_F(OnlineMatching, ConfigValidationAndJson) {
  OMConfig cfg;
  EXPECT_EQ(cfg.iterations, 5);
  EXPECT_EQ(cfg.beta, 1e-4);
  EXPECT_EQ(cfg.lambda, 1.0);
  EXPECT_TRUE(cfg.freeze_bn);
  EXPECT_EQ(cfg.optimizer, om::Optimizer::kSgd);
  cfg.optimizer = om::Optimizer::kAdam;
  EXPECT_EQ(OMConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
  cfg.iterations = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.iterations = 1;
  cfg.beta = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  PreparedPair two = pairs_->at(0);
  two.query = stack_queries({&pairs_->at(0).query, &pairs_->at(1).query});
  EXPECT_THROW(om::adapt_pair(*model_, two.query, OMConfig{}), ValidationError);
}

TEST(OnlineMatchingCsv, Rows) {
  om::PairOutcome o;
  o.pair_id = 4;
  o.l_cs = {1.5, 1.25};
  o.before.per_source = {{{1, 2, 3}, {4, 5, 6}}};
  o.after.per_source = {{{7, 8, 9}, {10, 11, 12}}};
  EXPECT_EQ(om::outcome_csv_row(o, 1), "4,1,1.5;1.25,0,1,2,3,4,5,6,7,8,9,10,11,12\n");
  EXPECT_EQ(om::sweep_csv_row({5, 1.5, 2.5, 3.5, 0.75}), "5,1.5,2.5,3.5,0.75\n");
}

}  // namespace
}  // namespace consep
