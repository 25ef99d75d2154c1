// tests/test_masks_losses.cpp

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
#include <numbers>

#include "consep/ad/ops.hpp"
#include "consep/error.hpp"
#include "consep/losses.hpp"
#include "consep/masks.hpp"
#include "support/oracles.hpp"

namespace consep {
namespace {

using ad::Tensor;
using losses::GroundTruthTerm;

dsp::Grid random_grid(int r, int c, std::mt19937_64& rng) {
  dsp::Grid g(r, c);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (auto& v : g.values) v = u(rng);
  return g;
}

TEST(GroundTruthMask, MatchesLoopOracleOnRandomPairs) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const dsp::Grid t = random_grid(17, 9, rng);
    dsp::Grid m = random_grid(17, 9, rng);
    // Force some ties.
    m.values[3] = t.values[3];
    EXPECT_EQ(masks::ground_truth_mask(t, m).grid.values, testing::mask_oracle(t, m).values);
  }
}

TEST(GroundTruthMask, TiesCountAsDominant) {
  dsp::Grid t(1, 3), m(1, 3);
  t.values = {1.0, 0.5, 0.0};
  m.values = {1.0, 0.6, 0.0};
  EXPECT_EQ(masks::ground_truth_mask(t, m).grid.values, (std::vector<double>{1.0, 0.0, 1.0}));
  EXPECT_THROW(masks::ground_truth_mask(t, dsp::Grid(2, 3)), ValidationError);
}

TEST(BceMaskLoss, MatchesDirectFormulaAndTensorForm) {
  std::mt19937_64 rng(2);
  masks::SoftMask p{dsp::Grid(4, 5)};
  masks::BinaryMask g{dsp::Grid(4, 5)};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < 20; ++i) {
    p.grid.values[i] = u(rng);
    g.grid.values[i] = u(rng) < 0.5 ? 0.0 : 1.0;
  }
  p.grid.values[0] = 0.0;  // clamped
  double direct = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const double q = std::clamp(p.grid.values[i], 1e-7, 1.0 - 1e-7);
    direct -= g.grid.values[i] * std::log(q) + (1.0 - g.grid.values[i]) * std::log(1.0 - q);
  }
  direct /= 20.0;
  EXPECT_NEAR(masks::bce_mask_loss(p, g), direct, 1e-12);
  const Tensor t = Tensor::constant(Array({1, 1, 4, 5}, p.grid.values));
  EXPECT_NEAR(masks::bce_mask_loss(t, Array({1, 1, 4, 5}, g.grid.values)).item(), direct, 1e-12);
}

TEST(BceMaskLoss, RejectsOutOfRangePrediction) {
  masks::SoftMask p{dsp::Grid(1, 2, 1.5)};
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(ApplyMask, ScalesEveryCell) {
  dsp::ComplexSpectrogram s;
  s.bins = 2;
  s.frames = 2;
  s.values = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
  dsp::Grid m(2, 2);
  m.values = {0.0, 0.5, 1.0, 0.25};
  const auto out = masks::apply_mask(s, m);
  EXPECT_EQ(out.values[1], std::complex<double>(1.5, 2.0));
  EXPECT_EQ(out.values[0], std::complex<double>(0.0, 0.0));
  EXPECT_THROW(masks::apply_mask(s, dsp::Grid(3, 2)), ValidationError);
}

Tensor rows(std::vector<std::vector<double>> r) {
  const int n = static_cast<int>(r.size()), d = static_cast<int>(r[0].size());
  std::vector<double> flat;
  for (auto& row : r) flat.insert(flat.end(), row.begin(), row.end());
  return Tensor::constant(Array({n, d}, flat));
}

Tensor random_unit_rows(int n, int d, std::mt19937_64& rng) {
  return Tensor::constant(ad::l2_normalize(Tensor::constant(testing::random_array({n, d}, rng))).value());
}

double dist(const Tensor& a, const Tensor& b, int row) {
  const int d = a.dim(1);
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    const double x = a.value()[row * d + j] - b.value()[row * d + j];
    s += x * x;
  }
  return std::sqrt(s);
}

TEST(Losses, OrthogonalClosedForms) {
  const Tensor u = rows({{1, 0, 0, 0}}), v = rows({{0, 1, 0, 0}});
  for (double gamma : {0.0, 0.37, 1.0}) {
    losses::InterModalInputs in{u, v, u, v, u, v};
    EXPECT_NEAR(losses::inter_modal_loss(in, gamma, GroundTruthTerm::kInclude).item(), -2.0 * std::numbers::sqrt2,
                1e-9);
  }
  EXPECT_NEAR(losses::intra_modal_loss(u, v, u, v).item(), -std::numbers::sqrt2, 1e-9);
  losses::InterModalInputs same{u, u, u, u, u, u};
  EXPECT_EQ(losses::inter_modal_loss(same, 0.5, GroundTruthTerm::kInclude).item(), 0.0);
  EXPECT_EQ(losses::intra_modal_loss(u, u, u, u).item(), 0.0);
}

TEST(Losses, GammaSchedule) {
  EXPECT_EQ(losses::gamma_schedule(0), 1.0);
  EXPECT_EQ(losses::gamma_schedule(100), 0.9);
  EXPECT_EQ(losses::gamma_schedule(3000), 0.1);
  EXPECT_NEAR(losses::gamma_schedule(250), std::pow(0.9, 2.5), 1e-15);
  for (long i = 1; i < 5000; i += 37) EXPECT_LE(losses::gamma_schedule(i), losses::gamma_schedule(i - 1));
  EXPECT_THROW(losses::gamma_schedule(-1), ValidationError);
}

TEST(Losses, RandomUnitVectorsMatchDirectFormula) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4, d = 256;
    const Tensor pp = random_unit_rows(n, d, rng), pq = random_unit_rows(n, d, rng);
    const Tensor gp = random_unit_rows(n, d, rng), gq = random_unit_rows(n, d, rng);
    const Tensor vp = random_unit_rows(n, d, rng), vq = random_unit_rows(n, d, rng);
    const double gamma = 0.63;
    double inter = 0.0, intra = 0.0;
    for (int r = 0; r < n; ++r) {
      inter += gamma * (dist(gp, vp, r) + dist(gq, vq, r)) + dist(pp, vp, r) + dist(pq, vq, r) - dist(pp, vq, r) -
               dist(pq, vp, r);
      intra += dist(pp, gp, r) + dist(pq, gq, r) - dist(pp, pq, r);
    }
    losses::InterModalInputs in{pp, pq, gp, gq, vp, vq};
    const double l_inter = losses::inter_modal_loss(in, gamma, GroundTruthTerm::kInclude).item();
    const double l_intra = losses::intra_modal_loss(pp, pq, gp, gq).item();
    EXPECT_NEAR(l_inter, inter / n, 1e-12);
    EXPECT_NEAR(l_intra, intra / n, 1e-12);
    // Bounds for unit vectors.
    EXPECT_GE(l_intra, -2.0);
    EXPECT_LE(l_intra, 4.0);
    EXPECT_GE(l_inter, -4.0);
    EXPECT_LE(l_inter, 4.0 + 4.0 * gamma);
    // P/Q symmetry.
    losses::InterModalInputs swapped{pq, pp, gq, gp, vq, vp};
    EXPECT_NEAR(losses::inter_modal_loss(swapped, gamma, GroundTruthTerm::kInclude).item(), l_inter, 1e-12);
    EXPECT_NEAR(losses::intra_modal_loss(pq, pp, gq, gp).item(), l_intra, 1e-12);
  }
}

TEST(Losses, ExcludedGroundTruthTermIgnoresGroundTruth) {
  std::mt19937_64 rng(4);
  const Tensor pp = random_unit_rows(2, 8, rng), pq = random_unit_rows(2, 8, rng);
  const Tensor vp = random_unit_rows(2, 8, rng), vq = random_unit_rows(2, 8, rng);
  losses::InterModalInputs a{pp, pq, random_unit_rows(2, 8, rng), random_unit_rows(2, 8, rng), vp, vq};
  losses::InterModalInputs b{pp, pq, random_unit_rows(2, 8, rng), random_unit_rows(2, 8, rng), vp, vq};
  losses::InterModalInputs none{pp, pq, Tensor(), Tensor(), vp, vq};
  const double la = losses::inter_modal_loss(a, 1.0, GroundTruthTerm::kExclude).item();
  EXPECT_EQ(la, losses::inter_modal_loss(b, 1.0, GroundTruthTerm::kExclude).item());
  EXPECT_EQ(la, losses::inter_modal_loss(none, 1.0, GroundTruthTerm::kExclude).item());
  EXPECT_NE(la, losses::inter_modal_loss(a, 1.0, GroundTruthTerm::kInclude).item());
}

TEST(Losses, CoincidentVectorsHaveFiniteGradient) {
  Tensor u = Tensor::parameter(Array({1, 2}, std::vector<double>{1.0, 0.0}));
  Tensor w = Tensor::constant(Array({1, 2}, std::vector<double>{1.0, 0.0}));
  ad::backward(losses::intra_modal_loss(u, w, u, w));
  ASSERT_TRUE(u.has_grad());
  EXPECT_TRUE(u.grad().all_finite());
}

TEST(Losses, RejectsNonUnitInputs) {
  const Tensor u = rows({{1, 0}}), big = rows({{2, 0}});
  EXPECT_THROW(losses::intra_modal_loss(u, u, u, big), ValidationError);
  losses::InterModalInputs in{u, u, u, u, big, u};
  EXPECT_THROW(losses::inter_modal_loss(in, 1.0, GroundTruthTerm::kExclude), ValidationError);
}

TEST(Losses, TotalLossArithmetic) {
  auto b = losses::total_loss(0.7, 0.0, 0.0, 0.01);
  EXPECT_EQ(b.l_total, 0.7);
  b = losses::total_loss(0.0, 1.0, 2.0, 0.01);
  EXPECT_EQ(b.l_cs, 3.0);
  EXPECT_NEAR(b.l_total, 0.03, 1e-15);
  b = losses::total_loss(0.4242, 0.3, -1.2, 0.0);
  EXPECT_EQ(b.l_total, b.l_mask);
  EXPECT_EQ(losses::kTrainLambda, 0.01);
  EXPECT_EQ(losses::kAdaptLambda, 1.0);
  EXPECT_THROW(losses::total_loss(0, 0, 0, -1.0), ValidationError);
}

}  // namespace
}  // namespace consep
