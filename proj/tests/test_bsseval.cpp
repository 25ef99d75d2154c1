// tests/test_bsseval.cpp

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

#include "consep/bsseval.hpp"
#include "consep/error.hpp"
#include "support/oracles.hpp"

namespace consep {
namespace {

using dsp::Waveform;

Waveform wave(std::vector<double> s) { return {std::move(s), 8000}; }

Waveform noise(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& v : s) v = d(rng);
  return wave(s);
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  return testing::max_abs_diff(a, b) / scale;
}

TEST(BssDecompose, MatchesDenseShiftMatrixOracle) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len_d(16, 128), flen_d(1, 10), nref_d(2, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const int len = len_d(rng), flen = flen_d(rng), nref = nref_d(rng);
    std::vector<Waveform> refs;
    std::vector<std::vector<double>> raw;
    for (int j = 0; j < nref; ++j) {
      refs.push_back(noise(len, rng));
      raw.push_back(refs.back().samples);
    }
    // Estimate: a filtered mix of references plus noise.
    Waveform est = noise(len, rng);
    for (int t = 0; t < len; ++t) {
      est.samples[t] *= 0.3;
      est.samples[t] += raw[0][t] + (t > 0 ? 0.4 * raw[0][t - 1] : 0.0) + 0.5 * raw[1][t];
    }
    const bss::Evaluator ev(refs, flen);
    for (int target = 0; target < nref; ++target) {
      const auto got = ev.decompose(est, target);
      const auto want = testing::dense_bss_oracle(raw, est.samples, target, flen);
      const double scale = testing::l2_norm(est.samples);
      ASSERT_EQ(got.s_target.size(), want.s_target.size());
      EXPECT_LE(rel_diff(got.s_target, want.s_target, scale), 1e-8) << len << " " << flen;
      EXPECT_LE(rel_diff(got.e_interf, want.e_interf, scale), 1e-8);
      EXPECT_LE(rel_diff(got.e_artif, want.e_artif, scale), 1e-8);
    }
  }
}

TEST(BssDecompose, LongFilterPathMatchesDenseOracle) {
  // Filter lengths from 32 up take the Toeplitz recursion for the target projection.
  std::mt19937_64 rng(2);
  const int len = 256;
  for (int flen : {32, 48}) {
    std::vector<Waveform> refs{noise(len, rng), noise(len, rng)};
    Waveform est = noise(len, rng);
    for (int t = 0; t < len; ++t) est.samples[t] = 0.2 * est.samples[t] + refs[1].samples[t];
    const auto got = bss::decompose(est, refs, 1, flen);
    const auto want = testing::dense_bss_oracle({refs[0].samples, refs[1].samples}, est.samples, 1, flen);
    const double scale = testing::l2_norm(est.samples);
    EXPECT_LE(rel_diff(got.s_target, want.s_target, scale), 1e-8);
    EXPECT_LE(rel_diff(got.e_artif, want.e_artif, scale), 1e-8);
  }
}

TEST(BssDecompose, ExactReferenceIsCapped) {
  std::vector<double> a(64, 0.0), b(64, 0.0);
  for (int t = 0; t < 64; ++t) (t % 2 ? b : a)[t] = std::sin(0.3 * t) + 1.5;
  const auto d = bss::decompose(wave(a), {wave(a), wave(b)}, 0, 1);
  const auto m = bss::score(d);
  EXPECT_EQ(m.sdr, 200.0);
  EXPECT_EQ(m.sir, 200.0);
  EXPECT_EQ(m.sar, 200.0);
}

TEST(BssDecompose, KnownSirCase) {
  // s1 and s2 on disjoint samples: orthogonal with equal energy.
  std::vector<double> s1(100, 0.0), s2(100, 0.0), est(100, 0.0);
  for (int t = 0; t < 50; ++t) {
    s1[t] = (t % 3) - 1.0 + 0.25;
    s2[50 + t] = s1[t];
  }
  for (int t = 0; t < 100; ++t) est[t] = s1[t] + 0.1 * s2[t];
  const auto d = bss::decompose(wave(est), {wave(s1), wave(s2)}, 0, 1);
  const auto m = bss::score(d);
  EXPECT_NEAR(m.sir, 20.0, 1e-9);
  EXPECT_NEAR(m.sdr, 20.0, 1e-9);
  EXPECT_LT(testing::l2_norm(d.e_artif), 1e-12);
}

TEST(BssDecompose, ScaleInvarianceOrthogonalityAdditivity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Waveform> refs{noise(300, rng), noise(300, rng)};
    Waveform est = noise(300, rng);
    for (int t = 0; t < 300; ++t) est.samples[t] += refs[0].samples[t] + 0.3 * refs[1].samples[t];
    const bss::Evaluator ev(refs, 16);
    const auto d = ev.decompose(est, 0);
    const auto m = bss::score(d);
    Waveform scaled = est;
    for (auto& v : scaled.samples) v *= 3.7;
    const auto ms = bss::score(ev.decompose(scaled, 0));
    EXPECT_NEAR(m.sdr, ms.sdr, 1e-9);
    EXPECT_NEAR(m.sir, ms.sir, 1e-9);
    EXPECT_NEAR(m.sar, ms.sar, 1e-9);

    const std::size_t n = d.s_target.size();
    double st_ei = 0.0, sp_ea = 0.0, e2 = 0.0, sum_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      st_ei += d.s_target[i] * d.e_interf[i];
      sp_ea += (d.s_target[i] + d.e_interf[i]) * d.e_artif[i];
      const double e = i < est.size() ? est.samples[i] : 0.0;
      e2 += e * e;
      sum_err = std::max(sum_err, std::abs(d.s_target[i] + d.e_interf[i] + d.e_artif[i] - e));
    }
    EXPECT_LE(std::abs(st_ei) / e2, 1e-8);
    EXPECT_LE(std::abs(sp_ea) / e2, 1e-8);
    EXPECT_LE(sum_err / std::sqrt(e2), 1e-9);
  }
}

TEST(BssDecompose, DecomposeAllAgreesWithSingleTargets) {
  std::mt19937_64 rng(4);
  std::vector<Waveform> refs{noise(200, rng), noise(200, rng)};
  const Waveform est = noise(200, rng);
  const bss::Evaluator ev(refs, 8);
  const auto all = ev.decompose_all(est);
  for (int j = 0; j < 2; ++j) {
    const auto one = ev.decompose(est, j);
    EXPECT_LE(testing::max_abs_diff(all[j].s_target, one.s_target), 1e-12);
    EXPECT_LE(testing::max_abs_diff(all[j].e_artif, one.e_artif), 1e-12);
  }
}

TEST(BssDecompose, Errors) {
  std::mt19937_64 rng(5);
  EXPECT_THROW(bss::decompose(noise(50, rng), {noise(50, rng), noise(49, rng)}, 0, 4), ValidationError);
  EXPECT_THROW(bss::decompose(noise(50, rng), {noise(50, rng), noise(50, rng)}, 0, 0), ValidationError);
  EXPECT_THROW(bss::decompose(noise(40, rng), {noise(50, rng), noise(50, rng)}, 0, 4), ValidationError);
  EXPECT_THROW(bss::decompose(noise(50, rng), {noise(50, rng), noise(50, rng)}, 2, 4), ValidationError);
}

TEST(BssScore, FormulaAndCap) {
  bss::BssDecomposition d{{1.0, 0.0}, {0.0, 0.1}, {0.0, 0.0}};
  auto m = bss::score(d);
  EXPECT_NEAR(m.sir, 20.0, 1e-12);
  EXPECT_NEAR(m.sdr, 20.0, 1e-12);
  EXPECT_EQ(m.sar, 200.0);
  d = {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  m = bss::score(d);
  EXPECT_EQ(m.sdr, 200.0);
  EXPECT_EQ(m.sir, 200.0);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    bss::BssDecomposition r;
    for (int i = 0; i < 30; ++i) {
      r.s_target.push_back(g(rng));
      r.e_interf.push_back(0.3 * g(rng));
      r.e_artif.push_back(0.2 * g(rng));
    }
    double t = 0, in = 0, ar = 0, dist = 0, sp = 0;
    for (int i = 0; i < 30; ++i) {
      t += r.s_target[i] * r.s_target[i];
      in += r.e_interf[i] * r.e_interf[i];
      ar += r.e_artif[i] * r.e_artif[i];
      dist += std::pow(r.e_interf[i] + r.e_artif[i], 2);
      sp += std::pow(r.s_target[i] + r.e_interf[i], 2);
    }
    const auto s = bss::score(r);
    EXPECT_NEAR(s.sdr, 10 * std::log10(t / dist), 1e-10);
    EXPECT_NEAR(s.sir, 10 * std::log10(t / in), 1e-10);
    EXPECT_NEAR(s.sar, 10 * std::log10(sp / ar), 1e-10);
  }
}

TEST(BssScore, SafeDbAlwaysFinite) {
  EXPECT_EQ(bss::safe_db(1.0, 0.0), 200.0);
  EXPECT_EQ(bss::safe_db(0.0, 1.0), -200.0);
  EXPECT_EQ(bss::safe_db(1e300, 1e-19), 200.0);
  EXPECT_NEAR(bss::safe_db(10.0, 1.0), 10.0, 1e-12);
}

TEST(BssEvaluatePair, PermutationHandling) {
  std::mt19937_64 rng(7);
  const std::array<Waveform, 2> refs{noise(256, rng), noise(256, rng)};
  auto id = bss::evaluate_pair(refs, refs, false, 4);
  EXPECT_EQ(id.permutation_label(), "1-2");
  EXPECT_GE(id.per_source[0].sdr, 150.0);
  EXPECT_GE(id.per_source[1].sir, 150.0);

  const std::array<Waveform, 2> swapped{refs[1], refs[0]};
  const auto p = bss::evaluate_pair(swapped, refs, true, 4);
  EXPECT_EQ(p.permutation_label(), "2-1");
  EXPECT_GE(p.per_source[0].sdr, 150.0);
  EXPECT_GE(p.per_source[1].sdr, 150.0);

  for (int trial = 0; trial < 10; ++trial) {
    std::array<Waveform, 2> est{noise(256, rng), noise(256, rng)};
    for (int t = 0; t < 256; ++t) {
      est[0].samples[t] += (trial % 2 ? refs[1] : refs[0]).samples[t];
      est[1].samples[t] += 0.5 * refs[1].samples[t];
    }
    const bss::Evaluator ev({refs[0], refs[1]}, 4);
    EXPECT_GE(bss::evaluate_pair(est, ev, true).mean_sdr(), bss::evaluate_pair(est, ev, false).mean_sdr());
  }
}

TEST(BssEvaluatePair, CsvRows) {
  bss::MetricsReport r;
  r.per_source[0] = {1.5, 2.25, 3.0};
  r.per_source[1] = {-1.0, 0.5, 200.0};
  EXPECT_EQ(bss::csv_header(), "pair_id,source_id,SDR,SIR,SAR,permutation\n");
  EXPECT_EQ(bss::csv_rows(7, r), "7,1,1.5,2.25,3,1-2\n7,2,-1,0.5,200,1-2\n");
}

}  // namespace
}  // namespace consep
