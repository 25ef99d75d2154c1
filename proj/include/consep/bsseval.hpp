// include/consep/bsseval.hpp

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

#ifndef CONSEP_BSSEVAL_HPP_
#define CONSEP_BSSEVAL_HPP_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "consep/dsp.hpp"

namespace consep::bss {

inline constexpr int kDefaultFilterLength = 512;
inline constexpr double kMetricCapDb = 200.0;
inline constexpr double kGramRegularization = 1e-10;  // relative to the largest Gram diagonal entry

/// Components of one estimate, each of length L + filter_len - 1 (the
/// estimate is zero-padded to that length before projecting).
struct BssDecomposition {
  std::vector<double> s_target;
  std::vector<double> e_interf;
  std::vector<double> e_artif;
};

struct Metrics {
  double sdr = 0.0, sir = 0.0, sar = 0.0;
};

/// 10 log10(num/den) with den < 1e-20 reported as +200 dB and a vanishing
/// numerator as -200 dB, so every value is finite.
double safe_db(double num, double den);

Metrics score(const BssDecomposition& d);

/// Projection machinery for a fixed set of equal-length references.
/// Gram matrices are built and factorised once and reused for every estimate.
class Evaluator {
 public:
  Evaluator(std::vector<dsp::Waveform> references, int filter_len = kDefaultFilterLength);
  ~Evaluator();
  Evaluator(Evaluator&&) noexcept;
  Evaluator& operator=(Evaluator&&) noexcept;

  int sources() const;
  int filter_len() const;
  std::size_t length() const;

  /// Decomposition of `estimate` with reference `target` as the true source.
  BssDecomposition decompose(const dsp::Waveform& estimate, int target) const;
  /// Projections for every target at once; the all-reference projection is shared.
  std::vector<BssDecomposition> decompose_all(const dsp::Waveform& estimate) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

BssDecomposition decompose(const dsp::Waveform& estimate, const std::vector<dsp::Waveform>& references, int target,
                           int filter_len = kDefaultFilterLength);

struct MetricsReport {
  std::array<Metrics, 2> per_source;  // indexed by reference
  std::array<int, 2> permutation{0, 1};  // estimate index assigned to each reference

  double mean_sdr() const { return 0.5 * (per_source[0].sdr + per_source[1].sdr); }
  std::string permutation_label() const;  // "1-2" or "2-1"
};

MetricsReport evaluate_pair(const std::array<dsp::Waveform, 2>& estimates, const Evaluator& references, bool permute);
MetricsReport evaluate_pair(const std::array<dsp::Waveform, 2>& estimates,
                            const std::array<dsp::Waveform, 2>& references, bool permute,
                            int filter_len = kDefaultFilterLength);

/// "pair_id,source_id,SDR,SIR,SAR,permutation" header and rows.
std::string csv_header();
std::string csv_rows(int pair_id, const MetricsReport& r);

}  // namespace consep::bss

#endif  // CONSEP_BSSEVAL_HPP_
