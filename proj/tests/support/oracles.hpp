// tests/support/oracles.hpp

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

#ifndef CONSEP_TESTS_SUPPORT_ORACLES_HPP_
#define CONSEP_TESTS_SUPPORT_ORACLES_HPP_

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "consep/ad/tensor.hpp"
#include "consep/array.hpp"
#include "consep/dsp.hpp"
#include "consep/masks.hpp"

namespace consep::testing {

Array random_array(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);

/// Uniform in [lo, hi] with a random sign; keeps samples away from zero.
Array random_signed_away_from_zero(const Shape& shape, std::mt19937_64& rng, double lo, double hi);

double max_abs_diff(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.

using ScalarFn = std::function<ad::Tensor(const std::vector<ad::Tensor>&)>;

/// Worst ||g - g_fd|| / max(||g||, ||g_fd||) over all inputs, with g from
/// ad::backward and g_fd from central differences of step h * max(1, |x|).
double gradient_relative_error(const ScalarFn& f, const std::vector<Array>& inputs, double h = 1e-6);

/// Reduces an arbitrary tensor to a scalar through a fixed random weighting,
/// so that every output entry reaches the gradient with a distinct weight.
ad::Tensor weighted_sum(const ad::Tensor& y, std::uint64_t seed);

struct GradCase {
  std::string name;
  int instances = 0;
  double worst = 0.0;  // largest relative error seen
};

/// Every differentiable primitive and every loss, `instances` random draws each.
std::vector<GradCase> run_gradient_suite(int instances, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Other independent references.

/// Double loop over cells: 1 where target >= mixture.
dsp::Grid mask_oracle(const dsp::Grid& target, const dsp::Grid& mixture);

/// Dense LS projection of `estimate` onto the span of every reference and its
/// first flen-1 delays, built from explicit shift matrices and solved by
/// Householder QR. Returns target, interference and artifact components.
struct DenseDecomposition {
  std::vector<double> s_target, e_interf, e_artif;
};
DenseDecomposition dense_bss_oracle(const std::vector<std::vector<double>>& refs, const std::vector<double>& estimate,
                                    int target, int flen);

/// Direct O(N^2) one-sided DFT of one Hann-windowed frame.
std::vector<std::complex<double>> direct_dft_frame(const std::vector<double>& x, std::size_t start, int window);

/// Fresh directory under the system temp dir, removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string file_bytes(const std::filesystem::path& path);

}  // namespace consep::testing

#endif  // CONSEP_TESTS_SUPPORT_ORACLES_HPP_
