// src/bsseval.cpp

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

#include "consep/bsseval.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "consep/error.hpp"

namespace consep::bss {

namespace {

// Levinson is only worth its bookkeeping for long filters.
constexpr int kToeplitzMinLength = 32;
// Iterative-refinement passes that remove the bias of the diagonal loading.
constexpr int kRefinementSteps = 2;

// c(d) = sum_u a(u) b(u + d) for d in [-(f-1), f-1], stored at index d + f - 1.
std::vector<double> cross_correlation(const std::vector<double>& a, const std::vector<double>& b, int f) {
  const long n = static_cast<long>(a.size());
  std::vector<double> c(2 * static_cast<std::size_t>(f) - 1, 0.0);
  for (int d = -(f - 1); d < f; ++d) {
    const long lo = std::max(0L, -static_cast<long>(d)), hi = std::min(n, n - d);
    double acc = 0.0;
    for (long u = lo; u < hi; ++u) acc += a[u] * b[u + d];
    c[d + f - 1] = acc;
  }
  return c;
}

// Symmetric positive definite Toeplitz solve with first column r (Levinson).
// Returns false if the recursion breaks down.
bool levinson_solve(const std::vector<double>& r, const double* rhs, double* x) {
  const int n = static_cast<int>(r.size());
  if (!(r[0] > 0.0)) return false;
  std::vector<double> f(n, 0.0), f_next(n, 0.0);  // T_k f = e_1
  f[0] = 1.0 / r[0];
  x[0] = rhs[0] / r[0];
  for (int k = 1; k < n; ++k) {
    double ef = 0.0, ex = 0.0;
    for (int i = 0; i < k; ++i) {
      ef += r[k - i] * f[i];
      ex += r[k - i] * x[i];
    }
    const double denom = 1.0 - ef * ef;
    if (!(denom > 1e-300) || !std::isfinite(ef)) return false;
    // f' = ([f;0] - ef [0;rev f]) / denom
    for (int i = 0; i <= k; ++i) {
      const double fwd = i < k ? f[i] : 0.0;
      const double bwd = i > 0 ? f[k - i] : 0.0;
      f_next[i] = (fwd - ef * bwd) / denom;
    }
    std::swap(f, f_next);
    // x' = [x;0] + (rhs_k - ex) * rev(f')
    const double scale = rhs[k] - ex;
    x[k] = 0.0;
    for (int i = 0; i <= k; ++i) x[i] += scale * f[k - i];
  }
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace

double safe_db(double num, double den) {
  if (den < 1e-20) return kMetricCapDb;
  if (!(num > 0.0)) return -kMetricCapDb;
  return std::clamp(10.0 * std::log10(num / den), -kMetricCapDb, kMetricCapDb);
}

Metrics score(const BssDecomposition& d) {
  const std::size_t n = d.s_target.size();
  if (d.e_interf.size() != n || d.e_artif.size() != n) throw ValidationError("score: component lengths differ");
  double target = 0.0, interf = 0.0, artif = 0.0, distortion = 0.0, spatial = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    target += d.s_target[i] * d.s_target[i];
    interf += d.e_interf[i] * d.e_interf[i];
    artif += d.e_artif[i] * d.e_artif[i];
    const double e = d.e_interf[i] + d.e_artif[i];
    distortion += e * e;
    const double s = d.s_target[i] + d.e_interf[i];
    spatial += s * s;
  }
  return {safe_db(target, distortion), safe_db(target, interf), safe_db(spatial, artif)};
}

struct Evaluator::Impl {
  int f = 0;
  std::size_t len = 0;
  std::vector<std::vector<double>> refs;
  // Joint Gram over every reference's shifts; the factorisation is of the
  // regularised matrix and serves as preconditioner for refinement steps
  // against the exact one.
  Eigen::MatrixXd gram;
  Eigen::LLT<Eigen::MatrixXd> joint;
  std::vector<std::vector<double>> auto_corr;
  // Per-reference Toeplitz first columns (regularised), with an LLT fallback.
  std::vector<std::vector<double>> toeplitz;
  std::vector<std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>>> own;

  // x_i(a) = sum_u s_i(u) e(u + a), a in [0, f)
  Eigen::VectorXd rhs(const std::vector<double>& e) const {
    const int n = static_cast<int>(refs.size());
    Eigen::VectorXd d(static_cast<Eigen::Index>(n) * f);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < f; ++a) {
        double acc = 0.0;
        const long lim = static_cast<long>(len) - a;
        for (long u = 0; u < lim; ++u) acc += refs[i][u] * e[u + a];
        d[static_cast<Eigen::Index>(i) * f + a] = acc;
      }
    return d;
  }

  // sum over blocks of sum_a c(block, a) s_block(t - a), t in [0, len + f - 1)
  std::vector<double> synthesize(const Eigen::VectorXd& c, const std::vector<int>& blocks) const {
    std::vector<double> out(len + f - 1, 0.0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& s = refs[blocks[k]];
      for (int a = 0; a < f; ++a) {
        const double w = c[static_cast<Eigen::Index>(k) * f + a];
        if (w == 0.0) continue;
        for (std::size_t u = 0; u < len; ++u) out[u + a] += w * s[u];
      }
    }
    return out;
  }

  Eigen::VectorXd solve_own_regularised(int j, const Eigen::VectorXd& d) const {
    Eigen::VectorXd x(f);
    if (own[j]) return own[j]->solve(d);
    if (!levinson_solve(toeplitz[j], d.data(), x.data()))
      throw NumericalError("bss-eval: Toeplitz recursion broke down for reference " + std::to_string(j + 1));
    return x;
  }

  Eigen::VectorXd solve_own(int j, const Eigen::VectorXd& d) const {
    const auto& r = auto_corr[j];
    Eigen::VectorXd x = solve_own_regularised(j, d);
    for (int step = 0; step < kRefinementSteps; ++step) {
      Eigen::VectorXd res = d;
      for (int a = 0; a < f; ++a) {
        double acc = 0.0;
        for (int b = 0; b < f; ++b) acc += r[std::abs(a - b)] * x[b];
        res[a] -= acc;
      }
      x += solve_own_regularised(j, res);
    }
    return x;
  }

  Eigen::VectorXd solve_joint(const Eigen::VectorXd& d) const {
    Eigen::VectorXd x = joint.solve(d);
    for (int step = 0; step < kRefinementSteps; ++step) x += joint.solve(d - gram * x);
    return x;
  }
};

Evaluator::Evaluator(std::vector<dsp::Waveform> references, int filter_len) : impl_(std::make_unique<Impl>()) {
  if (references.empty()) throw ValidationError("bss-eval: no references");
  if (filter_len < 1) throw ValidationError("bss-eval: filter length must be at least 1");
  Impl& m = *impl_;
  m.f = filter_len;
  m.len = references[0].size();
  for (const auto& r : references) {
    if (r.size() != m.len)
      throw ValidationError("bss-eval: reference lengths differ (" + std::to_string(r.size()) + " vs " +
                            std::to_string(m.len) + ")");
    if (m.len == 0) throw ValidationError("bss-eval: empty reference");
    m.refs.push_back(r.samples);
  }
  const int n = static_cast<int>(m.refs.size());
  const int f = m.f;
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * f;
  Eigen::MatrixXd gram(dim, dim);
  std::vector<std::vector<double>> auto_corr(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const auto c = cross_correlation(m.refs[i], m.refs[j], f);
      if (i == j) auto_corr[i] = std::vector<double>(c.begin() + (f - 1), c.end());
      for (int a = 0; a < f; ++a)
        for (int b = 0; b < f; ++b) {
          const double v = c[a - b + f - 1];
          gram(static_cast<Eigen::Index>(i) * f + a, static_cast<Eigen::Index>(j) * f + b) = v;
          gram(static_cast<Eigen::Index>(j) * f + b, static_cast<Eigen::Index>(i) * f + a) = v;
        }
    }
  const double joint_reg = kGramRegularization * gram.diagonal().maxCoeff();
  if (!(gram.diagonal().maxCoeff() > 0.0)) throw NumericalError("bss-eval: references are all zero");
  m.gram = gram;
  m.auto_corr = auto_corr;
  gram.diagonal().array() += joint_reg;
  m.joint.compute(gram);
  if (m.joint.info() != Eigen::Success) throw NumericalError("bss-eval: reference Gram matrix is singular");

  m.toeplitz.resize(n);
  m.own.resize(n);
  for (int j = 0; j < n; ++j) {
    if (!(auto_corr[j][0] > 0.0)) throw NumericalError("bss-eval: reference " + std::to_string(j + 1) + " is zero");
    m.toeplitz[j] = auto_corr[j];
    m.toeplitz[j][0] += kGramRegularization * auto_corr[j][0];
    bool use_levinson = f >= kToeplitzMinLength;
    if (use_levinson) {
      // Probe the recursion once; fall back to a dense factorisation if it fails.
      std::vector<double> probe(f, 1.0), x(f);
      use_levinson = levinson_solve(m.toeplitz[j], probe.data(), x.data());
    }
    if (!use_levinson) {
      Eigen::MatrixXd t(f, f);
      for (int a = 0; a < f; ++a)
        for (int b = 0; b < f; ++b) t(a, b) = m.toeplitz[j][std::abs(a - b)];
      m.own[j] = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(t);
      if (m.own[j]->info() != Eigen::Success)
        throw NumericalError("bss-eval: Gram matrix of reference " + std::to_string(j + 1) + " is singular");
    }
  }
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;
Evaluator& Evaluator::operator=(Evaluator&&) noexcept = default;

int Evaluator::sources() const { return static_cast<int>(impl_->refs.size()); }
int Evaluator::filter_len() const { return impl_->f; }
std::size_t Evaluator::length() const { return impl_->len; }

std::vector<BssDecomposition> Evaluator::decompose_all(const dsp::Waveform& estimate) const {
  const Impl& m = *impl_;
  if (estimate.size() != m.len)
    throw ValidationError("bss-eval: estimate length " + std::to_string(estimate.size()) +
                          " does not match reference length " + std::to_string(m.len));
  const int n = sources();
  std::vector<double> padded(m.len + m.f - 1, 0.0);
  std::copy(estimate.samples.begin(), estimate.samples.end(), padded.begin());
  const Eigen::VectorXd d = m.rhs(padded);

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const Eigen::VectorXd c_all = m.solve_joint(d);
  const std::vector<double> proj_all = m.synthesize(c_all, all);

  std::vector<BssDecomposition> out(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd c_own = m.solve_own(j, d.segment(static_cast<Eigen::Index>(j) * m.f, m.f));
    BssDecomposition& dec = out[j];
    dec.s_target = m.synthesize(c_own, {j});
    dec.e_interf.resize(padded.size());
    dec.e_artif.resize(padded.size());
    for (std::size_t t = 0; t < padded.size(); ++t) {
      dec.e_interf[t] = proj_all[t] - dec.s_target[t];
      dec.e_artif[t] = padded[t] - proj_all[t];
    }
  }
  return out;
}

BssDecomposition Evaluator::decompose(const dsp::Waveform& estimate, int target) const {
  if (target < 0 || target >= sources()) throw ValidationError("bss-eval: target index out of range");
  return decompose_all(estimate)[target];
}

BssDecomposition decompose(const dsp::Waveform& estimate, const std::vector<dsp::Waveform>& references, int target,
                           int filter_len) {
  return Evaluator(references, filter_len).decompose(estimate, target);
}

std::string MetricsReport::permutation_label() const {
  return std::to_string(permutation[0] + 1) + "-" + std::to_string(permutation[1] + 1);
}

MetricsReport evaluate_pair(const std::array<dsp::Waveform, 2>& estimates, const Evaluator& references,
                            bool permute) {
  if (references.sources() != 2) throw ValidationError("evaluate_pair: expected two references");
  // metrics[e][r]: estimate e scored against reference r
  std::array<std::array<Metrics, 2>, 2> metrics;
  for (int e = 0; e < 2; ++e) {
    if (!permute) {
      metrics[e][e] = score(references.decompose(estimates[e], e));
      continue;
    }
    const auto decs = references.decompose_all(estimates[e]);
    for (int r = 0; r < 2; ++r) metrics[e][r] = score(decs[r]);
  }
  MetricsReport identity, swapped;
  identity.per_source = {metrics[0][0], metrics[1][1]};
  if (!permute) return identity;
  swapped.per_source = {metrics[1][0], metrics[0][1]};
  swapped.permutation = {1, 0};
  return swapped.mean_sdr() > identity.mean_sdr() ? swapped : identity;
}

MetricsReport evaluate_pair(const std::array<dsp::Waveform, 2>& estimates,
                            const std::array<dsp::Waveform, 2>& references, bool permute, int filter_len) {
  return evaluate_pair(estimates, Evaluator({references[0], references[1]}, filter_len), permute);
}

std::string csv_header() { return "pair_id,source_id,SDR,SIR,SAR,permutation\n"; }

std::string csv_rows(int pair_id, const MetricsReport& r) {
  std::string out;
  char buf[160];
  for (int s = 0; s < 2; ++s) {
    const Metrics& m = r.per_source[s];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%.10g,%s\n", pair_id, s + 1, m.sdr, m.sir, m.sar,
                  r.permutation_label().c_str());
    out += buf;
  }
  return out;
}

}  // namespace consep::bss
