// src/online_matching.cpp

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

#include "consep/online_matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "consep/ad/ops.hpp"
#include "consep/ad/optim.hpp"
#include "consep/ad/params.hpp"
#include "consep/error.hpp"

namespace consep::om {

void OMConfig::validate() const {
  if (iterations < 0) throw ValidationError("online matching: T must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("online matching: beta must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("online matching: lambda must be >= 0");
  if (iterations > 0 && !terms.any())
    throw ValidationError("online matching: adaptation needs at least one consistency term");
}

nlohmann::json OMConfig::to_json() const {
  return {{"iterations", iterations},
          {"beta", beta},
          {"lambda", lambda},
          {"freeze_bn", freeze_bn},
          {"optimizer", optimizer == Optimizer::kSgd ? "sgd" : "adam"},
          {"use_inter", terms.inter},
          {"use_intra", terms.intra}};
}

OMConfig OMConfig::from_json(const nlohmann::json& j) {
  OMConfig c;
  try {
    c.iterations = j.value("iterations", c.iterations);
    c.beta = j.value("beta", c.beta);
    c.lambda = j.value("lambda", c.lambda);
    c.freeze_bn = j.value("freeze_bn", c.freeze_bn);
    const std::string opt = j.value("optimizer", std::string("sgd"));
    if (opt == "sgd") c.optimizer = Optimizer::kSgd;
    else if (opt == "adam") c.optimizer = Optimizer::kAdam;
    else throw ValidationError("online matching: unknown optimizer '" + opt + "' (sgd or adam)");
    c.terms.inter = j.value("use_inter", c.terms.inter);
    c.terms.intra = j.value("use_intra", c.terms.intra);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("online matching config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

// Restores parameters and statistics and drops any gradient buffers we created.
struct ResetGuard {
  SeparationModel& model;
  ad::ParamSnapshot snap;
  explicit ResetGuard(SeparationModel& m) : model(m), snap(ad::snapshot(m)) {}
  ~ResetGuard() {
    ad::restore(model, snap);
    for (auto& p : model.parameters()) p.tensor.clear_grad();
  }
};

}  // namespace

AdaptResult adapt_pair(SeparationModel& model, const SeparationQuery& query, const OMConfig& cfg,
                       const std::vector<int>& capture) {
  cfg.validate();
  for (int t : capture)
    if (t < 0 || t > cfg.iterations)
      throw ValidationError("adapt_pair: capture point " + std::to_string(t) + " outside [0, " +
                            std::to_string(cfg.iterations) + "]");
  if (query.mixture.rank() != 4 || query.mixture.dim(0) != 1)
    throw ValidationError("adapt_pair: expected a single pair, got mixture " + to_string(query.mixture.shape()));

  ResetGuard reset(model);
  const Phase phase = cfg.freeze_bn ? Phase::kAdapt : Phase::kEval;
  std::vector<ad::Tensor> params;
  for (auto& p : model.parameters()) {
    if (cfg.freeze_bn && p.norm_affine) continue;
    // Zero-filled buffers let the optimizer step parameters the loss does not reach.
    ad::grad_buffer(*p.tensor.node());
    params.push_back(p.tensor);
  }
  std::unique_ptr<ad::Sgd> sgd;
  std::unique_ptr<ad::Adam> adam;
  if (cfg.optimizer == Optimizer::kSgd) sgd = std::make_unique<ad::Sgd>(params, cfg.beta);
  else adam = std::make_unique<ad::Adam>(params, cfg.beta);

  AdaptResult res;
  res.captured.resize(capture.size());
  const ad::Tensor mixture = ad::Tensor::constant(query.mixture);
  MaskPair unadapted;
  for (int tau = 0; tau <= cfg.iterations; ++tau) {
    for (auto& t : params) t.zero_grad();
    double value = NAN;
    ad::Tensor loss;
    SeparationOutput out;
    try {
      out = model.separate(mixture, query.motion_p, query.motion_q, phase);
      if (tau == 0) unadapted = {out.mask_p.value(), out.mask_q.value()};
      for (std::size_t k = 0; k < capture.size(); ++k)
        if (capture[k] == tau) res.captured[k] = {out.mask_p.value(), out.mask_q.value()};
      if (tau == cfg.iterations) res.masks = {out.mask_p.value(), out.mask_q.value()};
      if (cfg.terms.any()) {
        const ConsistencyLosses cs = self_consistency(model, out, mixture, query, cfg.terms, phase);
        loss = cs.inter.defined() && cs.intra.defined() ? ad::add(cs.inter, cs.intra)
                                                         : (cs.inter.defined() ? cs.inter : cs.intra);
        value = loss.item();
      } else {
        value = 0.0;
      }
    } catch (const NumericalError&) {
      value = NAN;
    }
    res.l_cs.push_back(value);
    if (!std::isfinite(value)) {
      res.warning = true;
      res.message = "non-finite consistency loss at adaptation step " + std::to_string(tau) +
                    "; parameters restored and unadapted masks returned";
      if (tau == 0) {
        // The forward itself may have failed; fall back to plain inference after reset.
        ad::restore(model, reset.snap);
        unadapted = infer_masks(model, query);
      }
      res.masks = unadapted;
      for (auto& c : res.captured) c = unadapted;
      return res;
    }
    if (tau == cfg.iterations) break;
    ad::backward(ad::scale(loss, cfg.lambda));
    if (sgd) sgd->step();
    else adam->step();
  }
  return res;
}

std::string outcome_csv_header() {
  return "pair_id,T,l_cs_trajectory,warning,"
         "SDR1_before,SIR1_before,SAR1_before,SDR2_before,SIR2_before,SAR2_before,"
         "SDR1_after,SIR1_after,SAR1_after,SDR2_after,SIR2_after,SAR2_after\n";
}

std::string outcome_csv_row(const PairOutcome& o, int T) {
  std::string traj;
  char buf[64];
  for (std::size_t i = 0; i < o.l_cs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.10g", i ? ";" : "", o.l_cs[i]);
    traj += buf;
  }
  std::string row = std::to_string(o.pair_id) + "," + std::to_string(T) + "," + traj + "," +
                    (o.warning ? "1" : "0");
  for (const auto* r : {&o.before, &o.after})
    for (const auto& m : r->per_source) {
      std::snprintf(buf, sizeof(buf), ",%.10g,%.10g,%.10g", m.sdr, m.sir, m.sar);
      row += buf;
    }
  return row + "\n";
}

std::string sweep_csv_header() { return "T,mean_SDR,mean_SIR,mean_SAR,lcs_decreased_fraction\n"; }

std::string sweep_csv_row(const SweepRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", r.T, r.mean_sdr, r.mean_sir, r.mean_sar,
                r.lcs_decreased_fraction);
  return buf;
}

}  // namespace consep::om
