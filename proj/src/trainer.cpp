// src/trainer.cpp

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

#include "consep/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "consep/ad/ops.hpp"
#include "consep/error.hpp"
#include "consep/io.hpp"
#include "consep/masks.hpp"
#include "consep/random.hpp"

namespace consep::train {

namespace {

const char* const kGroups[] = {"audio", "vision", "fusion", "consistency"};

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

nlohmann::json draw_json(const synth::Dataset& ds, const synth::PairDraw& d) {
  auto win = [&](const synth::ClipWindow& w) {
    return nlohmann::json{{"clip", ds.manifest.clips[w.clip].waveform_path}, {"motion_start", w.motion_start}};
  };
  return {{"p", win(d.p)}, {"q", win(d.q)}, {"template_p", win(d.template_p)}, {"template_q", win(d.template_q)}};
}

nlohmann::json array_stats(const Array& a) {
  double lo = INFINITY, hi = -INFINITY;
  std::size_t bad = 0;
  for (double v : a.data()) {
    if (!std::isfinite(v)) {
      ++bad;
      continue;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {{"min", lo}, {"max", hi}, {"non_finite", bad}};
}

}  // namespace

double LearningRates::for_group(const std::string& group) const {
  if (group == "audio") return audio;
  if (group == "fusion") return fusion;
  if (group == "vision") return vision;
  if (group == "consistency") return consistency;
  throw ValidationError("no learning rate for parameter group '" + group + "'");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("train: batch size must be positive");
  if (total_iters <= 0) throw ValidationError("train: total iterations must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("train: lambda must be finite and >= 0");
  for (double r : {lr.audio, lr.fusion, lr.vision, lr.consistency})
    if (!(r > 0.0)) throw ValidationError("train: learning rates must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && eps > 0))
    throw ValidationError("train: invalid Adam hyper-parameters");
  if (log_interval < 1) throw ValidationError("train: log interval must be positive");
  if (checkpoint_interval < 0) throw ValidationError("train: checkpoint interval must be >= 0");
  spectrogram.validate();
  network.validate();
  if (spectrogram.grid_side != network.grid_side)
    throw ValidationError("train: spectrogram grid side and network grid side differ");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"total_iters", total_iters},
          {"lambda", lambda},
          {"lr", {{"audio", lr.audio}, {"fusion", lr.fusion}, {"vision", lr.vision}, {"consistency", lr.consistency}}},
          {"beta1", beta1},
          {"beta2", beta2},
          {"eps", eps},
          {"seed", seed},
          {"log_interval", log_interval},
          {"checkpoint_interval", checkpoint_interval},
          {"use_inter", terms.inter},
          {"use_intra", terms.intra},
          {"spectrogram", spectrogram.to_json()},
          {"network", network.to_json()}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.total_iters = j.value("total_iters", c.total_iters);
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("lr")) {
      const auto& l = j.at("lr");
      c.lr.audio = l.value("audio", c.lr.audio);
      c.lr.fusion = l.value("fusion", c.lr.fusion);
      c.lr.vision = l.value("vision", c.lr.vision);
      c.lr.consistency = l.value("consistency", c.lr.consistency);
    }
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.seed = j.value("seed", c.seed);
    c.log_interval = j.value("log_interval", c.log_interval);
    c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
    c.terms.inter = j.value("use_inter", c.terms.inter);
    c.terms.intra = j.value("use_intra", c.terms.intra);
    if (j.contains("spectrogram")) c.spectrogram = SpectrogramConfig::from_json(j.at("spectrogram"));
    if (j.contains("network")) c.network = NetworkConfig::from_json(j.at("network"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainBatch make_batch(const synth::Dataset& ds, const TrainConfig& cfg, const synth::SegmentGeometry& g, long iter) {
  std::mt19937_64 rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter)}));
  TrainBatch b;
  b.iter = iter;
  const std::set<int> train(ds.manifest.train_categories.begin(), ds.manifest.train_categories.end());
  std::vector<PreparedPair> pairs;
  for (int i = 0; i < cfg.batch_size; ++i) {
    const auto draw = synth::sample_training_pair(ds, g, rng);
    for (const auto* w : {&draw.p, &draw.q, &draw.template_p, &draw.template_q}) {
      const int cat = ds.manifest.clips[w->clip].category_id;
      if (!train.count(cat))
        throw ValidationError("split audit: training batch drew category " + std::to_string(cat) +
                              " which is not in the training split");
    }
    b.draws.push_back(draw);
    pairs.push_back(prepare_pair(ds, draw, cfg.spectrogram, g));
  }
  std::vector<const SeparationQuery*> qs;
  std::vector<const PairTruth*> ts;
  for (const auto& p : pairs) {
    qs.push_back(&p.query);
    ts.push_back(&p.truth);
  }
  b.query = stack_queries(qs);
  b.truth = stack_truths(ts);
  return b;
}

losses::LossBreakdown compute_loss(SeparationModel& model, const TrainBatch& batch, const TrainConfig& cfg,
                                   ad::Tensor* total) {
  const ad::Tensor mixture = ad::Tensor::constant(batch.query.mixture);
  const SeparationOutput out = model.separate(mixture, batch.query.motion_p, batch.query.motion_q, Phase::kTrain);
  // Both masks in one cross-entropy: the mean over 2N grids.
  Array gt = batch.truth.gt_mask_p;
  {
    Shape s = gt.shape();
    s[0] *= 2;
    Array both(s);
    std::copy(batch.truth.gt_mask_p.data().begin(), batch.truth.gt_mask_p.data().end(), both.data().begin());
    std::copy(batch.truth.gt_mask_q.data().begin(), batch.truth.gt_mask_q.data().end(),
              both.data().begin() + batch.truth.gt_mask_p.size());
    gt = std::move(both);
  }
  const ad::Tensor l_mask = masks::bce_mask_loss(ad::concat({out.mask_p, out.mask_q}, 0), gt);
  const double gamma = losses::gamma_schedule(batch.iter);

  if (!cfg.consistency_active()) {
    *total = l_mask;
    return losses::total_loss(l_mask.item(), 0.0, 0.0, cfg.lambda, gamma);
  }
  const ConsistencyLosses cs =
      assisted_consistency(model, out, mixture, batch.query, batch.truth, gamma, cfg.terms, Phase::kTrain);
  ad::Tensor l_cs;
  if (cs.inter.defined() && cs.intra.defined()) l_cs = ad::add(cs.inter, cs.intra);
  else l_cs = cs.inter.defined() ? cs.inter : cs.intra;
  *total = ad::add(l_mask, ad::scale(l_cs, cfg.lambda));
  const double inter = cs.inter.defined() ? cs.inter.item() : 0.0;
  const double intra = cs.intra.defined() ? cs.intra.item() : 0.0;
  return losses::total_loss(l_mask.item(), inter, intra, cfg.lambda, gamma);
}

std::map<std::string, std::vector<ad::ParameterRef>> trainable_groups(SeparationModel& model, const TrainConfig& cfg) {
  std::map<std::string, std::vector<ad::ParameterRef>> out;
  for (auto& p : model.parameters()) {
    if (p.group == "consistency") {
      if (!cfg.consistency_active()) continue;
      // The visual embedding head only feeds the inter-modal loss.
      if (starts_with(p.name, "visual_head.") && !cfg.terms.inter) continue;
    }
    out[p.group].push_back(p);
  }
  return out;
}

Trainer::Trainer(SeparationModel& model, TrainConfig cfg) : model_(model), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!(model_.config() == cfg_.network)) throw ValidationError("trainer: model and config network settings differ");
  auto groups = trainable_groups(model_, cfg_);
  for (const char* name : kGroups) {
    auto it = groups.find(name);
    if (it == groups.end()) continue;
    Group g;
    g.name = name;
    std::vector<ad::Tensor> tensors;
    for (auto& p : it->second) {
      g.names.push_back(p.name);
      tensors.push_back(p.tensor);
    }
    g.adam = std::make_unique<ad::Adam>(tensors, cfg_.lr.for_group(name), cfg_.beta1, cfg_.beta2, cfg_.eps);
    groups_.push_back(std::move(g));
  }
}

losses::LossBreakdown Trainer::step(const TrainBatch& batch) {
  if (batch.iter != iter_)
    throw ValidationError("trainer: batch for iteration " + std::to_string(batch.iter) + " given at iteration " +
                          std::to_string(iter_));
  for (auto& g : groups_) g.adam->zero_grad();
  ad::Tensor total;
  const auto b = compute_loss(model_, batch, cfg_, &total);
  if (!std::isfinite(b.l_total) || !std::isfinite(b.l_mask) || !std::isfinite(b.l_cs)) {
    std::ostringstream msg;
    msg << "non-finite loss at iteration " << iter_ << " (l_mask=" << b.l_mask << ", l_inter=" << b.l_inter
        << ", l_intra=" << b.l_intra << ")";
    throw NumericalError(msg.str());
  }
  ad::backward(total);
  for (auto& g : groups_) g.adam->step();
  ++iter_;
  return b;
}

ad::Checkpoint Trainer::checkpoint() const {
  ad::Checkpoint ckpt = model_checkpoint(model_);
  nlohmann::json steps = nlohmann::json::object();
  for (const auto& g : groups_) {
    const auto& st = g.adam->state();
    steps[g.name] = st.step;
    for (std::size_t i = 0; i < st.first_moment.size(); ++i) {
      ckpt.tensors.emplace_back("adam.m." + g.names[i], st.first_moment[i]);
      ckpt.tensors.emplace_back("adam.v." + g.names[i], st.second_moment[i]);
    }
  }
  ckpt.meta["iteration"] = iter_;
  ckpt.meta["adam_steps"] = steps;
  ckpt.meta["spectrogram"] = cfg_.spectrogram.to_json();
  ckpt.meta["train"] = cfg_.to_json();
  return ckpt;
}

void Trainer::resume(const ad::Checkpoint& ckpt) {
  if (!ckpt.meta.contains("iteration") || !ckpt.meta.contains("adam_steps"))
    throw ValidationError("resume: checkpoint carries no optimizer state");
  const auto& steps = ckpt.meta.at("adam_steps");
  for (auto& g : groups_) {
    auto& st = g.adam->state();
    st.step = steps.value(g.name, 0L);
    st.first_moment.clear();
    st.second_moment.clear();
    if (st.step == 0) continue;
    for (const auto& name : g.names) {
      st.first_moment.push_back(ckpt.at("adam.m." + name));
      st.second_moment.push_back(ckpt.at("adam.v." + name));
    }
  }
  iter_ = ckpt.meta.at("iteration").get<long>();
}

std::string log_header() { return "iter,l_mask,l_inter,l_intra,l_cs,l_total,gamma\n"; }

std::string log_row(long iter, const losses::LossBreakdown& b) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", iter, b.l_mask, b.l_inter, b.l_intra,
                b.l_cs, b.l_total, b.gamma);
  return buf;
}

TrainOutputs train(const TrainConfig& cfg, const synth::Dataset& ds, const std::filesystem::path& out_dir,
                   const std::filesystem::path& resume_from) {
  cfg.validate();
  const synth::SegmentGeometry g = checked_geometry(cfg.spectrogram, cfg.network, ds.manifest);
  std::filesystem::create_directories(out_dir);
  TrainOutputs res;
  res.checkpoint = out_dir / "model.ckpt";
  res.log = out_dir / "train_log.csv";

  std::unique_ptr<SeparationModel> model;
  std::string log = log_header();
  ad::Checkpoint resumed;
  if (!resume_from.empty()) {
    resumed = ad::read_checkpoint(resume_from);
    TrainConfig stored = TrainConfig::from_json(resumed.meta.at("train"));
    stored.total_iters = cfg.total_iters;
    stored.checkpoint_interval = cfg.checkpoint_interval;
    if (stored.to_json() != cfg.to_json())
      throw ValidationError("resume: checkpoint was trained with a different configuration");
    model = model_from_checkpoint(resumed);
  } else {
    model = std::make_unique<SeparationModel>(cfg.network);
  }
  Trainer trainer(*model, cfg);
  if (!resume_from.empty()) {
    trainer.resume(resumed);
    // Keep the rows logged before the checkpoint.
    if (std::filesystem::exists(res.log)) {
      std::istringstream in(io::read_text(res.log));
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line))
        if (!line.empty() && std::stol(line.substr(0, line.find(','))) < trainer.iteration()) log += line + "\n";
    }
  }

  while (trainer.iteration() < cfg.total_iters) {
    const long iter = trainer.iteration();
    const TrainBatch batch = make_batch(ds, cfg, g, iter);
    losses::LossBreakdown b;
    try {
      b = trainer.step(batch);
    } catch (const NumericalError&) {
      nlohmann::json dump = {{"iteration", iter}, {"draws", nlohmann::json::array()}};
      for (const auto& d : batch.draws) dump["draws"].push_back(draw_json(ds, d));
      dump["mixture"] = array_stats(batch.query.mixture);
      dump["motion_p"] = array_stats(batch.query.motion_p);
      dump["motion_q"] = array_stats(batch.query.motion_q);
      io::write_json(out_dir / ("nonfinite_iter" + std::to_string(iter) + ".json"), dump);
      io::write_text(res.log, log);
      throw;
    }
    if ((iter + 1) % cfg.log_interval == 0) log += log_row(iter, b);
    if (cfg.checkpoint_interval > 0 && trainer.iteration() % cfg.checkpoint_interval == 0 &&
        trainer.iteration() < cfg.total_iters) {
      ad::write_checkpoint(res.checkpoint, trainer.checkpoint());
      io::write_text(res.log, log);
    }
  }
  ad::write_checkpoint(res.checkpoint, trainer.checkpoint());
  io::write_text(res.log, log);
  res.iterations = trainer.iteration();
  return res;
}

}  // namespace consep::train
