// tools/cli.cpp

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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "consep/ad/checkpoint.hpp"
#include "consep/error.hpp"
#include "consep/evaluation.hpp"
#include "consep/io.hpp"
#include "consep/networks.hpp"
#include "consep/online_matching.hpp"
#include "consep/pipeline.hpp"
#include "consep/synthdata.hpp"
#include "consep/trainer.hpp"
#include "json.hpp"

namespace consep::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json default_config() {
  synth::DatasetConfig d;
  train::TrainConfig t;
  eval::EvalSettings e;
  return {{"seed", 1},
          {"output", ""},
          {"jobs", 1},
          {"data",
           {{"manifest", ""},
            {"train_categories", d.train_categories},
            {"test_categories", d.test_categories},
            {"videos_per_category", d.videos_per_category},
            {"clip_seconds", d.clip_seconds},
            {"motion_noise", d.motion_noise}}},
          {"spectrogram", t.spectrogram.to_json()},
          {"network", t.network.to_json()},
          {"train",
           {{"batch_size", t.batch_size},
            {"total_iters", t.total_iters},
            {"lambda", t.lambda},
            {"lr", t.to_json().at("lr")},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"eps", t.eps},
            {"log_interval", t.log_interval},
            {"checkpoint_interval", t.checkpoint_interval},
            {"use_inter", true},
            {"use_intra", true},
            {"resume", ""}}},
          {"eval",
           {{"model", ""},
            {"pairs", 300},
            {"test_seed", 7},
            {"filter_len", e.filter_len},
            {"permute", e.permute},
            {"t_values", json::array({0, 1, 2, 5, 10})}}},
          {"om", om::OMConfig{}.to_json()},
          {"report", {{"inputs", json::array()}}}};
}

// A flag whose value, when given, overrides the JSON value at `pointer`.
struct Override {
  CLI::Option* option = nullptr;
  std::string pointer;
  std::string text;                 // valued options
  bool is_flag = false;
  json flag_value;                  // written when a flag is present
};

class Command {
 public:
  Command(CLI::App& app, const char* name, const char* help) : sub_(app.add_subcommand(name, help)) {
    sub_->add_option("--config", config_path_, "JSON config file; flags override its values");
    value("--seed", "/seed", "base random seed (dataset, sampling, initialisation)");
    value("--out", "/output", "output directory");
  }
  CLI::App* app() { return sub_; }

  void value(const char* flag, const char* pointer, const char* help) {
    auto o = std::make_unique<Override>();
    o->pointer = pointer;
    o->option = sub_->add_option(flag, o->text, help);
    overrides_.push_back(std::move(o));
  }
  void flag(const char* flag, const char* pointer, json v, const char* help) {
    auto o = std::make_unique<Override>();
    o->pointer = pointer;
    o->is_flag = true;
    o->flag_value = std::move(v);
    o->option = sub_->add_flag(flag)->description(help);
    overrides_.push_back(std::move(o));
  }

  /// (resolved, explicit): defaults merged with the config file and flags,
  /// and just the config file plus flags.
  std::pair<json, json> resolve() const {
    json given = json::object();
    if (!config_path_.empty()) {
      given = io::read_json(config_path_);
      if (!given.is_object()) throw ValidationError("config " + config_path_ + " is not a JSON object");
      given.erase("command");
    }
    const json defaults = default_config();
    json resolved = defaults;
    resolved.merge_patch(given);
    for (const auto& o : overrides_) {
      if (o->option->count() == 0) continue;
      const json::json_pointer ptr(o->pointer);
      json v = o->is_flag ? o->flag_value : parse_like(defaults.at(ptr), o->text, o->option->get_name());
      resolved[ptr] = v;
      given[ptr] = v;
    }
    // The network input side is the spectrogram grid side; one knob sets both.
    resolved["network"]["grid_side"] = resolved["spectrogram"]["grid_side"];
    return {resolved, given};
  }

 private:
  static json parse_like(const json& like, const std::string& text, const std::string& flag) {
    try {
      if (like.is_array()) {
        json arr = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) arr.push_back(std::stoll(item));
        return arr;
      }
      std::size_t used = 0;
      json v;
      if (like.is_number_integer() || like.is_number_unsigned()) v = std::stoll(text, &used);
      else if (like.is_number_float()) v = std::stod(text, &used);
      else if (like.is_boolean()) {
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        throw std::invalid_argument(text);
      } else return text;
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::logic_error&) {
      throw ValidationError(flag + ": cannot parse '" + text + "'");
    }
  }

  CLI::App* sub_;
  std::string config_path_;
  std::vector<std::unique_ptr<Override>> overrides_;
};

fs::path require_path(const json& cfg, const char* pointer, const char* what) {
  const std::string p = cfg.at(json::json_pointer(pointer)).get<std::string>();
  if (p.empty()) throw ValidationError(std::string("missing ") + what);
  return p;
}

fs::path prepare_output(const json& cfg, const std::string& command) {
  const fs::path out = require_path(cfg, "/output", "--out directory");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ValidationError("cannot create output directory " + out.string());
  json resolved = cfg;
  resolved["command"] = command;
  try {
    io::write_json(out / "resolved_config.json", resolved);
  } catch (const std::exception& e) {
    throw ValidationError("output directory " + out.string() + " is not writable: " + e.what());
  }
  return out;
}

int jobs_of(const json& cfg) {
  const int jobs = cfg.at("jobs").get<int>();
  if (jobs < 1) throw ValidationError("--jobs must be at least 1");
  return jobs;
}

train::TrainConfig train_config(const json& cfg) {
  json t = cfg.at("train");
  t.erase("resume");
  t["seed"] = cfg.at("seed");
  t["spectrogram"] = cfg.at("spectrogram");
  json net = cfg.at("network");
  net["init_seed"] = cfg.at("seed");
  t["network"] = net;
  return train::TrainConfig::from_json(t);
}

synth::Dataset load_data(const json& cfg) {
  const fs::path manifest = require_path(cfg, "/data/manifest", "--data manifest path");
  if (!fs::exists(manifest)) throw ValidationError("dataset manifest " + manifest.string() + " does not exist");
  return synth::load_dataset(manifest);
}

int cmd_gen_data(const json& cfg, std::ostream& out) {
  const fs::path dir = prepare_output(cfg, "gen-data");
  const SpectrogramConfig spec = SpectrogramConfig::from_json(cfg.at("spectrogram"));
  const NetworkConfig net = NetworkConfig::from_json(cfg.at("network"));
  synth::DatasetConfig d;
  const json& data = cfg.at("data");
  d.train_categories = data.at("train_categories").get<int>();
  d.test_categories = data.at("test_categories").get<int>();
  d.videos_per_category = data.at("videos_per_category").get<int>();
  d.clip_seconds = data.at("clip_seconds").get<double>();
  d.motion_noise = data.at("motion_noise").get<double>();
  d.sample_rate_hz = spec.sample_rate_hz;
  d.motion_fps = spec.motion_fps(net.motion_frames);
  d.seed = cfg.at("seed").get<std::uint64_t>();
  const auto m = synth::generate_dataset(d, dir, jobs_of(cfg));
  out << "wrote " << m.clips.size() << " clips (" << m.train_categories.size() << " train / "
      << m.test_categories.size() << " test categories) to " << (dir / "manifest.json").string() << "\n";
  return kOk;
}

int cmd_train(const json& cfg, std::ostream& out) {
  const fs::path dir = prepare_output(cfg, "train");
  const train::TrainConfig tc = train_config(cfg);
  const synth::Dataset ds = load_data(cfg);
  const std::string resume = cfg.at("/train/resume"_json_pointer).get<std::string>();
  const auto res = train::train(tc, ds, dir, resume);
  out << "trained " << res.iterations << " iterations; checkpoint " << res.checkpoint.string() << ", log "
      << res.log.string() << "\n";
  return kOk;
}

// Loaded model plus the geometry it was trained with; rejects explicit
// config values that contradict the checkpoint.
struct ModelContext {
  std::unique_ptr<SeparationModel> model;
  SpectrogramConfig spec;
};

ModelContext load_model_context(json& cfg, const json& given) {
  const fs::path path = require_path(cfg, "/eval/model", "--model checkpoint");
  if (!fs::exists(path)) throw ValidationError("checkpoint " + path.string() + " does not exist");
  const ad::Checkpoint ckpt = ad::read_checkpoint(path);
  ModelContext ctx;
  ctx.model = model_from_checkpoint(ckpt);
  ctx.spec = ckpt.meta.contains("spectrogram") ? SpectrogramConfig::from_json(ckpt.meta.at("spectrogram"))
                                               : SpectrogramConfig{};
  if (given.contains("spectrogram") &&
      !(SpectrogramConfig::from_json(cfg.at("spectrogram")) == ctx.spec))
    throw ValidationError("checkpoint/config mismatch: spectrogram settings differ from those the model was trained with");
  if (given.contains("network")) {
    json net = cfg.at("network");
    net["init_seed"] = ctx.model->config().init_seed;
    if (!(NetworkConfig::from_json(net) == ctx.model->config()))
      throw ValidationError("checkpoint/config mismatch: network settings differ from the checkpoint");
  }
  cfg["spectrogram"] = ctx.spec.to_json();
  cfg["network"] = ctx.model->config().to_json();
  return ctx;
}

struct EvalRun {
  ModelContext ctx;
  synth::Dataset ds;
  synth::SegmentGeometry geometry;
  std::vector<synth::TestPair> pairs;
  eval::EvalSettings settings;
  fs::path dir;
};

EvalRun start_eval(json& cfg, const json& given, const std::string& command) {
  EvalRun r;
  r.ctx = load_model_context(cfg, given);
  r.ds = load_data(cfg);
  r.dir = prepare_output(cfg, command);
  r.geometry = checked_geometry(r.ctx.spec, r.ctx.model->config(), r.ds.manifest);
  const json& e = cfg.at("eval");
  r.pairs = synth::build_test_set(r.ds, e.at("pairs").get<int>(), e.at("test_seed").get<std::uint64_t>(), r.geometry);
  io::write_json(r.dir / "test_pairs.json", synth::test_set_to_json(r.pairs));
  r.settings.filter_len = e.at("filter_len").get<int>();
  r.settings.permute = e.at("permute").get<bool>();
  r.settings.jobs = jobs_of(cfg);
  r.settings.om = om::OMConfig::from_json(cfg.at("om"));
  return r;
}

void write_summary(const fs::path& path, const om::SweepRow& row, std::size_t pairs, std::ostream& out) {
  io::write_json(path, {{"pairs", pairs},
                        {"T", row.T},
                        {"mean_SDR", row.mean_sdr},
                        {"mean_SIR", row.mean_sir},
                        {"mean_SAR", row.mean_sar}});
  char buf[200];
  std::snprintf(buf, sizeof(buf), "T=%d over %zu pairs: SDR %.3f dB, SIR %.3f dB, SAR %.3f dB\n", row.T, pairs,
                row.mean_sdr, row.mean_sir, row.mean_sar);
  out << buf;
}

int cmd_eval(json cfg, const json& given, std::ostream& out) {
  EvalRun r = start_eval(cfg, given, "eval");
  r.settings.t_values = {0};
  const auto records = eval::evaluate_pairs(*r.ctx.model, r.ds, r.pairs, r.ctx.spec, r.geometry, r.settings);
  io::write_text(r.dir / "metrics.csv", eval::metrics_csv(records, 0));
  write_summary(r.dir / "summary.json", eval::sweep_row(records, 0, 0), records.size(), out);
  return kOk;
}

int cmd_online_match(json cfg, const json& given, std::ostream& out) {
  EvalRun r = start_eval(cfg, given, "online-match");
  const int T = r.settings.om.iterations;
  r.settings.t_values = T > 0 ? std::vector<int>{0, T} : std::vector<int>{0};
  const auto records = eval::evaluate_pairs(*r.ctx.model, r.ds, r.pairs, r.ctx.spec, r.geometry, r.settings);
  const std::size_t after = r.settings.t_values.size() - 1;
  io::write_text(r.dir / "metrics.csv", eval::metrics_csv(records, after));
  std::string rows = om::outcome_csv_header();
  std::size_t warnings = 0;
  for (const auto& rec : records) {
    om::PairOutcome o{rec.pair_id, rec.l_cs, rec.warning, rec.metrics.front(), rec.metrics.back()};
    rows += om::outcome_csv_row(o, T);
    warnings += rec.warning;
  }
  io::write_text(r.dir / "om_pairs.csv", rows);
  if (warnings) out << "warning: " << warnings << " pair(s) hit a non-finite adaptation loss and were left unadapted\n";
  write_summary(r.dir / "summary.json", eval::sweep_row(records, after, T), records.size(), out);
  return kOk;
}

int cmd_sweep(json cfg, const json& given, std::ostream& out) {
  EvalRun r = start_eval(cfg, given, "sweep");
  std::vector<int> ts = cfg.at("/eval/t_values"_json_pointer).get<std::vector<int>>();
  if (ts.empty()) throw ValidationError("sweep: --om-iters needs at least one value");
  if (std::find(ts.begin(), ts.end(), 0) == ts.end())
    throw ValidationError("sweep: --om-iters must include 0 (the unadapted baseline)");
  r.settings.t_values = ts;
  const auto records = eval::evaluate_pairs(*r.ctx.model, r.ds, r.pairs, r.ctx.spec, r.geometry, r.settings);
  std::string csv = om::sweep_csv_header();
  json plot = {{"x_label", "online matching iterations"}, {"x", ts}, {"series", json::object()}};
  std::vector<double> sdr, sir, sar;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const om::SweepRow row = eval::sweep_row(records, i, ts[i]);
    csv += om::sweep_csv_row(row);
    sdr.push_back(row.mean_sdr);
    sir.push_back(row.mean_sir);
    sar.push_back(row.mean_sar);
    io::write_text(r.dir / ("metrics_T" + std::to_string(ts[i]) + ".csv"), eval::metrics_csv(records, i));
    char buf[160];
    std::snprintf(buf, sizeof(buf), "T=%d: SDR %.3f dB\n", ts[i], row.mean_sdr);
    out << buf;
  }
  plot["series"] = {{"mean_SDR", sdr}, {"mean_SIR", sir}, {"mean_SAR", sar}};
  io::write_text(r.dir / "sweep.csv", csv);
  io::write_json(r.dir / "plot_data.json", plot);
  return kOk;
}

// Rows of a CSV file as header-keyed maps.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    return f;
  };
  if (!std::getline(in, line)) return rows;
  header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_report(const json& cfg, std::ostream& out) {
  const fs::path dir = prepare_output(cfg, "report");
  const auto inputs = cfg.at("/report/inputs"_json_pointer).get<std::vector<std::string>>();
  if (inputs.empty()) throw ValidationError("report: give at least one run directory with --inputs");
  std::string csv = "run,metric,value\n";
  json plot = {{"training", json::array()}, {"sweeps", json::array()}, {"evaluations", json::array()}};
  std::set<std::string> labels;
  for (const auto& in : inputs) {
    const fs::path run(in);
    if (!fs::is_directory(run)) throw ValidationError("report: " + in + " is not a directory");
    // Runs are labelled by directory name so the report does not depend on where they live.
    const std::string label = fs::weakly_canonical(run).filename().string();
    if (!labels.insert(label).second) throw ValidationError("report: two run directories are named " + label);
    bool found = false;
    if (fs::exists(run / "train_log.csv")) {
      found = true;
      const auto rows = read_csv(run / "train_log.csv");
      json series = {{"run", label}, {"x", json::array()}, {"y", json::object()}};
      for (const char* key : {"l_mask", "l_inter", "l_intra", "l_cs", "l_total", "gamma"}) series["y"][key] = json::array();
      for (const auto& r : rows) {
        series["x"].push_back(std::stol(r.at("iter")));
        for (auto& [key, arr] : series["y"].items()) arr.push_back(std::stod(r.at(key)));
      }
      if (!rows.empty()) {
        csv += label + ",final_l_mask," + rows.back().at("l_mask") + "\n";
        csv += label + ",final_l_total," + rows.back().at("l_total") + "\n";
      }
      plot["training"].push_back(series);
    }
    if (fs::exists(run / "sweep.csv")) {
      found = true;
      json series = {{"run", label}, {"x", json::array()}, {"y", {{"mean_SDR", json::array()}}}};
      for (const auto& r : read_csv(run / "sweep.csv")) {
        series["x"].push_back(std::stoi(r.at("T")));
        series["y"]["mean_SDR"].push_back(std::stod(r.at("mean_SDR")));
        csv += label + ",mean_SDR_T" + r.at("T") + "," + r.at("mean_SDR") + "\n";
      }
      plot["sweeps"].push_back(series);
    }
    if (fs::exists(run / "summary.json")) {
      found = true;
      const json s = io::read_json(run / "summary.json");
      for (const char* key : {"mean_SDR", "mean_SIR", "mean_SAR"}) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g", s.at(key).get<double>());
        csv += label + "," + key + "," + buf + "\n";
      }
      plot["evaluations"].push_back({{"run", label}, {"summary", s}});
    }
    if (!found) throw ValidationError("report: " + in + " holds no train_log.csv, sweep.csv or summary.json");
  }
  io::write_text(dir / "report.csv", csv);
  io::write_json(dir / "plot_data.json", plot);
  out << "wrote " << (dir / "report.csv").string() << " and plot_data.json\n";
  return kOk;
}

void add_model_eval_options(Command& c) {
  c.value("--data", "/data/manifest", "dataset manifest.json");
  c.value("--model", "/eval/model", "model checkpoint");
  c.value("--pairs", "/eval/pairs", "number of test pairs (default 300)");
  c.value("--test-seed", "/eval/test_seed", "seed of the test pair list");
  c.value("--filter-len", "/eval/filter_len", "BSS-eval distortion filter length (default 512)");
  c.flag("--permute", "/eval/permute", true, "score the better of the two estimate/source assignments");
  c.value("--jobs", "/jobs", "pairs processed in parallel, each on its own model copy");
}

void add_om_options(Command& c, bool list) {
  if (list) c.value("--om-iters", "/eval/t_values", "comma-separated adaptation iteration counts, including 0");
  else c.value("--om-iters", "/om/iterations", "adaptation iterations T (default 5)");
  c.value("--beta", "/om/beta", "adaptation step size (default 1e-4)");
  c.value("--om-lambda", "/om/lambda", "consistency weight during adaptation (default 1.0)");
  c.value("--optimizer", "/om/optimizer", "sgd (default) or adam");
  c.flag("--no-freeze-bn", "/om/freeze_bn", false, "let batch-norm scale/shift adapt (statistics stay fixed)");
  c.flag("--no-inter", "/om/use_inter", false, "drop the inter-modal term from the adaptation loss");
  c.flag("--no-intra", "/om/use_intra", false, "drop the intra-modal term from the adaptation loss");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"consep: visual-sound separation with consistency losses and online matching", "consep"};
  app.require_subcommand(1);

  Command gen(app, "gen-data", "render the synthetic instrument dataset");
  gen.value("--train-cats", "/data/train_categories", "training categories (default 8)");
  gen.value("--test-cats", "/data/test_categories", "test categories (default 3)");
  gen.value("--clips-per-cat", "/data/videos_per_category", "videos per category (default 12, at least 2)");
  gen.value("--clip-seconds", "/data/clip_seconds", "clip length in seconds (default 6)");
  gen.value("--motion-noise", "/data/motion_noise", "std of motion-feature noise (default 0.05)");
  gen.value("--sample-rate", "/spectrogram/sample_rate_hz", "sample rate in Hz (default 8000)");
  gen.value("--window", "/spectrogram/window", "STFT window; sets the motion frame rate");
  gen.value("--hop", "/spectrogram/hop", "STFT hop; sets the motion frame rate");
  gen.value("--grid-side", "/spectrogram/grid_side", "frames per segment; sets the motion frame rate");
  gen.value("--jobs", "/jobs", "clips rendered in parallel");

  Command tr(app, "train", "mix-and-separate training");
  tr.value("--data", "/data/manifest", "dataset manifest.json");
  tr.value("--iters", "/train/total_iters", "optimizer steps (default 2000)");
  tr.value("--batch", "/train/batch_size", "pairs per batch (default 8)");
  tr.value("--lambda", "/train/lambda", "consistency loss weight (default 0.01)");
  tr.flag("--no-inter", "/train/use_inter", false, "drop the inter-modal consistency loss");
  tr.flag("--no-intra", "/train/use_intra", false, "drop the intra-modal consistency loss");
  tr.value("--log-interval", "/train/log_interval", "iterations per log row (default 10)");
  tr.value("--checkpoint-interval", "/train/checkpoint_interval", "iterations between checkpoints (0: end only)");
  tr.value("--resume", "/train/resume", "continue from this checkpoint");
  tr.value("--lr-audio", "/train/lr/audio", "audio U-Net learning rate (default 1e-3)");
  tr.value("--lr-fusion", "/train/lr/fusion", "fusion head learning rate (default 1e-3)");
  tr.value("--lr-vision", "/train/lr/vision", "vision encoder learning rate (default 1e-4)");
  tr.value("--lr-consistency", "/train/lr/consistency", "consistency network learning rate (default 1e-4)");
  tr.value("--grid-side", "/spectrogram/grid_side", "network input side, a multiple of 32 (default 64)");
  tr.value("--window", "/spectrogram/window", "STFT window (default 256)");
  tr.value("--hop", "/spectrogram/hop", "STFT hop (default 128)");
  tr.value("--sample-rate", "/spectrogram/sample_rate_hz", "sample rate in Hz (default 8000)");
  tr.value("--consistency-width", "/network/consistency_width", "residual block width (default 16)");
  tr.value("--consistency-blocks", "/network/consistency_blocks", "residual blocks (default 10)");
  tr.value("--embed-dim", "/network/embed_dim", "embedding dimension (default 256)");
  tr.value("--audio-dim", "/network/audio_dim", "audio feature channels D_a (default 64)");

  Command ev(app, "eval", "separate the test pairs and score them");
  add_model_eval_options(ev);

  Command om_cmd(app, "online-match", "test-time adaptation of every test pair, then scoring");
  add_model_eval_options(om_cmd);
  add_om_options(om_cmd, false);

  Command sw(app, "sweep", "mean metrics as a function of adaptation iterations");
  add_model_eval_options(sw);
  add_om_options(sw, true);

  Command rep(app, "report", "collect logs and metrics of finished runs into CSV and plot data");
  std::vector<std::string> inputs;
  rep.app()->add_option("--inputs", inputs, "run directories");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out, msg;
    const int code = app.exit(e, help_out, msg);
    if (code == 0) {
      out << help_out.str() << msg.str();
      return kOk;
    }
    err << msg.str() << help_out.str();
    return kValidation;
  }

  try {
    if (gen.app()->parsed()) return cmd_gen_data(gen.resolve().first, out);
    if (tr.app()->parsed()) return cmd_train(tr.resolve().first, out);
    if (ev.app()->parsed()) {
      auto [cfg, given] = ev.resolve();
      return cmd_eval(cfg, given, out);
    }
    if (om_cmd.app()->parsed()) {
      auto [cfg, given] = om_cmd.resolve();
      return cmd_online_match(cfg, given, out);
    }
    if (sw.app()->parsed()) {
      auto [cfg, given] = sw.resolve();
      return cmd_sweep(cfg, given, out);
    }
    if (rep.app()->parsed()) {
      auto [cfg, given] = rep.resolve();
      if (!inputs.empty()) cfg["report"]["inputs"] = inputs;
      return cmd_report(cfg, out);
    }
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: configuration: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace consep::cli
