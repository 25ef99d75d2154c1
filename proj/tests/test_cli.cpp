// tests/test_cli.cpp

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

#include <algorithm>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "consep/io.hpp"
#include "consep/synthdata.hpp"
#include "support/oracles.hpp"

namespace consep {
namespace {

using cli::run_cli;

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    const Result g = run({"gen-data", "--out", data(), "--seed", "3", "--train-cats", "3", "--test-cats", "2",
                          "--clips-per-cat", "3", "--clip-seconds", "1", "--grid-side", "32"});
    ASSERT_EQ(g.code, 0) << g.err;
    const Result t = run(train_args(path("model"), {}));
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::string path(const std::string& name) { return (dir_->path() / name).string(); }
  static std::string data() { return path("data"); }
  static std::string manifest() { return path("data") + "/manifest.json"; }
  static std::string model() { return path("model") + "/model.ckpt"; }
  static std::vector<std::string> train_args(const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> a = {"train", "--data", manifest(), "--out", out, "--iters", "4", "--batch", "2",
                                  "--log-interval", "2", "--grid-side", "32", "--consistency-width", "4",
                                  "--consistency-blocks", "2", "--embed-dim", "16", "--audio-dim", "8"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }
  static std::vector<std::string> eval_args(const std::string& cmd, const std::string& out,
                                            std::vector<std::string> extra) {
    std::vector<std::string> a = {cmd, "--data", manifest(), "--model", model(), "--out", out, "--pairs", "3",
                                  "--filter-len", "16"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }

  static testing::TempDir* dir_;
};
testing::TempDir* CliTest::dir_ = nullptr;

TEST(Cli, HelpAndUsageErrors) {
  const Result h = run({"--help"});
  EXPECT_EQ(h.code, cli::kOk);
  for (const char* sub : {"gen-data", "train", "eval", "online-match", "sweep", "report"}) {
    EXPECT_NE(h.out.find(sub), std::string::npos) << sub;
    const Result s = run({sub, "--help"});
    EXPECT_EQ(s.code, cli::kOk) << sub;
    EXPECT_NE(s.out.find("--config"), std::string::npos) << sub;
  }
  EXPECT_EQ(run({}).code, cli::kValidation);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kValidation);
  EXPECT_EQ(run({"train", "--no-such-flag"}).code, cli::kValidation);
  EXPECT_EQ(run({"train", "--iters", "abc"}).code, cli::kValidation);
}

TEST(Cli, GenDataDefaultsAndDeterminism) {
  testing::TempDir d("cli_gen");
  const std::string a = (d / "a").string(), b = (d / "b").string();
  ASSERT_EQ(run({"gen-data", "--out", a, "--seed", "9"}).code, cli::kOk);
  const synth::DatasetManifest m = synth::read_manifest(d / "a" / "manifest.json");
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.train_categories.size(), 8u);
  EXPECT_EQ(m.test_categories.size(), 3u);
  EXPECT_EQ(m.clips.size(), 11u * 12u);
  EXPECT_TRUE(std::filesystem::exists(d / "a" / "resolved_config.json"));
  ASSERT_EQ(run({"gen-data", "--out", b, "--seed", "9"}).code, cli::kOk);
  EXPECT_EQ(testing::file_bytes(d / "a" / "manifest.json"), testing::file_bytes(d / "b" / "manifest.json"));
}

TEST(Cli, GenDataRejectsSingleVideoCategories) {
  testing::TempDir d("cli_gen1");
  const Result r = run({"gen-data", "--out", (d / "x").string(), "--clips-per-cat", "1"});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, TrainLogAndResolvedConfig) {
  const std::string log = io::read_text(dir_->path() / "model" / "train_log.csv");
  EXPECT_EQ(line_count(log), 1u + 4u / 2u);
  const auto cfg = io::read_json(dir_->path() / "model" / "resolved_config.json");
  EXPECT_EQ(cfg["command"], "train");
  EXPECT_EQ(cfg["train"]["total_iters"], 4);

  // Rerunning from the resolved config alone reproduces the outputs.
  const std::string again = path("model_again");
  ASSERT_EQ(run({"train", "--config", (dir_->path() / "model" / "resolved_config.json").string(), "--out", again}).code,
            cli::kOk);
  EXPECT_EQ(testing::file_bytes(dir_->path() / "model" / "train_log.csv"),
            testing::file_bytes(dir_->path() / "model_again" / "train_log.csv"));
  EXPECT_EQ(testing::file_bytes(model()), testing::file_bytes(dir_->path() / "model_again" / "model.ckpt"));
}

TEST_F(CliTest, AblationGridGivesDistinctLogs) {
  const std::vector<std::vector<std::string>> grid = {{}, {"--no-inter"}, {"--no-intra"}, {"--no-inter", "--no-intra"}};
  std::set<std::string> logs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string out = path("abl" + std::to_string(i));
    ASSERT_EQ(run(train_args(out, grid[i])).code, cli::kOk);
    logs.insert(io::read_text(std::filesystem::path(out) / "train_log.csv"));
  }
  EXPECT_EQ(logs.size(), 4u);
  // Both terms off: consistency loss absent, l_total == l_mask.
  std::istringstream in(io::read_text(dir_->path() / "abl3" / "train_log.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    EXPECT_EQ(cells[1], cells[5]);
  }
}

TEST_F(CliTest, EvalIsRepeatableAndZeroIterationMatchingEqualsEval) {
  ASSERT_EQ(run(eval_args("eval", path("ev1"), {})).code, cli::kOk);
  ASSERT_EQ(run(eval_args("eval", path("ev2"), {"--jobs", "2"})).code, cli::kOk);
  const std::string m1 = testing::file_bytes(dir_->path() / "ev1" / "metrics.csv");
  EXPECT_EQ(line_count(m1), 1u + 3u * 2u);
  EXPECT_EQ(m1, testing::file_bytes(dir_->path() / "ev2" / "metrics.csv"));
  ASSERT_EQ(run(eval_args("online-match", path("om0"), {"--om-iters", "0"})).code, cli::kOk);
  EXPECT_EQ(m1, testing::file_bytes(dir_->path() / "om0" / "metrics.csv"));
  ASSERT_EQ(run(eval_args("online-match", path("om2"), {"--om-iters", "2", "--beta", "1e-2"})).code, cli::kOk);
  EXPECT_NE(m1, testing::file_bytes(dir_->path() / "om2" / "metrics.csv"));
  EXPECT_EQ(line_count(testing::file_bytes(dir_->path() / "om2" / "om_pairs.csv")), 4u);
}

TEST_F(CliTest, SweepRowsAndReport) {
  ASSERT_EQ(run(eval_args("sweep", path("sw"), {"--om-iters", "0,1,2,5,10"})).code, cli::kOk);
  const std::string sweep = testing::file_bytes(dir_->path() / "sw" / "sweep.csv");
  EXPECT_EQ(line_count(sweep), 6u);
  ASSERT_EQ(run(eval_args("eval", path("ev_sw"), {})).code, cli::kOk);
  EXPECT_EQ(testing::file_bytes(dir_->path() / "sw" / "metrics_T0.csv"),
            testing::file_bytes(dir_->path() / "ev_sw" / "metrics.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_->path() / "sw" / "plot_data.json"));
  ASSERT_EQ(run(eval_args("sweep", path("sw2"), {"--om-iters", "0,1,2,5,10"})).code, cli::kOk);
  EXPECT_EQ(sweep, testing::file_bytes(dir_->path() / "sw2" / "sweep.csv"));
  EXPECT_EQ(run(eval_args("sweep", path("sw_bad"), {"--om-iters", "1,2"})).code, cli::kValidation);

  ASSERT_EQ(run({"report", "--inputs", path("sw"), path("model"), "--out", path("rep")}).code, cli::kOk);
  const std::string rep = testing::file_bytes(dir_->path() / "rep" / "report.csv");
  EXPECT_NE(rep.find("\nsw,mean_SDR_T10,"), std::string::npos);
  EXPECT_NE(rep.find("final_l_mask"), std::string::npos);
  EXPECT_EQ(run({"report", "--inputs", data(), "--out", path("rep_bad")}).code, cli::kValidation);
  EXPECT_EQ(run({"report", "--inputs", path("sw"), path("sw") + "/", "--out", path("rep_dup")}).code, cli::kValidation);
}

TEST_F(CliTest, ErrorsMapToExitCodes) {
  EXPECT_EQ(run({"train", "--data", path("missing/manifest.json"), "--out", path("x1")}).code, cli::kValidation);
  io::write_text(dir_->path() / "grid64.json", R"({"spectrogram": {"grid_side": 64}})");
  const Result mismatch = run(eval_args("eval", path("x2"), {"--config", path("grid64.json")}));
  EXPECT_EQ(mismatch.code, cli::kValidation);
  EXPECT_NE(mismatch.err.find("mismatch"), std::string::npos) << mismatch.err;
  EXPECT_EQ(run({"eval", "--data", manifest(), "--model", path("nope.ckpt"), "--out", path("x3")}).code,
            cli::kValidation);
  const Result blow = run(train_args(path("x4"), {"--lr-audio", "1e300", "--lr-fusion", "1e300"}));
  EXPECT_EQ(blow.code, cli::kNumerical) << blow.err;
}

}  // namespace
}  // namespace consep
