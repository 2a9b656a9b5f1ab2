// Copyright 2026 The gaitcov Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaitcov/experiment.hpp"

namespace gaitcov {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gaitcov_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every CSV under `dir` must parse and have at least one row.
void expect_csvs_parse(const fs::path& dir) {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    ++n;
    const auto t = CsvTable::read(e.path().string());
    EXPECT_GT(t.size(), 0u) << e.path();
    for (const auto& row : t.rows()) EXPECT_EQ(row.size(), t.header().size()) << e.path();
  }
  EXPECT_GT(n, 0);
}

// Small and fast coverage config.
json tiny_config(const std::string& kind, const fs::path& out) {
  return json{{"experiment", kind},
              {"n_joints", {2, 3}},
              {"seeds", {0, 1}},
              {"iterations", 2},
              {"recovery_iterations", 2},
              {"k", 3},
              {"cycle_steps", 128},
              {"noise", {{"cycles_per_gait", 6}}},
              {"output", out.string()},
              {"jobs", 2}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GAITCOV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, Defaults) {
  const auto c = parse_config(json{{"experiment", "cover-opt"}});
  EXPECT_EQ(c.k, 4);
  EXPECT_EQ(c.iterations, 30);
  EXPECT_EQ(c.seeds.size(), 30u);
  EXPECT_EQ(c.n_joints, (std::vector<int>{2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(c.gaits, 3);
  EXPECT_EQ(c.noise.cycles_per_gait, 30);
  EXPECT_EQ(c.noise.sigma, 0.02);
  const auto f = parse_config(json{{"experiment", "forward-gait"}});
  EXPECT_EQ(f.iterations, 15);
  EXPECT_EQ(f.gaits, 1);
  EXPECT_EQ(f.noise.cycles_per_gait, 20);
  EXPECT_EQ(f.seeds, (std::vector<std::uint64_t>{0}));
  EXPECT_EQ(parse_config(json{{"experiment", "words"}}).k, 5);
  EXPECT_EQ(parse_config(json{{"experiment", "vfield"}}).model["kind"], "two_slider");
}

TEST(Config, RoundTripThroughJson) {
  auto raw = tiny_config("recover", "x");
  raw["noise"]["sigma"] = 0.03;
  raw["gradient"] = {{"mode", "exact"}};
  raw["step"] = {{"reject_worse", false}};
  const auto c = parse_config(raw);
  const auto again = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
  EXPECT_EQ(again.mode, GradientMode::kExact);
  EXPECT_FALSE(again.policy.reject_worse);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config(json::array()), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"experiment", "dance"}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"colour", 1}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"noise", {{"sigma", 0.1}, {"mu", 0}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"step", {{"radius", 1}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"noise", {{"sigma", -0.1}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"noise", {{"cycles_per_gait", 2}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"k", -1}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"k", "four"}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"jobs", 0}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"n_joints", {0}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"model", {{"kind", "eel"}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"grid", {{"kind", "explicit"}, {"goals", json::array()}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"gradient", {{"mode", "magic"}}}}), InvalidConfiguration);
  EXPECT_THROW(parse_config(json{{"field", {{"r1", {1}}}}}), InvalidConfiguration);
}

TEST(Config, Overrides) {
  json raw = json::object();
  apply_assignment(raw, "noise.sigma=0.05");
  apply_assignment(raw, "seeds=[3,4]");
  apply_assignment(raw, "output=runs/a");
  apply_assignment(raw, "model.kind=two_slider");
  EXPECT_EQ(raw["noise"]["sigma"], 0.05);
  EXPECT_EQ(raw["seeds"], json::array({3, 4}));
  EXPECT_EQ(raw["output"], "runs/a");
  const auto c = parse_config(raw);
  EXPECT_EQ(c.noise.sigma, 0.05);
  EXPECT_EQ(c.model["kind"], "two_slider");
  EXPECT_THROW(apply_assignment(raw, "no_equals"), InvalidConfiguration);
  EXPECT_THROW(apply_assignment(raw, "a..b=1"), InvalidConfiguration);
}

TEST(Config, EnvironmentOverridesFileButNotSet) {
  json raw{{"k", 2}, {"noise", {{"sigma", 0.01}}}};
  ::setenv("GAITCOV_TEST_K", "3", 1);
  ::setenv("GAITCOV_TEST_NOISE__SIGMA", "0.04", 1);
  apply_environment(raw, "GAITCOV_TEST_");
  ::unsetenv("GAITCOV_TEST_K");
  ::unsetenv("GAITCOV_TEST_NOISE__SIGMA");
  EXPECT_EQ(raw["k"], 3);
  EXPECT_EQ(raw["noise"]["sigma"], 0.04);
  apply_assignment(raw, "k=1");
  EXPECT_EQ(parse_config(raw).k, 1);
}

TEST(Words, KOneGivesExactlyTheLetters) {
  const auto out = scratch_dir("words_k1");
  auto raw = json{{"experiment", "words"}, {"k", 1}, {"output", out.string()}};
  const auto r = cmd_words(parse_config(raw), raw.dump());
  const auto t = CsvTable::read((out / "reachable.csv").string());
  EXPECT_EQ(t.size(), 7u);  // identity plus three letters and their inverses
  const auto letters = CsvTable::read((out / "letters.csv").string());
  EXPECT_EQ(letters.size(), 6u);
  const auto x = t.column("x");
  const auto lx = letters.column("x");
  for (std::size_t i = 0; i < lx.size(); ++i) EXPECT_NE(std::find(x.begin(), x.end(), lx[i]), x.end());
  EXPECT_EQ(slurp(out / "config.json"), raw.dump());
  EXPECT_TRUE(fs::exists(out / "version.txt"));
  EXPECT_TRUE(fs::exists(out / "box.csv"));
}

TEST(Words, EmptyLibraryIsIdentityOnly) {
  const auto out = scratch_dir("words_empty");
  auto raw = json{{"experiment", "words"}, {"k", 3}, {"library", {{"letters", json::array()}}}, {"output", out.string()}};
  const auto r = cmd_words(parse_config(raw), raw.dump());
  EXPECT_EQ(r.points, 1u);
  const auto t = CsvTable::read((out / "reachable.csv").string());
  EXPECT_EQ(t.column("x"), std::vector<double>{0.0});
  EXPECT_EQ(t.rows()[0][4], "I");
  EXPECT_THROW(cmd_words(parse_config(json{{"experiment", "words"}, {"k", 6}, {"output", out.string()}}), ""),
               InvalidConfiguration);
}

TEST(Words, ThreeBranchDepthFive) {
  const auto out = scratch_dir("words_k5");
  const auto r = cmd_words(parse_config(json{{"experiment", "words"}, {"output", out.string()}}), "{}");
  EXPECT_EQ(r.points, 1u + 6 + 36 + 216 + 1296 + 7776);
  const auto box = CsvTable::read((out / "box.csv").string());
  EXPECT_EQ(box.column("min"), (std::vector<double>{-1.0, -1.0, -kPi}));
  EXPECT_EQ(box.column("max"), (std::vector<double>{1.0, 1.0, kPi}));
}

TEST(Vfield, TwoSliderGrid) {
  const auto out = scratch_dir("vfield");
  const auto r = cmd_vfield(parse_config(json{{"experiment", "vfield"}, {"output", out.string()}}), "{}");
  EXPECT_EQ(r.rows, 400u);
  ASSERT_EQ(r.overlay_displacements.size(), 3u);
  const auto overlay = CsvTable::read((out / "overlay.csv").string());
  EXPECT_EQ(overlay.size(), 3u * 121u);
  expect_csvs_parse(out);
}

TEST(Vfield, ThreeJointChainUnsupported) {
  const auto out = scratch_dir("vfield_bad");
  const auto c = parse_config(
      json{{"experiment", "vfield"}, {"model", {{"kind", "purcell_chain"}, {"n_joints", 3}}}, {"output", out.string()}});
  EXPECT_THROW(cmd_vfield(c, "{}"), Unsupported);
}

TEST(ToyDemo, SixLettersAndReversedGaitsUndoEachOther) {
  const auto out = scratch_dir("toy");
  const auto r = cmd_toy_demo(parse_config(json{{"experiment", "toy-demo"}, {"k", 2}, {"output", out.string()}}), "{}");
  EXPECT_EQ(r.two_slider.alphabet_size(), 6u);
  EXPECT_EQ(r.three_branch.alphabet_size(), 6u);
  const ConnectionModel tb{ThreeBranch{}}, ts{TwoSlider{}};
  for (int k = 1; k <= 3; ++k) {
    const Pose2 fwd = integrate_cycle(tb, three_branch_preset_gait(k, 1)).displacement;
    const Pose2 bwd = integrate_cycle(tb, three_branch_preset_gait(k, -1)).displacement;
    EXPECT_LT(eta(log(compose(fwd, bwd))), 1e-6);
  }
  for (double radius : {0.5, 1.0, 1.5}) {
    const Pose2 fwd = integrate_cycle(ts, two_slider_arc_gait(radius, 0.1, 1)).displacement;
    const Pose2 bwd = integrate_cycle(ts, two_slider_arc_gait(radius, 0.1, -1)).displacement;
    EXPECT_LT(eta(log(compose(fwd, bwd))), 1e-6);
  }
  const auto summary = CsvTable::read((out / "summary.csv").string());
  EXPECT_EQ(summary.column("letters"), (std::vector<double>{6.0, 6.0}));
  expect_csvs_parse(out);
}

TEST(CoverOpt, DeterministicAndParsable) {
  const auto a = scratch_dir("cover_a"), b = scratch_dir("cover_b");
  const auto ca = parse_config(tiny_config("cover-opt", a));
  const auto cb = parse_config(tiny_config("cover-opt", b));
  const auto sa = cmd_cover_opt(ca, "{}");
  cmd_cover_opt(cb, "{}");
  ASSERT_EQ(sa.runs.size(), 4u);
  for (const char* f : {"summary.csv", "runs/n2_s0_history.csv", "runs/n3_s1_history.csv", "runs/n3_s1_checkpoint.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  expect_csvs_parse(a);
  const auto summary = json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(summary["runs"].size(), 4u);
  EXPECT_EQ(summary["rollouts_per_run"], 2 * 6 * 3);
  const auto t = CsvTable::read((a / "summary.csv").string());
  EXPECT_EQ(t.size(), 2u * 3u);
}

TEST(Recover, FromCheckpointMatchesUninterrupted) {
  const auto pre = scratch_dir("recover_pre"), resumed = scratch_dir("recover_resumed"),
             straight = scratch_dir("recover_straight");
  cmd_cover_opt(parse_config(tiny_config("cover-opt", pre)), "{}");
  auto raw = tiny_config("recover", resumed);
  raw["checkpoint_dir"] = pre.string();
  cmd_recover(parse_config(raw), "{}");
  // Without checkpoints the pre-injury optimization runs first.
  cmd_recover(parse_config(tiny_config("recover", straight)), "{}");
  EXPECT_FALSE(fs::exists(resumed / "runs" / "n2_s0_history.csv"));
  EXPECT_TRUE(fs::exists(straight / "runs" / "n2_s0_history.csv"));
  for (const char* f : {"boxplot.csv", "summary.csv", "runs/n2_s0_recovery_history.csv", "runs/n3_s1_recovery_history.csv"})
    EXPECT_EQ(slurp(resumed / f), slurp(straight / f)) << f;
  const auto box = CsvTable::read((resumed / "boxplot.csv").string());
  EXPECT_EQ(box.size(), 4u);
  expect_csvs_parse(resumed);
}

TEST(ForwardGait, WritesHistoryAndGait) {
  const auto out = scratch_dir("forward");
  auto raw = json{{"experiment", "forward-gait"}, {"iterations", 2}, {"cycle_steps", 128},
                  {"noise", {{"cycles_per_gait", 6}}}, {"output", out.string()}};
  const auto states = cmd_forward_gait(parse_config(raw), "{}");
  ASSERT_EQ(states.size(), 1u);
  const auto t = CsvTable::read((out / "runs" / "s0_history.csv").string());
  EXPECT_EQ(t.size(), 3u);
  const auto score = t.column("score");
  for (std::size_t i = 1; i < score.size(); ++i) EXPECT_GE(score[i], score[i - 1]);
  const auto gait = json::parse(slurp(out / "runs" / "s0_gait.json")).get<GaitParams>();
  EXPECT_EQ(gait.n_joints(), 3u);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch_dir("cli");
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("dance"), 1);
  EXPECT_EQ(run_cli("words --config /nonexistent.json"), 1);
  EXPECT_EQ(run_cli("words --set colour=red --out " + out.string()), 1);
  EXPECT_EQ(run_cli("words --jobs 0"), 1);
  EXPECT_EQ(run_cli("vfield --set model.kind=purcell_chain --out " + out.string()), 1);
  // Almost no tangential drag: valid physics, singular drag matrix.
  EXPECT_EQ(run_cli("forward-gait --set model.kind=purcell_chain --set model.c_t=1e-13 --set iterations=1 "
                    "--set cycle_steps=64 --set noise.cycles_per_gait=3 --out " + out.string()),
            2);
  EXPECT_EQ(run_cli("forward-gait --set model.kind=purcell_chain --set model.c_t=0 --out " + out.string()), 1);
  EXPECT_EQ(run_cli("words --set k=1 --out " + out.string()), 0);
  EXPECT_EQ(CsvTable::read((out / "reachable.csv").string()).size(), 7u);
}

TEST(Cli, ConfigKindMustMatchSubcommand) {
  const auto out = scratch_dir("cli_kind");
  fs::create_directories(out);
  const auto cfg = out / "c.json";
  std::ofstream(cfg) << R"({"experiment": "words", "k": 1})";
  EXPECT_EQ(run_cli("toy-demo --config " + cfg.string() + " --out " + out.string()), 1);
  EXPECT_EQ(run_cli("words --config " + cfg.string() + " --out " + (out / "w").string()), 0);
  EXPECT_EQ(slurp(out / "w" / "config.json"), slurp(cfg));
}

TEST(Cli, SmokeRunIsQuick) {
  const auto out = scratch_dir("smoke");
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(run_cli("cover-opt --config " + std::string(GAITCOV_SOURCE_DIR) + "/configs/smoke.json --out " + out.string()), 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 60.0);
  const auto t = CsvTable::read((out / "runs" / "n3_s0_history.csv").string());
  EXPECT_EQ(t.size(), 6u);
  expect_csvs_parse(out);
}

}  // namespace
}  // namespace gaitcov
