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


// gaitcov command line: one subcommand per experiment, all driven by a JSON config.
//
//   gaitcov cover-opt --config configs/coverage_sweep.json --out out/sweep --jobs 8
//   gaitcov words --set k=3 --set library.preset=two_slider
//
// Precedence (lowest first): built-in defaults, config file, GAITCOV_* env vars,
// --set, then --seed/--out/--jobs.
// Exit codes: 0 success, 1 invalid config, 2 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaitcov/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
};

int run(const std::string& command, const Options& opt) {
  using gaitcov::json;
  std::string raw_text = "{}\n";
  json raw = json::object();
  if (!opt.config_path.empty()) {
    raw = gaitcov::read_json_file(opt.config_path);
    std::ifstream in(opt.config_path, std::ios::binary);
    raw_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (raw.contains("experiment") && raw["experiment"] != command)
    throw gaitcov::InvalidConfiguration("config is for '" + raw["experiment"].get<std::string>() + "', not '" +
                                        command + "'");
  raw["experiment"] = command;
  gaitcov::apply_environment(raw);
  for (const auto& s : opt.sets) gaitcov::apply_assignment(raw, s);
  if (opt.seed) raw["seeds"] = json::array({*opt.seed});
  if (opt.out) raw["output"] = *opt.out;
  if (opt.jobs) raw["jobs"] = *opt.jobs;
  const auto config = gaitcov::parse_config(raw);
  gaitcov::run_experiment(config, raw_text);
  std::cout << command << ": wrote " << std::filesystem::absolute(config.output).string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage-driven gait library optimization for drag-dominated swimmers"};
  app.set_version_flag("--version", std::string(gaitcov::version()));
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"cover-opt", "optimize three-gait libraries over swimmer sizes and seeds"},
      {"recover", "lock the largest-amplitude joint and re-optimize from checkpoints"},
      {"words", "export the reachable set of a gait library"},
      {"vfield", "sample the connection field of a two-dimensional shape space"},
      {"forward-gait", "optimize a single gait for forward travel"},
      {"toy-demo", "hand-designed libraries of the two toy systems"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", opt.sets, "override a config key, e.g. --set noise.sigma=0.05");
    sub->add_option("--seed", opt.seed, "run a single seed");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--jobs", opt.jobs, "parallel runs")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const gaitcov::InvalidConfiguration& e) {
    std::cerr << "gaitcov: invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gaitcov::Unsupported& e) {
    std::cerr << "gaitcov: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gaitcov::InvalidInput& e) {
    std::cerr << "gaitcov: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gaitcov::Error& e) {
    std::cerr << "gaitcov: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const gaitcov::json::exception& e) {
    std::cerr << "gaitcov: invalid config: " << e.what() << "\n";
    return kExitConfig;
  }
}
