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


#ifndef GAITCOV_EXPERIMENT_HPP_
#define GAITCOV_EXPERIMENT_HPP_

/**
 * @file
 * @brief Config-driven experiment runners behind the gaitcov command line.
 *
 * Every command writes into its output directory:
 *   config.json            the config exactly as given
 *   config.effective.json  after defaults and overrides
 *   version.txt            build version stamp
 * plus its own CSV/JSON artifacts. Runs are deterministic given config and seed.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gaitcov/coverage.hpp"
#include "gaitcov/dynamics.hpp"
#include "gaitcov/errors.hpp"
#include "gaitcov/gait.hpp"
#include "gaitcov/io.hpp"
#include "gaitcov/liegroup.hpp"
#include "gaitcov/optimizer.hpp"

#ifndef GAITCOV_VERSION
#define GAITCOV_VERSION "unknown"
#endif

extern char** environ;

namespace gaitcov {

inline const char* version() { return GAITCOV_VERSION; }

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"cover-opt", "recover", "words", "vfield", "forward-gait", "toy-demo"};
  return kinds;
}

struct FieldSpec {
  double r1_min{0.1}, r1_max{2.0};
  double r2_min{0.1}, r2_max{2.0};
  int n{20};
  std::vector<double> overlay_radii{0.5, 1.0, 1.5};
};

struct ExperimentConfig {
  std::string experiment{"cover-opt"};
  json model{{"kind", "purcell_chain"}};
  json grid{{"kind", "standard"}};
  int k{4};
  int iterations{30};
  int recovery_iterations{30};
  std::vector<std::uint64_t> seeds{};
  std::vector<int> n_joints{2, 3, 4, 5, 6, 7, 8};
  int gaits{3};
  double seed_amplitude{0.8};
  double rot_weight{kDefaultRotWeight};
  bool include_inverses{true};
  NoiseConfig noise{};
  GradientMode mode{GradientMode::kDataDriven};
  double ridge{0.0};
  double fd_step{1e-4};
  StepPolicy policy{};
  int cycle_steps{kDefaultCycleSteps};
  std::string output{"out"};
  int jobs{1};
  std::string checkpoint_dir{};
  json library{{"preset", "three_branch"}};
  FieldSpec field{};
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "experiment", "model",  "grid",        "k",           "iterations", "recovery_iterations", "seeds",
      "n_joints",   "gaits",  "seed_amplitude", "rot_weight", "include_inverses", "noise", "gradient",
      "step",       "cycle_steps", "output", "jobs",        "checkpoint_dir", "library", "field"};
  return keys;
}

inline void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InvalidConfiguration("unknown key '" + key + "'" + (where.empty() ? "" : " in '" + where + "'"));
}

/// Sensible per-command defaults for keys the config leaves out.
inline json command_defaults(const std::string& kind) {
  json d = json::object();
  if (kind == "forward-gait") {
    d["iterations"] = 15;
    d["gaits"] = 1;
    d["noise"] = {{"cycles_per_gait", 20}};
    d["model"] = {{"kind", "three_branch"}};
  }
  if (kind == "words" || kind == "toy-demo") d["k"] = 5;
  if (kind == "vfield") d["model"] = {{"kind", "two_slider"}};
  return d;
}

}  // namespace detail

/**
 * Set one key from text. The path uses '.' between levels; the value is read
 * as JSON when it parses, otherwise kept as a string.
 */
inline void apply_override(json& config, const std::string& path, const std::string& value) {
  if (path.empty()) throw InvalidConfiguration("override with an empty key");
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw InvalidConfiguration("bad override key '" + path + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
}

/// "key=value" form of apply_override.
inline void apply_assignment(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidConfiguration("override '" + assignment + "' is not key=value");
  apply_override(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/**
 * Overrides from the environment: GAITCOV_NOISE__SIGMA=0.05 sets noise.sigma.
 * Names are lower-cased and "__" separates levels.
 */
inline void apply_environment(json& config, const std::string& prefix = "GAITCOV_") {
  std::vector<std::pair<std::string, std::string>> found;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string path;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (key.compare(i, 2, "__") == 0) {
        path += '.';
        ++i;
      } else {
        path += key[i];
      }
    }
    found.emplace_back(path, entry.substr(eq + 1));
  }
  std::sort(found.begin(), found.end());
  for (const auto& [path, value] : found) apply_override(config, path, value);
}

/// Recursive merge: values in `over` replace those in `base`, objects merge.
inline json merged(json base, const json& over) {
  for (const auto& [key, value] : over.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object())
      base[key] = merged(base[key], value);
    else
      base[key] = value;
  }
  return base;
}

inline ExperimentConfig parse_config(const json& raw) {
  if (!raw.is_object()) throw InvalidConfiguration("config must be a JSON object");
  detail::reject_unknown(raw, detail::config_keys(), "");
  ExperimentConfig c;
  c.experiment = detail::optional_or<std::string>(raw, "experiment", c.experiment);
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end())
    throw InvalidConfiguration("unknown experiment '" + c.experiment + "'");
  const json j = merged(detail::command_defaults(c.experiment), raw);

  if (j.contains("model")) c.model = merged(c.model, j["model"]);
  model_from_json(c.model);
  if (j.contains("grid")) c.grid = j["grid"];
  goals_from_json(c.grid);
  c.k = detail::optional_or(j, "k", c.k);
  c.iterations = detail::optional_or(j, "iterations", c.iterations);
  c.recovery_iterations = detail::optional_or(j, "recovery_iterations", c.recovery_iterations);
  c.seeds = detail::optional_or(j, "seeds", c.seeds);
  if (c.seeds.empty()) {
    c.seeds.resize(c.experiment == "cover-opt" || c.experiment == "recover" ? 30 : 1);
    std::iota(c.seeds.begin(), c.seeds.end(), std::uint64_t{0});
  }
  c.n_joints = detail::optional_or(j, "n_joints", c.n_joints);
  c.gaits = detail::optional_or(j, "gaits", c.gaits);
  c.seed_amplitude = detail::optional_or(j, "seed_amplitude", c.seed_amplitude);
  c.rot_weight = detail::optional_or(j, "rot_weight", c.rot_weight);
  c.include_inverses = detail::optional_or(j, "include_inverses", c.include_inverses);
  c.cycle_steps = detail::optional_or(j, "cycle_steps", c.cycle_steps);
  c.output = detail::optional_or(j, "output", c.output);
  c.jobs = detail::optional_or(j, "jobs", c.jobs);
  c.checkpoint_dir = detail::optional_or(j, "checkpoint_dir", c.checkpoint_dir);
  if (j.contains("library")) c.library = j["library"];

  if (j.contains("noise")) {
    const json& n = j["noise"];
    detail::reject_unknown(n, {"sigma", "bump_sigma_scale", "cycles_per_gait"}, "noise");
    c.noise.sigma = detail::optional_or(n, "sigma", c.noise.sigma);
    c.noise.bump_sigma_scale = detail::optional_or(n, "bump_sigma_scale", c.noise.bump_sigma_scale);
    c.noise.cycles_per_gait = detail::optional_or(n, "cycles_per_gait", c.noise.cycles_per_gait);
  }
  if (j.contains("gradient")) {
    const json& g = j["gradient"];
    detail::reject_unknown(g, {"mode", "ridge", "fd_step"}, "gradient");
    const auto mode = detail::optional_or<std::string>(g, "mode", "data");
    if (mode == "data") c.mode = GradientMode::kDataDriven;
    else if (mode == "exact") c.mode = GradientMode::kExact;
    else throw InvalidConfiguration("gradient.mode must be 'data' or 'exact'");
    c.ridge = detail::optional_or(g, "ridge", c.ridge);
    c.fd_step = detail::optional_or(g, "fd_step", c.fd_step);
  }
  if (j.contains("step")) {
    const json& s = j["step"];
    detail::reject_unknown(s, {"initial_radius", "min_radius", "max_radius", "max_shrinks", "shrink", "expand",
                               "reject_worse", "per_gait_normalization"},
                           "step");
    auto& p = c.policy;
    p.initial_radius = detail::optional_or(s, "initial_radius", p.initial_radius);
    p.min_radius = detail::optional_or(s, "min_radius", p.min_radius);
    p.max_radius = detail::optional_or(s, "max_radius", p.max_radius);
    p.max_shrinks = detail::optional_or(s, "max_shrinks", p.max_shrinks);
    p.shrink = detail::optional_or(s, "shrink", p.shrink);
    p.expand = detail::optional_or(s, "expand", p.expand);
    p.reject_worse = detail::optional_or(s, "reject_worse", p.reject_worse);
    p.per_gait_normalization = detail::optional_or(s, "per_gait_normalization", p.per_gait_normalization);
  }
  if (j.contains("field")) {
    const json& f = j["field"];
    detail::reject_unknown(f, {"r1", "r2", "n", "overlay_radii"}, "field");
    const auto r1 = detail::optional_or(f, "r1", std::vector<double>{c.field.r1_min, c.field.r1_max});
    const auto r2 = detail::optional_or(f, "r2", std::vector<double>{c.field.r2_min, c.field.r2_max});
    if (r1.size() != 2 || r2.size() != 2) throw InvalidConfiguration("field.r1 and field.r2 are [min, max] pairs");
    c.field.r1_min = r1[0];
    c.field.r1_max = r1[1];
    c.field.r2_min = r2[0];
    c.field.r2_max = r2[1];
    c.field.n = detail::optional_or(f, "n", c.field.n);
    c.field.overlay_radii = detail::optional_or(f, "overlay_radii", c.field.overlay_radii);
  }

  if (c.k < 0) throw InvalidConfiguration("k must be non-negative");
  if (c.iterations < 0 || c.recovery_iterations < 0) throw InvalidConfiguration("iteration counts must be non-negative");
  if (c.gaits < 1) throw InvalidConfiguration("gaits must be positive");
  if (c.jobs < 1) throw InvalidConfiguration("jobs must be positive");
  if (c.cycle_steps < 64) throw InvalidConfiguration("cycle_steps must be at least 64");
  if (!(c.seed_amplitude > 0.0)) throw InvalidConfiguration("seed_amplitude must be positive");
  if (!(c.rot_weight > 0.0)) throw InvalidConfiguration("rot_weight must be positive");
  if (c.noise.cycles_per_gait < 3) throw InvalidConfiguration("noise.cycles_per_gait must be at least 3");
  if (c.noise.sigma < 0.0 || c.noise.bump_sigma_scale < 0.0) throw InvalidConfiguration("noise scales must be non-negative");
  if (c.field.n < 1) throw InvalidConfiguration("field.n must be positive");
  for (int n : c.n_joints)
    if (n < 1) throw InvalidConfiguration("n_joints entries must be positive");
  if (c.policy.initial_radius <= 0.0 || c.policy.min_radius <= 0.0 || c.policy.max_radius < c.policy.min_radius)
    throw InvalidConfiguration("step radii must satisfy 0 < min_radius <= max_radius and initial_radius > 0");
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"model", c.model},
          {"grid", c.grid},
          {"k", c.k},
          {"iterations", c.iterations},
          {"recovery_iterations", c.recovery_iterations},
          {"seeds", c.seeds},
          {"n_joints", c.n_joints},
          {"gaits", c.gaits},
          {"seed_amplitude", c.seed_amplitude},
          {"rot_weight", c.rot_weight},
          {"include_inverses", c.include_inverses},
          {"noise",
           {{"sigma", c.noise.sigma},
            {"bump_sigma_scale", c.noise.bump_sigma_scale},
            {"cycles_per_gait", c.noise.cycles_per_gait}}},
          {"gradient",
           {{"mode", c.mode == GradientMode::kExact ? "exact" : "data"}, {"ridge", c.ridge}, {"fd_step", c.fd_step}}},
          {"step",
           {{"initial_radius", c.policy.initial_radius},
            {"min_radius", c.policy.min_radius},
            {"max_radius", c.policy.max_radius},
            {"max_shrinks", c.policy.max_shrinks},
            {"shrink", c.policy.shrink},
            {"expand", c.policy.expand},
            {"reject_worse", c.policy.reject_worse},
            {"per_gait_normalization", c.policy.per_gait_normalization}}},
          {"cycle_steps", c.cycle_steps},
          {"output", c.output},
          {"jobs", c.jobs},
          {"checkpoint_dir", c.checkpoint_dir},
          {"library", c.library},
          {"field",
           {{"r1", {c.field.r1_min, c.field.r1_max}},
            {"r2", {c.field.r2_min, c.field.r2_max}},
            {"n", c.field.n},
            {"overlay_radii", c.field.overlay_radii}}}};
}

// ---------------------------------------------------------------------------
// Shared plumbing.
// ---------------------------------------------------------------------------

namespace detail {

inline std::filesystem::path prepare_output(const ExperimentConfig& c, const std::string& raw_text) {
  const std::filesystem::path out(c.output);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw InvalidConfiguration("cannot create output directory '" + c.output + "': " + ec.message());
  write_text_file((out / "config.json").string(), raw_text);
  write_text_file((out / "config.effective.json").string(), config_to_json(c).dump(2) + "\n");
  write_text_file((out / "version.txt").string(), std::string(version()) + "\n");
  return out;
}

/// Run tasks 0..n-1 on `jobs` threads; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline ConnectionModel model_with_joints(const json& spec, int n_joints) {
  json m = spec;
  if (m.value("kind", "") == "purcell_chain") m["n_joints"] = n_joints;
  return model_from_json(m);
}

inline std::string run_name(int n_joints, std::uint64_t seed) {
  return "n" + std::to_string(n_joints) + "_s" + std::to_string(seed);
}

inline double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Problem for the coverage runs of one swimmer size.
inline Problem coverage_problem(const ExperimentConfig& c, const ConnectionModel& model, std::uint64_t seed) {
  Problem pr;
  pr.model = model;
  CoverageSpec spec;
  spec.goals = goals_from_json(c.grid);
  spec.k = c.k;
  spec.rot_weight = c.rot_weight;
  spec.include_inverses = c.include_inverses;
  pr.objective = coverage_objective(spec);
  pr.noise = c.noise;
  pr.noise.seed = seed;
  pr.policy = c.policy;
  pr.mode = c.mode;
  pr.cycle_steps = c.cycle_steps;
  pr.ridge = c.ridge;
  pr.fd_step = c.fd_step;
  return pr;
}

/**
 * Starting gaits: each a sine on one joint, joints drawn without repetition
 * (cycling when there are fewer joints than gaits). Models whose shape range
 * excludes zero get the sine centred mid-range.
 */
inline std::vector<GaitParams> initial_gaits(const ConnectionModel& model, int n_gaits, double amplitude, std::uint64_t seed) {
  auto gaits = sine_seeds(model.shape_dim(), static_cast<std::size_t>(n_gaits), amplitude, seed);
  const auto [lo, hi] = model.shape_limits();
  if (lo > 0.0 || hi < 0.0) {
    const double mid = 0.5 * (lo + hi);
    for (auto& g : gaits)
      for (auto& j : g.joints) j.c = j.b = mid;
  }
  for (auto& g : gaits) project_to_range(g, lo, hi);
  return gaits;
}

// ---------------------------------------------------------------------------
// cover-opt and recover.
// ---------------------------------------------------------------------------

struct RunRecord {
  int n_joints{0};
  std::uint64_t seed{0};
  OptState state;
};

struct SweepSummary {
  std::vector<RunRecord> runs;
};

namespace detail {

inline CsvTable summary_table(const std::vector<RunRecord>& runs, int first_iteration) {
  CsvTable t({"n_joints", "iteration", "mean_h", "std_h", "runs"});
  std::map<std::pair<int, int>, std::vector<double>> by;
  for (const auto& r : runs)
    for (const auto& e : r.state.history)
      if (e.iteration >= first_iteration && e.event != "lock") by[{r.n_joints, e.iteration}].push_back(e.h);
  for (const auto& [key, hs] : by)
    t.add_row({std::to_string(key.first), std::to_string(key.second), format_double(mean(hs)),
               format_double(stddev(hs)), std::to_string(hs.size())});
  return t;
}

inline OptState optimize_run(const ExperimentConfig& c, int n_joints, std::uint64_t seed,
                             const std::filesystem::path& runs_dir) {
  const ConnectionModel model = model_with_joints(c.model, n_joints);
  const Problem pr = coverage_problem(c, model, seed);
  OptState s = make_state(pr, initial_gaits(model, c.gaits, c.seed_amplitude, seed));
  const std::string name = run_name(n_joints, seed);
  const auto checkpoint = (runs_dir / (name + "_checkpoint.json")).string();
  write_text_file(checkpoint, state_to_json(s).dump() + "\n");
  s = run_iterations(std::move(s), pr, c.iterations,
                     [&](const OptState& st) { write_text_file(checkpoint, state_to_json(st).dump() + "\n"); });
  history_table(s).write((runs_dir / (name + "_history.csv")).string());
  return s;
}

}  // namespace detail

/**
 * Optimize a gait library for every (n_joints, seed) pair.
 *
 * Writes runs/<name>_history.csv and runs/<name>_checkpoint.json per run
 * (the checkpoint is refreshed every iteration), summary.csv with mean and
 * standard deviation of h per iteration and swimmer size, and summary.json.
 */
inline SweepSummary cmd_cover_opt(const ExperimentConfig& c, const std::string& raw_text) {
  const auto out = detail::prepare_output(c, raw_text);
  std::filesystem::create_directories(out / "runs");
  const bool sweep = c.model.value("kind", "") == "purcell_chain";
  const std::vector<int> sizes = sweep ? c.n_joints : std::vector<int>{static_cast<int>(model_from_json(c.model).shape_dim())};
  SweepSummary summary;
  for (int n : sizes)
    for (auto seed : c.seeds) summary.runs.push_back({n, seed, {}});
  detail::parallel_for(summary.runs.size(), c.jobs, [&](std::size_t i) {
    auto& r = summary.runs[i];
    r.state = detail::optimize_run(c, r.n_joints, r.seed, out / "runs");
  });
  detail::summary_table(summary.runs, 0).write((out / "summary.csv").string());
  json runs = json::array();
  for (const auto& r : summary.runs)
    runs.push_back({{"n_joints", r.n_joints}, {"seed", r.seed}, {"initial_h", r.state.history.front().h}, {"final_h", r.state.h}});
  const int cycles = c.iterations * c.noise.cycles_per_gait;
  write_text_file((out / "summary.json").string(),
                  json{{"runs", runs},
                       {"cycles_per_gait", cycles},
                       {"rollouts_per_run", cycles * c.gaits}}
                          .dump(2) + "\n");
  return summary;
}

/**
 * Injure and re-optimize: for every (n_joints, seed) the iteration-`iterations`
 * checkpoint is loaded (from checkpoint_dir, default the output directory) or
 * produced first; then the highest-amplitude joint is locked at its base-point
 * value and optimization continues for recovery_iterations.
 *
 * Writes runs/<name>_recovery_history.csv and _recovery_checkpoint.json,
 * boxplot.csv (pre-injury, damaged and recovered h) and summary.csv.
 */
inline SweepSummary cmd_recover(const ExperimentConfig& c, const std::string& raw_text) {
  const auto out = detail::prepare_output(c, raw_text);
  std::filesystem::create_directories(out / "runs");
  const std::filesystem::path ckpt_dir = c.checkpoint_dir.empty() ? out : std::filesystem::path(c.checkpoint_dir);
  const bool sweep = c.model.value("kind", "") == "purcell_chain";
  const std::vector<int> sizes = sweep ? c.n_joints : std::vector<int>{static_cast<int>(model_from_json(c.model).shape_dim())};
  SweepSummary summary;
  for (int n : sizes)
    for (auto seed : c.seeds) summary.runs.push_back({n, seed, {}});
  struct Scores {
    double pre{0}, damaged{0}, post{0};
    int joint{-1};
  };
  std::vector<Scores> scores(summary.runs.size());

  detail::parallel_for(summary.runs.size(), c.jobs, [&](std::size_t i) {
    auto& r = summary.runs[i];
    const std::string name = detail::run_name(r.n_joints, r.seed);
    const auto ckpt = ckpt_dir / "runs" / (name + "_checkpoint.json");
    OptState pre;
    bool loaded = false;
    if (std::filesystem::exists(ckpt)) {
      pre = state_from_json(read_json_file(ckpt.string()));
      loaded = pre.iteration == c.iterations;
    }
    if (!loaded) pre = detail::optimize_run(c, r.n_joints, r.seed, out / "runs");
    const ConnectionModel model = detail::model_with_joints(c.model, r.n_joints);
    const Problem pr = coverage_problem(c, model, r.seed);
    OptState damaged = lock_joint(pre, pr, max_amplitude_joint(pre.gaits));
    const auto rckpt = (out / "runs" / (name + "_recovery_checkpoint.json")).string();
    r.state = run_iterations(damaged, pr, c.recovery_iterations,
                             [&](const OptState& st) { write_text_file(rckpt, state_to_json(st).dump() + "\n"); });
    write_text_file(rckpt, state_to_json(r.state).dump() + "\n");
    history_table(r.state).write((out / "runs" / (name + "_recovery_history.csv")).string());
    scores[i] = {pre.h, damaged.h, r.state.h, *damaged.locked_joint};
  });

  CsvTable box({"n_joints", "seed", "pre_h", "damaged_h", "post_h", "locked_joint"});
  for (std::size_t i = 0; i < summary.runs.size(); ++i)
    box.add_row({std::to_string(summary.runs[i].n_joints), std::to_string(summary.runs[i].seed),
                 format_double(scores[i].pre), format_double(scores[i].damaged), format_double(scores[i].post),
                 std::to_string(scores[i].joint)});
  box.write((out / "boxplot.csv").string());
  detail::summary_table(summary.runs, 0).write((out / "summary.csv").string());
  return summary;
}

// ---------------------------------------------------------------------------
// words, vfield, toy-demo.
// ---------------------------------------------------------------------------

/// Six-letter toy library: three hand-designed gaits plus their inverses.
inline Library toy_library(const std::string& preset, int steps = kDefaultCycleSteps) {
  Library lib;
  lib.include_inverses = true;
  if (preset == "three_branch") {
    const ConnectionModel model{ThreeBranch{}};
    for (int k = 1; k <= 3; ++k) {
      lib.letters.push_back(integrate_cycle(model, three_branch_preset_gait(k), steps).displacement);
      lib.labels.push_back("G" + std::to_string(k));
    }
  } else if (preset == "two_slider") {
    const ConnectionModel model{TwoSlider{}};
    const double radii[3] = {0.5, 1.0, 1.5};
    for (int i = 0; i < 3; ++i) {
      lib.letters.push_back(integrate_cycle(model, two_slider_arc_gait(radii[i]), steps).displacement);
      lib.labels.push_back("R" + std::to_string(i + 1));
    }
  } else {
    throw InvalidConfiguration("unknown library preset '" + preset + "'");
  }
  return lib;
}

/// Library from {"preset": name} or {"letters": [...], "labels": [...], "include_inverses": bool}.
inline Library library_from_json(const json& j, int steps = kDefaultCycleSteps) {
  if (j.contains("preset")) return toy_library(j["preset"].get<std::string>(), steps);
  Library lib;
  lib.letters = detail::optional_or<std::vector<Pose2>>(j, "letters", {});
  lib.labels = detail::optional_or<std::vector<std::string>>(j, "labels", {});
  if (lib.labels.empty())
    for (std::size_t i = 0; i < lib.letters.size(); ++i) lib.labels.push_back("L" + std::to_string(i + 1));
  if (lib.labels.size() != lib.letters.size()) throw InvalidConfiguration("library labels and letters differ in length");
  lib.include_inverses = detail::optional_or(j, "include_inverses", true);
  return lib;
}

inline CsvTable reachable_table(const Library& lib, int k) {
  CsvTable t({"length", "x", "y", "theta", "label"});
  for (const auto& e : reachable_set(lib, k))
    t.add_row({std::to_string(e.length), format_double(e.pose.x), format_double(e.pose.y), format_double(e.pose.theta),
               e.label});
  return t;
}

/// Axis-aligned bounds of a goal set.
inline CsvTable goal_box_table(const GoalSet& goals) {
  CsvTable t({"axis", "min", "max"});
  const auto& g = goals.goals();
  auto bounds = [&](auto get) {
    double lo = get(g.front()), hi = lo;
    for (const auto& p : g) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    return std::pair{lo, hi};
  };
  const auto [x0, x1] = bounds([](const Pose2& p) { return p.x; });
  const auto [y0, y1] = bounds([](const Pose2& p) { return p.y; });
  auto [t0, t1] = bounds([](const Pose2& p) { return p.theta; });
  if (t1 == kPi) t0 = -kPi;  // a heading of pi is also -pi: the grid wraps the whole circle
  t.add_row({"x", format_double(x0), format_double(x1)});
  t.add_row({"y", format_double(y0), format_double(y1)});
  t.add_row({"theta", format_double(t0), format_double(t1)});
  return t;
}

struct WordsResult {
  Library library;
  std::size_t points{0};
  double h{0.0};
};

/// reachable.csv (every word up to k), letters.csv, box.csv and the library's h_k.
inline WordsResult cmd_words(const ExperimentConfig& c, const std::string& raw_text) {
  if (c.k > 5) throw InvalidConfiguration("words: k must be at most 5");
  const auto out = detail::prepare_output(c, raw_text);
  WordsResult r;
  r.library = library_from_json(c.library, c.cycle_steps);
  const auto table = reachable_table(r.library, c.k);
  table.write((out / "reachable.csv").string());
  r.points = table.size();
  CsvTable letters({"label", "x", "y", "theta"});
  const auto alphabet = r.library.alphabet();
  const auto labels = r.library.alphabet_labels();
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    letters.add_row({labels[i], format_double(alphabet[i].x), format_double(alphabet[i].y), format_double(alphabet[i].theta)});
  letters.write((out / "letters.csv").string());
  const GoalSet goals = goals_from_json(c.grid);
  goal_box_table(goals).write((out / "box.csv").string());
  r.h = coverage_cost_k(r.library, std::min(c.k, 4), goals, c.rot_weight).h;
  write_text_file((out / "summary.json").string(),
                  json{{"points", r.points}, {"h", r.h}, {"h_depth", std::min(c.k, 4)}}.dump(2) + "\n");
  return r;
}

struct FieldResult {
  std::size_t rows{0};
  std::vector<Pose2> overlay_displacements;
};

/**
 * field.csv: every row of A(r) on an n x n grid of a two-dimensional shape
 * space; overlay.csv and overlay_summary.csv: hand-designed loops drawn on it
 * (arcs of the configured radii for the two-slider, the square stroke for a
 * two-joint chain).
 */
inline FieldResult cmd_vfield(const ExperimentConfig& c, const std::string& raw_text) {
  const ConnectionModel model = model_from_json(c.model);
  if (model.shape_dim() != 2)
    throw Unsupported("vfield: shape space of '" + model.kind() + "' has dimension " +
                      std::to_string(model.shape_dim()) + ", need 2");
  const auto out = detail::prepare_output(c, raw_text);
  const auto r1 = linspace(c.field.r1_min, c.field.r1_max, c.field.n);
  const auto r2 = linspace(c.field.r2_min, c.field.r2_max, c.field.n);
  CsvTable field({"r1", "r2", "ax_1", "ax_2", "ay_1", "ay_2", "atheta_1", "atheta_2"});
  for (const auto& s : sample_connection_field(model, r1, r2))
    field.add_row(std::vector<double>{s.r1, s.r2, s.a(0, 0), s.a(0, 1), s.a(1, 0), s.a(1, 1), s.a(2, 0), s.a(2, 1)});
  field.write((out / "field.csv").string());

  FieldResult res;
  res.rows = field.size();
  std::vector<std::pair<std::string, GaitFunction>> paths;
  if (model.kind() == "two_slider") {
    for (double radius : c.field.overlay_radii) paths.emplace_back(format_double(radius), two_slider_arc_gait(radius));
  } else {
    paths.emplace_back("square", square_gait(1.0));
  }
  CsvTable overlay({"path", "phase", "r1", "r2"});
  CsvTable summary({"path", "x", "y", "theta"});
  for (const auto& [label, gait] : paths) {
    for (int i = 0; i <= 120; ++i) {
      const double phi = 2.0 * kPi * i / 120;
      const auto s = gait(phi);
      overlay.add_row({label, format_double(phi), format_double(s.r[0]), format_double(s.r[1])});
    }
    const Pose2 d = integrate_cycle(model, gait, c.cycle_steps).displacement;
    res.overlay_displacements.push_back(d);
    summary.add_row({label, format_double(d.x), format_double(d.y), format_double(d.theta)});
  }
  overlay.write((out / "overlay.csv").string());
  summary.write((out / "overlay_summary.csv").string());
  return res;
}

struct ToyDemoResult {
  Library two_slider;
  Library three_branch;
  double h_two_slider{0.0};
  double h_three_branch{0.0};
};

/// Both six-letter toy libraries: reachable sets to depth k and h_4 against the grid.
inline ToyDemoResult cmd_toy_demo(const ExperimentConfig& c, const std::string& raw_text) {
  if (c.k > 5) throw InvalidConfiguration("toy-demo: k must be at most 5");
  const auto out = detail::prepare_output(c, raw_text);
  const GoalSet goals = goals_from_json(c.grid);
  ToyDemoResult r;
  r.two_slider = toy_library("two_slider", c.cycle_steps);
  r.three_branch = toy_library("three_branch", c.cycle_steps);
  reachable_table(r.two_slider, c.k).write((out / "reachable_two_slider.csv").string());
  reachable_table(r.three_branch, c.k).write((out / "reachable_three_branch.csv").string());
  goal_box_table(goals).write((out / "box.csv").string());
  r.h_two_slider = coverage_cost_k(r.two_slider, 4, goals, c.rot_weight).h;
  r.h_three_branch = coverage_cost_k(r.three_branch, 4, goals, c.rot_weight).h;
  CsvTable t({"library", "letters", "h4"});
  t.add_row({"two_slider", std::to_string(r.two_slider.alphabet_size()), format_double(r.h_two_slider)});
  t.add_row({"three_branch", std::to_string(r.three_branch.alphabet_size()), format_double(r.h_three_branch)});
  t.write((out / "summary.csv").string());
  return r;
}

// ---------------------------------------------------------------------------
// forward-gait.
// ---------------------------------------------------------------------------

/**
 * Single-gait optimization of x - y^2 - theta^2 per cycle, one run per seed.
 * Writes runs/s<seed>_history.csv (with the score) and runs/s<seed>_gait.json.
 */
inline std::vector<OptState> cmd_forward_gait(const ExperimentConfig& c, const std::string& raw_text) {
  const auto out = detail::prepare_output(c, raw_text);
  std::filesystem::create_directories(out / "runs");
  const ConnectionModel model = model_from_json(c.model);
  std::vector<OptState> results(c.seeds.size());
  detail::parallel_for(c.seeds.size(), c.jobs, [&](std::size_t i) {
    const auto seed = c.seeds[i];
    Problem pr = coverage_problem(c, model, seed);
    pr.objective = forward_objective();
    OptState s = make_state(pr, initial_gaits(model, 1, c.seed_amplitude, seed));
    s = run_iterations(std::move(s), pr, c.iterations);
    CsvTable t({"iteration", "score", "accepted", "x", "y", "theta"});
    for (const auto& e : s.history) {
      const Pose2 d = e.displacements.front();
      t.add_row({std::to_string(e.iteration), format_double(-e.h), e.accepted ? "1" : "0", format_double(d.x),
                 format_double(d.y), format_double(d.theta)});
    }
    const std::string name = "s" + std::to_string(seed);
    t.write((out / "runs" / (name + "_history.csv")).string());
    write_text_file((out / "runs" / (name + "_gait.json")).string(), json(s.gaits.front()).dump(2) + "\n");
    results[i] = std::move(s);
  });
  return results;
}

/// Dispatch on config.experiment.
inline void run_experiment(const ExperimentConfig& c, const std::string& raw_text) {
  if (c.experiment == "cover-opt") cmd_cover_opt(c, raw_text);
  else if (c.experiment == "recover") cmd_recover(c, raw_text);
  else if (c.experiment == "words") cmd_words(c, raw_text);
  else if (c.experiment == "vfield") cmd_vfield(c, raw_text);
  else if (c.experiment == "forward-gait") cmd_forward_gait(c, raw_text);
  else if (c.experiment == "toy-demo") cmd_toy_demo(c, raw_text);
  else throw InvalidConfiguration("unknown experiment '" + c.experiment + "'");
}

}  // namespace gaitcov

#endif  // GAITCOV_EXPERIMENT_HPP_
