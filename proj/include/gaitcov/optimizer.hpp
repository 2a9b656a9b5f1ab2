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

#ifndef GAITCOV_OPTIMIZER_HPP_
#define GAITCOV_OPTIMIZER_HPP_

/**
 * @file
 * @brief Gait-library optimization from noisy rollouts.
 *
 * One iteration:
 *  1. run every gait for a batch of cycles with Gaussian parameter noise,
 *  2. fit a linear model of log-displacement against the parameter offset
 *     (ridge regression; or central differences on the simulator in exact mode),
 *  3. push the objective gradient through the models,
 *  4. take a backtracking step on the model-predicted objective inside a
 *     trust radius, then score the new gaits on the simulator.
 *
 * The objective is a function of the letters' twists. For coverage it is
 * h_k; its gradient flows through the best word of every goal only.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gaitcov/coverage.hpp"
#include "gaitcov/dynamics.hpp"
#include "gaitcov/errors.hpp"
#include "gaitcov/gait.hpp"
#include "gaitcov/liegroup.hpp"

namespace gaitcov {

// ---------------------------------------------------------------------------
// Random streams.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream per (seed, iteration, gait, cycle); order of evaluation does not matter.
inline std::mt19937_64 rollout_rng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t gait, std::uint64_t cycle) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ iteration);
  s = splitmix64(s ^ (gait << 32));
  s = splitmix64(s ^ cycle);
  return std::mt19937_64(s);
}

// ---------------------------------------------------------------------------
// Rollouts and local models.
// ---------------------------------------------------------------------------

struct NoiseConfig {
  /// Perturbation scale of c, b and a, radians.
  double sigma{0.02};
  /// Bump weights are perturbed with sigma * bump_sigma_scale.
  double bump_sigma_scale{0.25};
  int cycles_per_gait{30};
  std::uint64_t seed{0};
};

/// Per-coordinate perturbation scale of a flattened gait; frozen coordinates get 0.
inline std::vector<double> perturbation_scales(std::size_t n_joints, const NoiseConfig& noise,
                                               const std::vector<bool>& frozen = {}) {
  if (noise.sigma < 0.0 || noise.bump_sigma_scale < 0.0) throw InvalidConfiguration("noise scales must be non-negative");
  std::vector<double> s(n_joints * kParamsPerJoint);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool is_bump = i % kParamsPerJoint >= 3;
    s[i] = (i < frozen.size() && frozen[i]) ? 0.0 : noise.sigma * (is_bump ? noise.bump_sigma_scale : 1.0);
  }
  return s;
}

struct RolloutSample {
  std::vector<double> delta;  // flattened parameter offset
  Twist2 xi;                  // log of the measured displacement
};

struct GaitBatch {
  /// Log-displacement of the unperturbed gait; the local model is anchored here.
  Twist2 nominal;
  std::vector<RolloutSample> samples;
  int discarded{0};
};

using RolloutBatch = std::vector<GaitBatch>;

/**
 * Run every gait cycles_per_gait times at params + Gaussian offset, plus
 * once unperturbed.
 *
 * Locked joints are never perturbed. Samples hitting a singular shape are
 * dropped; more than half dropped for a gait is a NumericalFailure.
 */
inline RolloutBatch rollout_batch(const ConnectionModel& model, std::span<const GaitParams> gaits,
                                  std::span<const LockMask> locks, const NoiseConfig& noise, std::uint64_t iteration = 0,
                                  int steps = kDefaultCycleSteps) {
  if (noise.cycles_per_gait < 1) throw InvalidConfiguration("cycles_per_gait must be positive");
  RolloutBatch batch(gaits.size());
  for (std::size_t g = 0; g < gaits.size(); ++g) {
    const LockMask lock = g < locks.size() ? locks[g] : LockMask{};
    const auto scales = perturbation_scales(gaits[g].n_joints(), noise, frozen_coordinates(lock, gaits[g].n_joints()));
    const auto base = flatten(gaits[g]);
    batch[g].nominal = log(gait_displacement(model, gaits[g], steps));
    for (int c = 0; c < noise.cycles_per_gait; ++c) {
      auto rng = rollout_rng(noise.seed, iteration, g, static_cast<std::uint64_t>(c));
      std::normal_distribution<double> normal(0.0, 1.0);
      RolloutSample sample;
      sample.delta.resize(base.size());
      std::vector<double> p(base.size());
      for (std::size_t i = 0; i < base.size(); ++i) {
        const double z = normal(rng);
        sample.delta[i] = scales[i] * z;
        p[i] = base[i] + sample.delta[i];
      }
      try {
        const auto params = unflatten(p, gaits[g].n_joints(), gaits[g].omega);
        sample.xi = log(gait_displacement(model, params, steps));
        batch[g].samples.push_back(std::move(sample));
      } catch (const SingularConfiguration&) {
        ++batch[g].discarded;
      }
    }
    if (2 * batch[g].discarded > noise.cycles_per_gait)
      throw NumericalFailure("rollout batch: more than half of the cycles of gait " + std::to_string(g) +
                             " hit singular shapes");
  }
  return batch;
}

/// Affine prediction of a gait's log-displacement around its current parameters.
struct LocalModel {
  Twist2 intercept;
  Eigen::Matrix<double, 3, Eigen::Dynamic> jacobian;
  double residual{0.0};

  Twist2 predict(std::span<const double> delta) const {
    const Eigen::Map<const Eigen::VectorXd> d(delta.data(), static_cast<long>(delta.size()));
    return intercept + Twist2::from(jacobian * d);
  }
};

/**
 * Ridge least squares of log-displacement on parameter offset.
 *
 * The model passes through the batch's nominal displacement. The slope is
 * fit on centered data so the mean second-order offset of the samples lands
 * in a discarded intercept instead of biasing the Jacobian. Only coordinates that were
 * perturbed in some sample are regressed; the rest get zero Jacobian columns.
 * With no more samples than regressed coordinates a ridge of max(ridge, 1e-8)
 * engages. A rank-deficient but otherwise determined system with ridge 0
 * falls back to 1e-8 with a warning.
 */
inline LocalModel fit_local_model(const GaitBatch& batch, double ridge = 0.0) {
  const auto& s = batch.samples;
  if (s.size() < 3) throw InvalidInput("fit_local_model: need at least 3 samples");
  if (ridge < 0.0) throw InvalidConfiguration("ridge must be non-negative");
  const std::size_t dim = s.front().delta.size();
  const auto m = static_cast<long>(s.size());

  std::vector<long> active;
  for (std::size_t i = 0; i < dim; ++i)
    if (std::any_of(s.begin(), s.end(), [i](const RolloutSample& r) { return r.delta[i] != 0.0; }))
      active.push_back(static_cast<long>(i));
  const auto p = static_cast<long>(active.size());

  Eigen::MatrixXd x(m, p);
  Eigen::MatrixXd y(m, 3);
  for (long r = 0; r < m; ++r) {
    const auto& smp = s[static_cast<std::size_t>(r)];
    for (long c = 0; c < p; ++c) x(r, c) = smp.delta[static_cast<std::size_t>(active[c])];
    y.row(r) = (smp.xi - batch.nominal).vec().transpose();
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::RowVector3d y_mean = y.colwise().mean();
  x.rowwise() -= x_mean;
  y.rowwise() -= y_mean;

  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(p, 3);  // y ~ x coef
  if (p > 0) {
    if (p >= m) {
      const double lambda = std::max(ridge, 1e-8);
      const Eigen::MatrixXd gram = x * x.transpose() + lambda * Eigen::MatrixXd::Identity(m, m);
      coef = x.transpose() * gram.ldlt().solve(y);
    } else {
      double lambda = ridge;
      if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() == p) {
          coef = qr.solve(y);
        } else {
          warn_once("fit_local_model: rank-deficient regression, falling back to ridge 1e-8");
          lambda = 1e-8;
        }
      }
      if (lambda > 0.0)
        coef = (x.transpose() * x + lambda * Eigen::MatrixXd::Identity(p, p)).ldlt().solve(x.transpose() * y);
    }
  }

  LocalModel model;
  model.intercept = batch.nominal;
  model.jacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, static_cast<long>(dim));
  for (long c = 0; c < p; ++c) model.jacobian.col(active[c]) = coef.row(c).transpose();
  const Eigen::MatrixXd resid = p > 0 ? Eigen::MatrixXd(y - x * coef) : y;
  model.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
  return model;
}

/// Central-difference model straight from the simulator (exact mode).
inline LocalModel fit_exact_model(const ConnectionModel& model, const GaitParams& gait, const LockMask& lock = {},
                                  double fd_step = 1e-4, int steps = kDefaultCycleSteps) {
  const auto base = flatten(gait);
  const auto frozen = frozen_coordinates(lock, gait.n_joints());
  LocalModel out;
  out.intercept = log(gait_displacement(model, gait, steps));
  out.jacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, static_cast<long>(base.size()));
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (frozen[i]) continue;
    auto plus = base, minus = base;
    plus[i] += fd_step;
    minus[i] -= fd_step;
    const Twist2 xp = log(gait_displacement(model, unflatten(plus, gait.n_joints(), gait.omega), steps));
    const Twist2 xm = log(gait_displacement(model, unflatten(minus, gait.n_joints(), gait.omega), steps));
    out.jacobian.col(static_cast<long>(i)) = (xp.vec() - xm.vec()) / (2.0 * fd_step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objectives over letter twists.
// ---------------------------------------------------------------------------

struct ObjectiveValue {
  double value{0.0};
  std::vector<Eigen::Vector3d> gradient;  // d value / d twist, one per letter
};

/// Scalar cost of a set of letter twists, lower is better.
struct LetterObjective {
  std::function<double(std::span<const Twist2>)> value;
  std::function<ObjectiveValue(std::span<const Twist2>)> value_and_gradient;
};

/// Goals closer than this count as hit and pull on no letter.
inline constexpr double kCoveredDistance = 1e-12;

struct CoverageSpec {
  GoalSet goals{standard_grid()};
  int k{4};
  double rot_weight{kDefaultRotWeight};
  bool include_inverses{true};
  WordLimits limits{};
};

inline std::vector<Pose2> letter_alphabet(std::span<const Twist2> letters, bool include_inverses) {
  std::vector<Pose2> a;
  for (const auto& xi : letters) a.push_back(exp(xi));
  if (include_inverses)
    for (const auto& xi : letters) a.push_back(inverse(exp(xi)));
  return a;
}

/**
 * h_k and its gradient with respect to each letter's twist.
 *
 * Every goal contributes through its best word only (ties resolved as in
 * coverage_cost_k). Within that word, the letter at position p moves the net
 * motion by d compose / d second at the prefix, then d compose / d first
 * against the suffix; inverse letters are exp(-xi).
 */
inline ObjectiveValue coverage_gradient_letters(std::span<const Twist2> letters, const CoverageSpec& spec) {
  const WordSet words(letter_alphabet(letters, spec.include_inverses), spec.k, spec.limits);
  const auto matches = detail::nearest_motions(words.motions(), spec.goals, spec.rot_weight);
  const std::size_t n = letters.size();

  ObjectiveValue out;
  out.gradient.assign(n, Eigen::Vector3d::Zero());
  std::vector<Pose2> prefix, suffix;
  for (std::size_t gi = 0; gi < matches.size(); ++gi) {
    const double w = spec.goals.weights()[gi];
    out.value += w * matches[gi].distance;
    // The norm has 0 in its subdifferential at 0; rounding keeps exact hits
    // from landing on 0 itself.
    if (matches[gi].distance <= kCoveredDistance) continue;
    const auto word = words.letters(matches[gi].index);
    if (word.empty()) continue;
    const Pose2& net = words.motions()[matches[gi].index];
    const Pose2 ginv = inverse(spec.goals.goals()[gi]);
    const Pose2 err = compose(net, ginv);
    const Eigen::RowVector3d dl_dnet = eta_gradient(log(err), spec.rot_weight).transpose() * log_jacobian(err) *
                                       compose_jacobian_first(net, ginv);

    const std::size_t m = word.size();
    prefix.assign(m + 1, Pose2::identity());
    suffix.assign(m + 1, Pose2::identity());
    for (std::size_t p = 0; p < m; ++p) prefix[p + 1] = compose(prefix[p], words.alphabet()[static_cast<std::size_t>(word[p])]);
    for (std::size_t p = m; p-- > 0;) suffix[p] = compose(words.alphabet()[static_cast<std::size_t>(word[p])], suffix[p + 1]);

    for (std::size_t p = 0; p < m; ++p) {
      const auto a = static_cast<std::size_t>(word[p]);
      const std::size_t j = a % n;
      const double sign = a < n ? 1.0 : -1.0;
      const Eigen::Matrix3d dnet_dletter =
          compose_jacobian_first(prefix[p + 1], suffix[p + 1]) * compose_jacobian_second(prefix[p]);
      const Eigen::Matrix3d dletter_dxi = sign * exp_jacobian(sign * letters[j]);
      out.gradient[j] += w * (dl_dnet * dnet_dletter * dletter_dxi).transpose();
    }
  }
  return out;
}

inline LetterObjective coverage_objective(CoverageSpec spec) {
  LetterObjective obj;
  obj.value = [spec](std::span<const Twist2> letters) {
    return coverage_h(WordSet(letter_alphabet(letters, spec.include_inverses), spec.k, spec.limits), spec.goals,
                      spec.rot_weight);
  };
  obj.value_and_gradient = [spec](std::span<const Twist2> letters) { return coverage_gradient_letters(letters, spec); };
  return obj;
}

/// Forward-progress score x - y^2 - theta^2 of a per-cycle motion.
inline double forward_score(const Pose2& m) { return m.x - m.y * m.y - m.theta * m.theta; }

/// Minimizes -forward_score(exp(xi)) of a single letter.
inline LetterObjective forward_objective() {
  LetterObjective obj;
  obj.value = [](std::span<const Twist2> letters) { return -forward_score(exp(letters[0])); };
  obj.value_and_gradient = [](std::span<const Twist2> letters) {
    const Pose2 m = exp(letters[0]);
    const Eigen::RowVector3d df(1.0, -2.0 * m.y, -2.0 * m.theta);
    ObjectiveValue out;
    out.value = -forward_score(m);
    out.gradient.push_back(-(df * exp_jacobian(letters[0])).transpose());
    return out;
  };
  return obj;
}

/// Objective at the models' predicted letters for a stacked parameter offset.
inline double predicted_objective(const LetterObjective& obj, std::span<const LocalModel> models,
                                  std::span<const double> stacked_delta) {
  std::vector<Twist2> letters;
  std::size_t off = 0;
  for (const auto& m : models) {
    const auto n = static_cast<std::size_t>(m.jacobian.cols());
    letters.push_back(m.predict(stacked_delta.subspan(off, n)));
    off += n;
  }
  return obj.value(letters);
}

struct StackedGradient {
  double value{0.0};          // objective at the models' intercepts
  std::vector<double> gradient;  // over all gaits' flattened parameters
};

/**
 * Chain rule through the local models: d obj / d params_j = J_j^T d obj / d xi_j,
 * evaluated at the letters the models predict for a stacked offset (zero when
 * empty).
 */
inline StackedGradient objective_gradient(const LetterObjective& obj, std::span<const LocalModel> models,
                                          std::span<const double> stacked_delta = {}) {
  std::vector<Twist2> letters;
  std::size_t off = 0;
  for (const auto& m : models) {
    const auto n = static_cast<std::size_t>(m.jacobian.cols());
    letters.push_back(stacked_delta.empty() ? m.intercept : m.predict(stacked_delta.subspan(off, n)));
    off += n;
  }
  const ObjectiveValue v = obj.value_and_gradient(letters);
  StackedGradient out;
  out.value = v.value;
  for (std::size_t j = 0; j < models.size(); ++j) {
    const Eigen::VectorXd g = models[j].jacobian.transpose() * v.gradient[j];
    out.gradient.insert(out.gradient.end(), g.data(), g.data() + g.size());
  }
  return out;
}

/// Coverage gradient over all flattened gait parameters.
inline StackedGradient coverage_gradient(std::span<const LocalModel> models, const CoverageSpec& spec) {
  return objective_gradient(coverage_objective(spec), models);
}

// ---------------------------------------------------------------------------
// Optimization state and stepping.
// ---------------------------------------------------------------------------

enum class GradientMode { kDataDriven, kExact };

struct StepPolicy {
  double initial_radius{0.3};
  double min_radius{1e-3};
  double max_radius{1.2};
  int max_shrinks{10};
  double shrink{0.5};
  double expand{2.0};
  /// Keep the old gaits when the simulated objective got worse.
  bool reject_worse{true};
  /// Give every gait a unit-length share of the step instead of normalizing
  /// the stacked gradient; keeps a gait with a small gradient from stalling.
  bool per_gait_normalization{true};
};

struct HistoryEntry {
  int iteration{0};
  double h{0.0};
  std::vector<Pose2> displacements;
  bool accepted{true};
  bool stalled{false};
  double radius{0.0};
  std::string event;  // "init", "step", "lock", "unlock"
};

struct OptState {
  int iteration{0};
  std::vector<GaitParams> gaits;
  std::vector<LockMask> locks;
  double h{0.0};
  std::vector<Pose2> displacements;
  double radius{0.3};
  std::vector<HistoryEntry> history;
  /// Gaits as they were right before the last lock.
  std::optional<std::vector<GaitParams>> prelock_gaits;
  std::optional<int> locked_joint;
};

/// Everything that stays fixed across the iterations of one run.
struct Problem {
  ConnectionModel model{PurcellChain{}};
  LetterObjective objective;
  NoiseConfig noise{};
  StepPolicy policy{};
  GradientMode mode{GradientMode::kDataDriven};
  int cycle_steps{kDefaultCycleSteps};
  double ridge{0.0};
  double fd_step{1e-4};
};

inline std::vector<Pose2> nominal_displacements(const Problem& pr, std::span<const GaitParams> gaits) {
  std::vector<Pose2> d;
  for (const auto& g : gaits) d.push_back(gait_displacement(pr.model, g, pr.cycle_steps));
  return d;
}

/// Objective of the simulated (noise-free) gaits.
inline double evaluate(const Problem& pr, std::span<const GaitParams> gaits, std::vector<Pose2>* displacements = nullptr) {
  const auto d = nominal_displacements(pr, gaits);
  std::vector<Twist2> letters;
  for (const auto& m : d) letters.push_back(log(m));
  if (displacements) *displacements = d;
  return pr.objective.value(letters);
}

inline void record(OptState& s, std::string event, bool accepted = true, bool stalled = false) {
  s.history.push_back({s.iteration, s.h, s.displacements, accepted, stalled, s.radius, std::move(event)});
}

inline OptState make_state(const Problem& pr, std::vector<GaitParams> gaits) {
  OptState s;
  s.gaits = std::move(gaits);
  s.locks.assign(s.gaits.size(), LockMask(s.gaits.empty() ? 0 : s.gaits.front().n_joints()));
  s.radius = pr.policy.initial_radius;
  s.h = evaluate(pr, s.gaits, &s.displacements);
  record(s, "init");
  return s;
}

/// Sine seeds on distinct random joints (repeating when there are fewer joints than gaits).
inline std::vector<GaitParams> sine_seeds(std::size_t n_joints, std::size_t n_gaits, double amplitude, std::uint64_t seed) {
  std::vector<std::size_t> order(n_joints);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(splitmix64(seed ^ 0x5eedULL));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<GaitParams> out;
  for (std::size_t g = 0; g < n_gaits; ++g) out.push_back(seed_gait(n_joints, order[g % n_joints], amplitude));
  return out;
}

inline std::vector<LocalModel> fit_models(const Problem& pr, const OptState& s) {
  std::vector<LocalModel> models;
  if (pr.mode == GradientMode::kExact) {
    for (std::size_t g = 0; g < s.gaits.size(); ++g)
      models.push_back(fit_exact_model(pr.model, s.gaits[g], s.locks[g], pr.fd_step, pr.cycle_steps));
    return models;
  }
  const auto batch = rollout_batch(pr.model, s.gaits, s.locks, pr.noise, static_cast<std::uint64_t>(s.iteration), pr.cycle_steps);
  for (const auto& b : batch) models.push_back(fit_local_model(b, pr.ridge));
  return models;
}

struct StepOutcome {
  OptState state;
  double predicted{0.0};   // model objective at the chosen step
  double predicted0{0.0};  // model objective at zero step
  bool stalled{false};
};

/**
 * One step along -gradient.
 *
 * Backtracks from the trust radius (x0.5, at most max_shrinks times) until
 * the model predicts a decrease; joint ranges are enforced by projection and
 * locked coordinates never move. The new gaits are then simulated and, unless
 * the policy rejects a worse result, adopted. The trust radius grows after
 * good agreement between prediction and simulation and shrinks otherwise.
 */
inline StepOutcome step(const OptState& state, const Problem& pr, std::span<const LocalModel> models,
                        std::span<const double> gradient) {
  StepOutcome out{state, 0.0, 0.0, false};
  OptState& s = out.state;
  ++s.iteration;

  std::vector<bool> frozen;
  for (std::size_t g = 0; g < s.gaits.size(); ++g) {
    const auto f = frozen_coordinates(s.locks[g], s.gaits[g].n_joints());
    frozen.insert(frozen.end(), f.begin(), f.end());
  }
  const auto [lo, hi] = pr.model.shape_limits();
  std::vector<double> dir(gradient.size(), 0.0);
  for (std::size_t i = 0; i < gradient.size(); ++i)
    if (!frozen[i]) dir[i] = -gradient[i];
  double norm = 0.0;
  {
    std::size_t off = 0;
    for (std::size_t g = 0; g < s.gaits.size(); ++g) {
      const std::size_t n = s.gaits[g].n_params();
      double gn = 0.0;
      for (std::size_t i = off; i < off + n; ++i) gn += dir[i] * dir[i];
      if (pr.policy.per_gait_normalization && gn > 0.0)
        for (std::size_t i = off; i < off + n; ++i) dir[i] /= std::sqrt(gn);
      off += n;
    }
    for (double d : dir) norm += d * d;
    norm = std::sqrt(norm);
    if (pr.policy.per_gait_normalization) norm = norm > 0.0 ? 1.0 : 0.0;
  }

  const std::vector<double> zero(gradient.size(), 0.0);
  out.predicted0 = predicted_objective(pr.objective, models, zero);
  out.predicted = out.predicted0;

  std::optional<std::vector<GaitParams>> candidate;
  double used = 0.0;
  if (norm > 0.0 && std::isfinite(norm)) {
    double tau = s.radius;
    for (int shrink = 0; shrink <= pr.policy.max_shrinks; ++shrink, tau *= pr.policy.shrink) {
      std::vector<GaitParams> trial;
      std::vector<double> delta;
      std::size_t off = 0;
      for (std::size_t g = 0; g < s.gaits.size(); ++g) {
        auto v = flatten(s.gaits[g]);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += tau * dir[off + i] / norm;
        auto p = unflatten(v, s.gaits[g].n_joints(), s.gaits[g].omega);
        project_to_range(p, lo, hi, s.locks[g]);
        p = apply_lock(p, s.locks[g]);
        const auto pv = flatten(p);
        const auto base = flatten(s.gaits[g]);
        for (std::size_t i = 0; i < pv.size(); ++i) delta.push_back(pv[i] - base[i]);
        trial.push_back(std::move(p));
        off += v.size();
      }
      const double pred = predicted_objective(pr.objective, models, delta);
      if (pred < out.predicted0) {
        candidate = std::move(trial);
        out.predicted = pred;
        used = tau;
        break;
      }
    }
  }

  if (!candidate) {
    out.stalled = true;
    s.radius = std::max(pr.policy.min_radius, s.radius * pr.policy.shrink);
    record(s, "step", false, true);
    return out;
  }

  std::vector<Pose2> disp;
  const double h_new = evaluate(pr, *candidate, &disp);
  const double actual = s.h - h_new;
  const double expected = out.predicted0 - out.predicted;
  const bool accept = !(pr.policy.reject_worse && !(h_new < s.h));
  if (accept) {
    s.gaits = std::move(*candidate);
    s.h = h_new;
    s.displacements = std::move(disp);
  }
  const double ratio = expected > 0.0 ? actual / expected : -1.0;
  if (!accept || ratio < 0.25)
    s.radius = std::max(pr.policy.min_radius, used * pr.policy.shrink);
  else if (ratio > 0.75 && used >= s.radius * (1.0 - 1e-12))
    s.radius = std::min(pr.policy.max_radius, s.radius * pr.policy.expand);
  record(s, "step", accept, false);
  return out;
}

/// Rollouts, model fit, gradient and step.
inline OptState iterate(const OptState& s, const Problem& pr) {
  const auto models = fit_models(pr, s);
  return step(s, pr, models, objective_gradient(pr.objective, models).gradient).state;
}

inline OptState run_iterations(OptState s, const Problem& pr, int iterations,
                               const std::function<void(const OptState&)>& on_iteration = {}) {
  for (int i = 0; i < iterations; ++i) {
    s = iterate(s, pr);
    if (on_iteration) on_iteration(s);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Injury and recovery.
// ---------------------------------------------------------------------------

/// Joint with the largest peak-to-peak excursion over all gaits.
inline std::size_t max_amplitude_joint(std::span<const GaitParams> gaits) {
  std::size_t best = 0;
  double best_amp = -1.0;
  for (const auto& g : gaits)
    for (std::size_t j = 0; j < g.n_joints(); ++j) {
      const double a = joint_amplitude(g, j);
      if (a > best_amp) {
        best_amp = a;
        best = j;
      }
    }
  return best;
}

/// Lock one joint in every gait at that gait's base-point value and rescore.
inline OptState lock_joint(OptState s, const Problem& pr, std::size_t joint) {
  s.prelock_gaits = s.gaits;
  s.locked_joint = static_cast<int>(joint);
  for (std::size_t g = 0; g < s.gaits.size(); ++g) {
    s.locks[g].resize(s.gaits[g].n_joints());
    s.locks[g][joint] = s.gaits[g].joints[joint].b;
    s.gaits[g] = apply_lock(s.gaits[g], s.locks[g]);
  }
  s.h = evaluate(pr, s.gaits, &s.displacements);
  record(s, "lock");
  return s;
}

/// Undo the last lock, restoring the gaits saved when it was applied.
inline OptState unlock(OptState s, const Problem& pr) {
  if (!s.prelock_gaits) return s;
  s.gaits = *s.prelock_gaits;
  s.prelock_gaits.reset();
  s.locked_joint.reset();
  for (auto& l : s.locks) std::fill(l.begin(), l.end(), std::nullopt);
  s.h = evaluate(pr, s.gaits, &s.displacements);
  record(s, "unlock");
  return s;
}

/// Lock the highest-amplitude joint and keep optimizing with it frozen.
inline OptState run_recovery(const OptState& s, const Problem& pr, int iterations = 30,
                             const std::function<void(const OptState&)>& on_iteration = {}) {
  OptState damaged = lock_joint(s, pr, max_amplitude_joint(s.gaits));
  if (on_iteration) on_iteration(damaged);
  return run_iterations(std::move(damaged), pr, iterations, on_iteration);
}

}  // namespace gaitcov

#endif  // GAITCOV_OPTIMIZER_HPP_
