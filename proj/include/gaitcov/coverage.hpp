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

#ifndef GAITCOV_COVERAGE_HPP_
#define GAITCOV_COVERAGE_HPP_

/**
 * @file
 * @brief Goal sets, word enumeration over a motion library, and the coverage cost.
 *
 * A word is a finite sequence of library letters; its net motion is the
 * left-to-right group product of the letters. The coverage cost of a set of
 * motions is the weighted mean over goals of the distance from each goal to
 * its nearest motion. h_k evaluates it over every word of length 0..k.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gaitcov/errors.hpp"
#include "gaitcov/liegroup.hpp"

namespace gaitcov {

/// Weighted goal motions. Weights are normalized to sum to one on construction.
class GoalSet {
 public:
  GoalSet() = default;

  GoalSet(std::vector<Pose2> goals, std::vector<double> weights) : goals_(std::move(goals)), weights_(std::move(weights)) {
    if (goals_.size() != weights_.size()) throw InvalidInput("GoalSet: goals and weights differ in length");
    if (goals_.empty()) throw InvalidInput("GoalSet: no goals");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("GoalSet: weights must be positive and finite");
      total += w;
    }
    for (double& w : weights_) w /= total;
    for (auto& g : goals_) g.theta = normalize_angle(g.theta);
  }

  /// Equal weights.
  explicit GoalSet(std::vector<Pose2> goals) : GoalSet(goals, std::vector<double>(goals.size(), 1.0)) {}

  const std::vector<Pose2>& goals() const { return goals_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return goals_.size(); }

 private:
  std::vector<Pose2> goals_;
  std::vector<double> weights_;
};

/// Cartesian product of coordinate values, equally weighted.
inline GoalSet make_uniform_grid(std::span<const double> x_vals, std::span<const double> y_vals,
                                 std::span<const double> theta_vals, double weight = 1.0) {
  if (x_vals.empty() || y_vals.empty() || theta_vals.empty()) throw InvalidInput("make_uniform_grid: empty value list");
  std::vector<Pose2> goals;
  goals.reserve(x_vals.size() * y_vals.size() * theta_vals.size());
  for (double x : x_vals)
    for (double y : y_vals)
      for (double t : theta_vals) goals.push_back({x, y, t});
  return GoalSet(std::move(goals), std::vector<double>(x_vals.size() * y_vals.size() * theta_vals.size(), weight));
}

/// The 125-point grid spanning one body length and half a turn.
inline GoalSet standard_grid() {
  const double xy[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double th[] = {-kPi, -kPi / 2, 0.0, kPi / 2, kPi};
  return make_uniform_grid(xy, xy, th);
}

/// The 125-point grid used on hardware, with rotations out to a quarter turn.
inline GoalSet quarter_turn_grid() {
  const double xy[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double th[] = {-kPi / 2, -kPi / 4, 0.0, kPi / 4, kPi / 2};
  return make_uniform_grid(xy, xy, th);
}

/// Achievable motions. With include_inverses the alphabet is letters followed by their inverses.
struct Library {
  std::vector<Pose2> letters;
  std::vector<std::string> labels;
  bool include_inverses{false};

  std::size_t alphabet_size() const { return letters.size() * (include_inverses ? 2 : 1); }

  std::vector<Pose2> alphabet() const {
    std::vector<Pose2> a = letters;
    if (include_inverses)
      for (const auto& m : letters) a.push_back(inverse(m));
    return a;
  }

  std::vector<std::string> alphabet_labels() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < letters.size(); ++i)
      out.push_back(i < labels.size() && !labels[i].empty() ? labels[i] : "L" + std::to_string(i));
    if (include_inverses) {
      const std::size_t n = out.size();
      for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] + "'");
    }
    return out;
  }
};

struct Word {
  std::vector<int> letter_indices;
  Pose2 net_motion;
};

struct GoalMatch {
  Word word;
  double distance{0.0};
};

struct CoverageReport {
  double h{0.0};
  std::vector<GoalMatch> per_goal;
  int k{0};
  std::size_t alphabet_size{0};
};

struct WordLimits {
  /// Enumeration refuses to build more words than this.
  std::uint64_t hard_cap{10'000'000};
  /// Drop words whose net motion repeats an earlier one (cells of size dedup_tol).
  bool dedup{false};
  double dedup_tol{1e-9};
};

inline constexpr std::uint64_t kWordWarnThreshold = 10'000'000;

/// Number of words of length 0..k over an alphabet; saturates at uint64 max.
inline std::uint64_t word_count(std::size_t alphabet, int k) {
  std::uint64_t total = 0, level = 1;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (int l = 0; l <= k; ++l) {
    if (total > kMax - level) return kMax;
    total += level;
    if (l < k) {
      if (alphabet != 0 && level > kMax / alphabet) return kMax;
      level *= alphabet;
    }
  }
  return total;
}

/**
 * @brief Every word of length 0..k in canonical order with its net motion.
 *
 * Canonical order is length-major, then lexicographic in letter indices. Words
 * are stored as a prefix tree: entry i is its parent's word followed by one
 * letter, so a word is recovered by walking parents.
 */
class WordSet {
 public:
  WordSet(std::vector<Pose2> alphabet, int k, const WordLimits& limits = {}) : alphabet_(std::move(alphabet)), k_(k) {
    if (k < 0) throw InvalidInput("word depth k must be non-negative");
    const std::uint64_t count = word_count(alphabet_.size(), k);
    if (count > limits.hard_cap)
      throw InvalidInput("word enumeration would produce " + std::to_string(count) + " words, above the cap of " +
                         std::to_string(limits.hard_cap));
    if (count > kWordWarnThreshold) warn_once("enumerating more than 1e7 words; this will be slow");

    motions_.reserve(count);
    parent_.reserve(count);
    last_.reserve(count);
    length_.reserve(count);
    motions_.push_back(Pose2::identity());
    parent_.push_back(-1);
    last_.push_back(-1);
    length_.push_back(0);

    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, int> seen;
    auto key = [&](const Pose2& g) {
      return std::make_tuple(static_cast<std::int64_t>(std::llround(g.x / limits.dedup_tol)),
                             static_cast<std::int64_t>(std::llround(g.y / limits.dedup_tol)),
                             static_cast<std::int64_t>(std::llround(g.theta / limits.dedup_tol)));
    };
    if (limits.dedup) seen.emplace(key(motions_[0]), 0);

    std::size_t level_begin = 0, level_end = 1;
    for (int len = 1; len <= k; ++len) {
      for (std::size_t p = level_begin; p < level_end; ++p) {
        for (std::size_t a = 0; a < alphabet_.size(); ++a) {
          const Pose2 m = compose(motions_[p], alphabet_[a]);
          if (limits.dedup && !seen.emplace(key(m), static_cast<int>(motions_.size())).second) continue;
          motions_.push_back(m);
          parent_.push_back(static_cast<int>(p));
          last_.push_back(static_cast<int>(a));
          length_.push_back(len);
        }
      }
      level_begin = level_end;
      level_end = motions_.size();
    }
  }

  std::size_t size() const { return motions_.size(); }
  int depth() const { return k_; }
  const std::vector<Pose2>& alphabet() const { return alphabet_; }
  const std::vector<Pose2>& motions() const { return motions_; }
  int length(std::size_t i) const { return length_[i]; }
  int parent(std::size_t i) const { return parent_[i]; }
  int last_letter(std::size_t i) const { return last_[i]; }

  std::vector<int> letters(std::size_t i) const {
    std::vector<int> out(static_cast<std::size_t>(length_[i]));
    for (int n = static_cast<int>(i), pos = length_[i] - 1; n > 0; n = parent_[n], --pos) out[pos] = last_[n];
    return out;
  }

  Word word(std::size_t i) const { return {letters(i), motions_[i]}; }

 private:
  std::vector<Pose2> alphabet_;
  int k_;
  std::vector<Pose2> motions_;
  std::vector<int> parent_;
  std::vector<int> last_;
  std::vector<int> length_;
};

inline std::vector<Word> enumerate_words(const Library& lib, int k, const WordLimits& limits = {}) {
  const WordSet ws(lib.alphabet(), k, limits);
  std::vector<Word> out;
  out.reserve(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) out.push_back(ws.word(i));
  return out;
}

namespace detail {

struct Match {
  std::size_t index;
  double distance;
};

// Nearest motion for every goal. The first motion attaining the minimum wins,
// so callers passing motions in canonical word order get the shortest, then
// lexicographically first, word.
inline std::vector<Match> nearest_motions(std::span<const Pose2> motions, const GoalSet& goals, double rot_weight) {
  if (motions.empty()) throw InvalidInput("coverage_cost: empty motion list");
  if (!(rot_weight > 0.0)) throw InvalidConfiguration("rot_weight must be positive");
  struct Prepared {
    double x, y, theta, c, s;
  };
  std::vector<Prepared> prep;
  prep.reserve(motions.size());
  for (const auto& m : motions) prep.push_back({m.x, m.y, m.theta, std::cos(m.theta), std::sin(m.theta)});

  const double rw2 = rot_weight * rot_weight;
  std::vector<Match> out;
  out.reserve(goals.size());
  for (const auto& goal : goals.goals()) {
    const Pose2 ginv = inverse(goal);
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prep.size(); ++j) {
      const auto& m = prep[j];
      // eta(log(m * ginv)); V^-1 is a scaled rotation so |V^-1 t|^2 = (d^2 + h^2) |t|^2.
      const double tx = m.x + m.c * ginv.x - m.s * ginv.y;
      const double ty = m.y + m.s * ginv.x + m.c * ginv.y;
      const double w = normalize_angle(m.theta + ginv.theta);
      const double d = detail::half_cot(w);
      const double h = 0.5 * w;
      const double sq = (d * d + h * h) * (tx * tx + ty * ty) + rw2 * w * w;
      if (sq < best_sq) {
        best_sq = sq;
        best = j;
      }
    }
    out.push_back({best, std::sqrt(best_sq)});
  }
  return out;
}

}  // namespace detail

/// Coverage cost of an explicit motion set; per-goal words hold the motion index.
inline CoverageReport coverage_cost(std::span<const Pose2> motions, const GoalSet& goals,
                                    double rot_weight = kDefaultRotWeight) {
  const auto matches = detail::nearest_motions(motions, goals, rot_weight);
  CoverageReport report;
  report.k = 1;
  report.alphabet_size = motions.size();
  for (std::size_t i = 0; i < matches.size(); ++i) {
    report.h += goals.weights()[i] * matches[i].distance;
    report.per_goal.push_back({Word{{static_cast<int>(matches[i].index)}, motions[matches[i].index]}, matches[i].distance});
  }
  return report;
}

/// h_k over a prebuilt word set.
inline CoverageReport coverage_cost_k(const WordSet& words, const GoalSet& goals, double rot_weight = kDefaultRotWeight) {
  const auto matches = detail::nearest_motions(words.motions(), goals, rot_weight);
  CoverageReport report;
  report.k = words.depth();
  report.alphabet_size = words.alphabet().size();
  for (std::size_t i = 0; i < matches.size(); ++i) {
    report.h += goals.weights()[i] * matches[i].distance;
    report.per_goal.push_back({words.word(matches[i].index), matches[i].distance});
  }
  return report;
}

inline CoverageReport coverage_cost_k(const Library& lib, int k, const GoalSet& goals,
                                      double rot_weight = kDefaultRotWeight, const WordLimits& limits = {}) {
  return coverage_cost_k(WordSet(lib.alphabet(), k, limits), goals, rot_weight);
}

/// Scalar h_k only, skipping report assembly.
inline double coverage_h(const WordSet& words, const GoalSet& goals, double rot_weight = kDefaultRotWeight) {
  const auto matches = detail::nearest_motions(words.motions(), goals, rot_weight);
  double h = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i) h += goals.weights()[i] * matches[i].distance;
  return h;
}

struct ReachableEntry {
  int length;
  Pose2 pose;
  std::string label;
};

/// Net motions of all words up to length k, for plotting reachable sets.
inline std::vector<ReachableEntry> reachable_set(const Library& lib, int k, const WordLimits& limits = {}) {
  const WordSet ws(lib.alphabet(), k, limits);
  const auto names = lib.alphabet_labels();
  std::vector<ReachableEntry> out;
  out.reserve(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    std::string label;
    for (int a : ws.letters(i)) label += (label.empty() ? "" : ".") + names[static_cast<std::size_t>(a)];
    out.push_back({ws.length(i), ws.motions()[i], label.empty() ? "I" : label});
  }
  return out;
}

}  // namespace gaitcov

#endif  // GAITCOV_COVERAGE_HPP_
