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

#include <cmath>
#include <random>
#include <set>

#include "gaitcov/dynamics.hpp"
#include "gaitcov/gait.hpp"
#include "gaitcov/optimizer.hpp"

namespace gaitcov {
namespace {

GaitParams random_params(std::mt19937_64& rng, std::size_t n, double scale = 0.3) {
  std::uniform_real_distribution<double> u(-scale, scale);
  GaitParams p(n);
  for (auto& j : p.joints) {
    j.c = u(rng);
    j.b = u(rng);
    j.a = u(rng);
    for (auto& w : j.u) w = 0.5 * u(rng);
  }
  return p;
}

// Phases at least `margin` away from every bump-support edge.
bool away_from_edges(double phi, double margin) {
  for (double e : bump_edges())
    if (std::abs(phi - e) < margin) return false;
  return true;
}

TEST(Gait, BaseAtPhaseZero) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const GaitParams p = random_params(rng, 4, 2.0);
    const auto s = eval_gait(p, 0.0);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(s.r[i], p.joints[i].b);
  }
}

TEST(Gait, ConstantGait) {
  GaitParams p(2);
  p.joints[0].c = p.joints[0].b = 0.4;
  p.joints[1].c = p.joints[1].b = -0.1;
  for (double phi : {0.0, 0.7, 3.0, 6.0}) {
    const auto s = eval_gait(p, phi);
    EXPECT_NEAR(s.r[0], 0.4, 1e-15);
    EXPECT_NEAR(s.r[1], -0.1, 1e-15);
    EXPECT_EQ(s.drdphi[0], 0.0);
    EXPECT_EQ(s.drdphi[1], 0.0);
  }
}

TEST(Gait, BumpShape) {
  EXPECT_DOUBLE_EQ(bump(0.0), 2.0);
  EXPECT_DOUBLE_EQ(kBumpHalfWidth, kPi / 54);
  EXPECT_EQ(bump(kPi / 54), 0.0);
  EXPECT_EQ(bump(-kPi / 54), 0.0);
  EXPECT_EQ(bump(0.2), 0.0);
  EXPECT_GT(bump(kPi / 54 * 0.999), 0.0);
  // Sixteen bumps, none touching phase zero.
  const auto edges = bump_edges();
  ASSERT_EQ(edges.size(), 32u);
  EXPECT_GT(edges.front(), 0.0);
  EXPECT_LT(edges.back(), 2 * kPi);
  EXPECT_TRUE(std::is_sorted(edges.begin(), edges.end()));
}

TEST(Gait, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  const double h = 1e-6;
  for (int t = 0; t < 50; ++t) {
    const GaitParams p = random_params(rng, 3);
    for (int s = 0; s < 20; ++s) {
      const double phi = ph(rng);
      if (!away_from_edges(phi, 1e-4) || phi < 1e-4 || phi > 2 * kPi - 1e-4) continue;
      const auto s0 = eval_gait(p, phi), sp = eval_gait(p, phi + h), sm = eval_gait(p, phi - h);
      for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s0.drdphi[i], (sp.r[i] - sm.r[i]) / (2 * h), 1e-6);
    }
  }
}

TEST(Gait, PeriodicAndContinuous) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const GaitParams p = random_params(rng, 3);
    const auto a = eval_gait(p, 0.0), b = eval_gait(p, std::nextafter(2 * kPi, 0.0));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.r[i], b.r[i], 1e-12);
    // Continuous across every bump edge.
    for (double e : bump_edges()) {
      const auto l = eval_gait(p, e - 1e-12), r = eval_gait(p, e + 1e-12);
      for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(l.r[i], r.r[i], 1e-10);
    }
  }
}

TEST(Gait, FlattenRoundTrip) {
  std::mt19937_64 rng(4);
  const GaitParams p = random_params(rng, 3);
  const auto v = flatten(p);
  ASSERT_EQ(v.size(), 57u);
  EXPECT_EQ(v[0], p.joints[0].c);
  EXPECT_EQ(v[1], p.joints[0].b);
  EXPECT_EQ(v[2], p.joints[0].a);
  EXPECT_EQ(v[3], p.joints[0].u[0]);
  EXPECT_EQ(v[19], p.joints[1].c);
  const GaitParams q = unflatten(v, 3, p.omega);
  EXPECT_EQ(p, q);
  std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
  for (int s = 0; s < 100; ++s) {
    const double phi = ph(rng);
    EXPECT_EQ(eval_gait(p, phi).r, eval_gait(q, phi).r);
  }
  EXPECT_THROW(unflatten(std::vector<double>(20)), InvalidInput);
  EXPECT_THROW(unflatten(v, 2, 1.0), InvalidInput);
}

TEST(Gait, Locking) {
  std::mt19937_64 rng(5);
  const GaitParams p = random_params(rng, 3);
  LockMask mask(3);
  mask[0] = 0.5;
  const GaitParams l = apply_lock(p, mask);
  for (double phi : {0.0, 0.3, 1.9, 4.4, 6.2}) {
    const auto s = eval_gait(l, phi);
    EXPECT_NEAR(s.r[0], 0.5, 1e-15);
    EXPECT_EQ(s.drdphi[0], 0.0);
    EXPECT_EQ(s.r[1], eval_gait(p, phi).r[1]);
  }
  // Locking at the base value leaves r(0) unchanged.
  LockMask at_base(3);
  at_base[2] = p.joints[2].b;
  EXPECT_EQ(eval_gait(apply_lock(p, at_base), 0.0).r, eval_gait(p, 0.0).r);
  // Everything locked: no shape change, no motion.
  const LockMask all{0.1, -0.2, 0.3};
  const Pose2 d = gait_displacement(ConnectionModel{PurcellChain{.n_joints = 3}}, apply_lock(p, all), 128);
  EXPECT_EQ(d, Pose2::identity());
  const auto frozen = frozen_coordinates(mask, 3);
  EXPECT_EQ(std::count(frozen.begin(), frozen.end(), true), kParamsPerJoint);
  EXPECT_TRUE(frozen[0] && frozen[18] && !frozen[19]);
}

TEST(Gait, Amplitude) {
  GaitParams p(2);
  p.joints[0].a = 1.0;
  EXPECT_NEAR(joint_amplitude(p, 0), 2.0, 1e-3);
  EXPECT_EQ(joint_amplitude(p, 1), 0.0);
  GaitParams q(1);
  q.joints[0].u[6] = 0.3;
  EXPECT_NEAR(joint_amplitude(q, 0), 0.6, 1e-3);
  EXPECT_THROW(joint_amplitude(q, 1), InvalidInput);
}

TEST(Gait, SeedGait) {
  const GaitParams p = seed_gait(3, 1, 0.5);
  for (double phi : {0.0, 0.4, 2.0, 5.5}) {
    const auto s = eval_gait(p, phi);
    EXPECT_NEAR(s.r[1], 0.5 * std::sin(phi), 1e-15);
    EXPECT_EQ(s.r[0], 0.0);
    EXPECT_EQ(s.r[2], 0.0);
  }
  EXPECT_NEAR(joint_amplitude(p, 1), 1.0, 1e-3);
  EXPECT_THROW(seed_gait(3, 3, 0.5), InvalidInput);
  EXPECT_THROW(seed_gait(3, 0, 0.0), InvalidInput);
}

TEST(Gait, SineSeedsUseDistinctJoints) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto gaits = sine_seeds(4, 3, 0.8, seed);
    ASSERT_EQ(gaits.size(), 3u);
    std::set<std::size_t> used;
    for (const auto& g : gaits) used.insert(max_amplitude_joint(std::vector<GaitParams>{g}));
    EXPECT_EQ(used.size(), 3u);
    // A two-joint swimmer has to repeat one.
    const auto two = sine_seeds(2, 3, 0.8, seed);
    std::set<std::size_t> used2;
    for (const auto& g : two) used2.insert(max_amplitude_joint(std::vector<GaitParams>{g}));
    EXPECT_EQ(used2.size(), 2u);
  }
  EXPECT_EQ(flatten(sine_seeds(5, 3, 0.8, 7)[0]), flatten(sine_seeds(5, 3, 0.8, 7)[0]));
}

TEST(Gait, OmegaOnlyPaces) {
  std::mt19937_64 rng(6);
  GaitParams p = random_params(rng, 3);
  const ConnectionModel model{PurcellChain{.n_joints = 3}};
  const Pose2 d1 = gait_displacement(model, p, 256);
  p.omega = 4.5;
  const Pose2 d2 = gait_displacement(model, p, 256);
  EXPECT_LT(eta(log(compose(d1, inverse(d2)))), 1e-12);
}

// Bumps are only C1; stepping onto their support edges keeps the integrator accurate.
TEST(Gait, BumpGaitIntegratesAccurately) {
  GaitParams p(2);
  p.joints[0].a = 0.4;
  p.joints[1].c = 0.1;
  p.joints[1].b = -0.2;
  for (int k = 0; k < kBumpCount; ++k) {
    p.joints[0].u[static_cast<std::size_t>(k)] = 0.15 * std::sin(k);
    p.joints[1].u[static_cast<std::size_t>(k)] = 0.1 * std::cos(2 * k);
  }
  const ConnectionModel model{PurcellChain{.n_joints = 2}};
  const Pose2 ref = gait_displacement(model, p, 8192);
  EXPECT_LT(eta(log(compose(gait_displacement(model, p, 512), inverse(ref)))), 1e-7);
  // Reversal still inverts exactly with bumps present.
  const Pose2 f = integrate_cycle(model, as_function(p), 512).displacement;
  const Pose2 b = integrate_cycle(model, reversed(as_function(p)), 512).displacement;
  EXPECT_LT(eta(log(compose(f, b))), 1e-10);
}

// ---------------------------------------------------------------------------
// Projection onto joint limits.
// ---------------------------------------------------------------------------

bool feasible(const GaitParams& p, double lo, double hi, double tol = 1e-9) {
  for (const auto& j : p.joints) {
    const auto [a, b] = joint_range(j);
    if (a < lo - tol || b > hi + tol) return false;
  }
  return true;
}

double sq_dist(const GaitParams& a, const GaitParams& b) {
  const auto x = flatten(a), y = flatten(b);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

TEST(Projection, FeasibleInputUnchanged) {
  std::mt19937_64 rng(7);
  const GaitParams p = random_params(rng, 3, 0.2);
  ASSERT_TRUE(feasible(p, -kPi / 2, kPi / 2));
  GaitParams q = p;
  project_to_range(q, -kPi / 2, kPi / 2);
  EXPECT_LT(sq_dist(p, q), 1e-24);
}

TEST(Projection, NearestFeasiblePoint) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  const double lo = -kPi / 2, hi = kPi / 2;
  for (int t = 0; t < 10; ++t) {
    const GaitParams target = random_params(rng, 2, 2.5);
    GaitParams proj = target;
    project_to_range(proj, lo, hi);
    ASSERT_TRUE(feasible(proj, lo, hi));
    const double d0 = sq_dist(target, proj);
    // No feasible point nearby is closer to the target.
    for (int s = 0; s < 200; ++s) {
      auto v = flatten(proj);
      for (auto& x : v) x += 1e-3 * n(rng);
      const GaitParams cand = unflatten(v, 2, 1.0);
      if (feasible(cand, lo, hi, 0.0)) {
        EXPECT_GE(sq_dist(target, cand), d0 - 1e-12);
      }
    }
    // Along the segment to the target the point stops being feasible.
    auto toward = flatten(proj);
    const auto tv = flatten(target);
    for (std::size_t i = 0; i < toward.size(); ++i) toward[i] += 1e-3 * (tv[i] - toward[i]);
    if (d0 > 1e-8) {
      EXPECT_FALSE(feasible(unflatten(toward, 2, 1.0), lo, hi, 1e-12));
    }
  }
}

TEST(Projection, RespectsLocksAndRanges) {
  GaitParams p(2);
  p.joints[0].a = 3.0;
  p.joints[1].a = 3.0;
  LockMask mask(2);
  mask[1] = 0.0;
  project_to_range(p, -1.0, 1.0, mask);
  EXPECT_EQ(p.joints[1].a, 3.0);
  EXPECT_NEAR(joint_amplitude(p, 0), 2.0, 1e-6);
  // Ranges that exclude zero, as for the two-slider.
  GaitParams s(1);
  s.joints[0].a = 0.5;
  project_to_range(s, 0.05, 3.0);
  EXPECT_TRUE(feasible(s, 0.05, 3.0));
  EXPECT_THROW(project_to_range(s, 1.0, 1.0), InvalidInput);
}

}  // namespace
}  // namespace gaitcov
