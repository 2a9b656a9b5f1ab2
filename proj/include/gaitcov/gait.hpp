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

#ifndef GAITCOV_GAIT_HPP_
#define GAITCOV_GAIT_HPP_

/**
 * @file
 * @brief Ellipse-with-bumps gait parametrization, joint locking, amplitudes.
 *
 * Joint i follows, in phase phi = Omega t,
 *
 *   r_i(phi) = c_i + (b_i - c_i) cos(phi) + a_i sin(phi) + sum_k u_{i,k} w(phi - 2 pi k / No)
 *   w(x)     = 1 + cos(x f No)   for |x f No| < pi, else 0
 *
 * with No = 18, f = 3 and bumps k = 1..16. The bumps centred on 0 and 2pi
 * are omitted, so r_i(0) = b_i exactly.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaitcov/errors.hpp"
#include "gaitcov/liegroup.hpp"

namespace gaitcov {

inline constexpr int kHarmonicOrder = 18;  // No
inline constexpr int kBumpFrequency = 3;   // f
inline constexpr int kBumpCount = 16;
inline constexpr int kParamsPerJoint = 3 + kBumpCount;
inline constexpr int kAmplitudeSamples = 512;

struct JointParams {
  double c{0.0};  // ellipse center
  double b{0.0};  // base point, r(0)
  double a{0.0};  // sine amplitude
  std::array<double, kBumpCount> u{};  // u[k-1] weights the bump centred at 2 pi k / No

  bool operator==(const JointParams&) const = default;
};

struct GaitParams {
  std::vector<JointParams> joints;
  /// Cycle rate in rad per unit time; only affects pacing, never displacement.
  double omega{1.0};

  GaitParams() = default;
  explicit GaitParams(std::size_t n_joints) : joints(n_joints) {}

  std::size_t n_joints() const { return joints.size(); }
  std::size_t n_params() const { return joints.size() * kParamsPerJoint; }
  bool operator==(const GaitParams&) const = default;
};

/// Per joint: nullopt when free, otherwise the angle it is held at.
using LockMask = std::vector<std::optional<double>>;

/// Phase of the centre of bump k (1-based).
inline double bump_center(int k) { return 2.0 * kPi * k / kHarmonicOrder; }

inline double bump(double x) {
  const double s = x * kBumpFrequency * kHarmonicOrder;
  return std::abs(s) < kPi ? 1.0 + std::cos(s) : 0.0;
}

inline double bump_derivative(double x) {
  const double s = x * kBumpFrequency * kHarmonicOrder;
  return std::abs(s) < kPi ? -kBumpFrequency * kHarmonicOrder * std::sin(s) : 0.0;
}

/// Half-width of a bump's support, pi / (f No).
inline constexpr double kBumpHalfWidth = kPi / (kBumpFrequency * kHarmonicOrder);

inline double wrap_phase(double phi) {
  if (phi >= 0.0 && phi < 2.0 * kPi) return phi;
  double p = std::fmod(phi, 2.0 * kPi);
  if (p < 0.0) p += 2.0 * kPi;
  if (p >= 2.0 * kPi) p = 0.0;
  return p;
}

/// Shape and its phase derivative for one joint.
inline std::pair<double, double> eval_joint(const JointParams& j, double phi) {
  phi = wrap_phase(phi);
  const double c = std::cos(phi), s = std::sin(phi);
  // Written so that phi = 0 gives exactly b.
  double r = j.c * (1.0 - c) + j.b * c + j.a * s;
  double dr = -(j.b - j.c) * s + j.a * c;
  // Supports are disjoint, so at most one bump is active.
  const int k = static_cast<int>(std::lround(phi / (2.0 * kPi / kHarmonicOrder)));
  if (k >= 1 && k <= kBumpCount) {
    const double x = phi - bump_center(k);
    r += j.u[k - 1] * bump(x);
    dr += j.u[k - 1] * bump_derivative(x);
  }
  return {r, dr};
}

inline void eval_gait(const GaitParams& p, double phi, std::span<double> r, std::span<double> drdphi) {
  for (std::size_t i = 0; i < p.joints.size(); ++i) {
    const auto [ri, di] = eval_joint(p.joints[i], phi);
    r[i] = ri;
    drdphi[i] = di;
  }
}

struct GaitSample {
  std::vector<double> r;
  std::vector<double> drdphi;
};

inline GaitSample eval_gait(const GaitParams& p, double phi) {
  GaitSample s{std::vector<double>(p.n_joints()), std::vector<double>(p.n_joints())};
  eval_gait(p, phi, s.r, s.drdphi);
  return s;
}

/// A periodic shape loop r(phi), phi in [0, 2pi), with its phase derivative.
struct GaitFunction {
  std::size_t dim{0};
  std::function<void(double phi, std::span<double> r, std::span<double> drdphi)> eval;
  /// Sorted phases in (0, 2pi) where r is not smooth; integrators step onto them, never across.
  std::vector<double> breakpoints{};

  GaitSample operator()(double phi) const {
    GaitSample s{std::vector<double>(dim), std::vector<double>(dim)};
    eval(phi, s.r, s.drdphi);
    return s;
  }
};

/// Edges of every bump support, in increasing order.
inline std::vector<double> bump_edges() {
  std::vector<double> e;
  for (int k = 1; k <= kBumpCount; ++k) {
    e.push_back(bump_center(k) - kBumpHalfWidth);
    e.push_back(bump_center(k) + kBumpHalfWidth);
  }
  return e;
}

inline GaitFunction as_function(GaitParams p) {
  const std::size_t n = p.n_joints();
  bool has_bumps = false;
  for (const auto& j : p.joints)
    for (double u : j.u) has_bumps = has_bumps || u != 0.0;
  return {n, [p = std::move(p)](double phi, std::span<double> r, std::span<double> dr) { eval_gait(p, phi, r, dr); },
          has_bumps ? bump_edges() : std::vector<double>{}};
}

/// The same loop traversed backward: r(2pi - phi).
inline GaitFunction reversed(GaitFunction g) {
  const std::size_t n = g.dim;
  std::vector<double> bp;
  for (auto it = g.breakpoints.rbegin(); it != g.breakpoints.rend(); ++it) bp.push_back(2.0 * kPi - *it);
  return {n,
          [g = std::move(g)](double phi, std::span<double> r, std::span<double> dr) {
            g.eval(wrap_phase(2.0 * kPi - wrap_phase(phi)), r, dr);
            for (auto& d : dr) d = -d;
          },
          std::move(bp)};
}

// ---------------------------------------------------------------------------
// Flattening: per joint (c, b, a, u_1..u_16), joints in order.
// ---------------------------------------------------------------------------

inline std::vector<double> flatten(const GaitParams& p) {
  std::vector<double> v;
  v.reserve(p.n_params());
  for (const auto& j : p.joints) {
    v.push_back(j.c);
    v.push_back(j.b);
    v.push_back(j.a);
    v.insert(v.end(), j.u.begin(), j.u.end());
  }
  return v;
}

inline GaitParams unflatten(std::span<const double> v, double omega = 1.0) {
  if (v.size() % kParamsPerJoint != 0)
    throw InvalidInput("unflatten: length " + std::to_string(v.size()) + " is not a multiple of " +
                       std::to_string(kParamsPerJoint));
  GaitParams p(v.size() / kParamsPerJoint);
  p.omega = omega;
  for (std::size_t i = 0; i < p.joints.size(); ++i) {
    const double* q = v.data() + i * kParamsPerJoint;
    p.joints[i].c = q[0];
    p.joints[i].b = q[1];
    p.joints[i].a = q[2];
    std::copy(q + 3, q + kParamsPerJoint, p.joints[i].u.begin());
  }
  return p;
}

inline GaitParams unflatten(std::span<const double> v, std::size_t expected_joints, double omega) {
  if (v.size() != expected_joints * kParamsPerJoint)
    throw InvalidInput("unflatten: expected " + std::to_string(expected_joints * kParamsPerJoint) + " values, got " +
                       std::to_string(v.size()));
  return unflatten(v, omega);
}

// ---------------------------------------------------------------------------
// Locking and amplitude.
// ---------------------------------------------------------------------------

inline GaitParams apply_lock(GaitParams p, const LockMask& mask) {
  for (std::size_t i = 0; i < p.joints.size() && i < mask.size(); ++i) {
    if (!mask[i]) continue;
    auto& j = p.joints[i];
    j.c = j.b = *mask[i];
    j.a = 0.0;
    j.u.fill(0.0);
  }
  return p;
}

/// Mask with every flattened coordinate of a locked joint marked frozen.
inline std::vector<bool> frozen_coordinates(const LockMask& mask, std::size_t n_joints) {
  std::vector<bool> frozen(n_joints * kParamsPerJoint, false);
  for (std::size_t i = 0; i < n_joints && i < mask.size(); ++i)
    if (mask[i]) std::fill_n(frozen.begin() + static_cast<long>(i * kParamsPerJoint), kParamsPerJoint, true);
  return frozen;
}

/// Sample phases for extrema: a uniform grid plus every bump centre.
inline std::vector<double> extremum_phases() {
  std::vector<double> phis;
  phis.reserve(kAmplitudeSamples + kBumpCount);
  for (int s = 0; s < kAmplitudeSamples; ++s) phis.push_back(2.0 * kPi * s / kAmplitudeSamples);
  for (int k = 1; k <= kBumpCount; ++k) phis.push_back(bump_center(k));
  return phis;
}

inline std::pair<double, double> joint_range(const JointParams& j) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double phi : extremum_phases()) {
    const double r = eval_joint(j, phi).first;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

/// Peak-to-peak excursion of one joint over a cycle.
inline double joint_amplitude(const GaitParams& p, std::size_t joint) {
  if (joint >= p.n_joints()) throw InvalidInput("joint_amplitude: joint index out of range");
  const auto [lo, hi] = joint_range(p.joints[joint]);
  return hi - lo;
}

/// Single-joint sine: r_joint = amplitude sin(phi), every other coefficient zero.
inline GaitParams seed_gait(std::size_t n_joints, std::size_t joint, double amplitude) {
  if (joint >= n_joints) throw InvalidInput("seed_gait: joint index out of range");
  if (!(amplitude > 0.0)) throw InvalidInput("seed_gait: amplitude must be positive");
  GaitParams p(n_joints);
  p.joints[joint].a = amplitude;
  return p;
}

namespace detail {

/// Row of r(phi) as a linear function of (c, b, a, u1..u16).
inline Eigen::Matrix<double, 1, kParamsPerJoint> joint_row(double phi) {
  Eigen::Matrix<double, 1, kParamsPerJoint> row = Eigen::Matrix<double, 1, kParamsPerJoint>::Zero();
  JointParams unit;
  for (int i = 0; i < kParamsPerJoint; ++i) {
    JointParams e = unit;
    if (i == 0) e.c = 1.0;
    else if (i == 1) e.b = 1.0;
    else if (i == 2) e.a = 1.0;
    else e.u[static_cast<std::size_t>(i - 3)] = 1.0;
    row(i) = eval_joint(e, phi).first;
  }
  return row;
}

inline Eigen::Matrix<double, kParamsPerJoint, 1> joint_vector(const JointParams& j) {
  Eigen::Matrix<double, kParamsPerJoint, 1> v;
  v(0) = j.c;
  v(1) = j.b;
  v(2) = j.a;
  for (int k = 0; k < kBumpCount; ++k) v(3 + k) = j.u[static_cast<std::size_t>(k)];
  return v;
}

inline JointParams joint_from_vector(const Eigen::Matrix<double, kParamsPerJoint, 1>& v) {
  JointParams j;
  j.c = v(0);
  j.b = v(1);
  j.a = v(2);
  for (int k = 0; k < kBumpCount; ++k) j.u[static_cast<std::size_t>(k)] = v(3 + k);
  return j;
}

/// Feasible but not nearest: clamp c, then shrink the oscillation about c.
inline JointParams scale_into_range(JointParams j, double lo, double hi) {
  j.c = std::clamp(j.c, lo, hi);
  const auto [rmin, rmax] = joint_range(j);
  if (rmin >= lo && rmax <= hi) return j;
  double scale = 1.0;
  if (rmax > hi) scale = std::min(scale, (hi - j.c) / (rmax - j.c));
  if (rmin < lo) scale = std::min(scale, (j.c - lo) / (j.c - rmin));
  scale = std::clamp(scale, 0.0, 1.0) * (1.0 - 1e-12);
  j.b = j.c + scale * (j.b - j.c);
  j.a *= scale;
  for (auto& u : j.u) u *= scale;
  return j;
}

/**
 * Nearest parameters (Euclidean) whose sampled shape stays in [lo, hi].
 *
 * The constraints are linear in the parameters, so this is a small QP; a
 * primal active-set method started from scale_into_range solves it.
 */
inline JointParams nearest_in_range(const JointParams& target, double lo, double hi) {
  using Vec = Eigen::Matrix<double, kParamsPerJoint, 1>;
  static const Eigen::Matrix<double, Eigen::Dynamic, kParamsPerJoint> rows = [] {
    const auto phis = extremum_phases();
    Eigen::Matrix<double, Eigen::Dynamic, kParamsPerJoint> m(static_cast<long>(phis.size()), kParamsPerJoint);
    for (std::size_t s = 0; s < phis.size(); ++s) m.row(static_cast<long>(s)) = joint_row(phis[s]);
    return m;
  }();
  const long ns = rows.rows();
  // Constraint i < ns: row_i p <= hi; i >= ns: -row_i p <= -lo.
  auto a_row = [&](long i) -> Eigen::Matrix<double, 1, kParamsPerJoint> { return i < ns ? rows.row(i) : Eigen::Matrix<double, 1, kParamsPerJoint>(-rows.row(i - ns)); };
  auto bound = [&](long i) { return i < ns ? hi : -lo; };

  const Vec q = joint_vector(target);
  const Eigen::VectorXd rq = rows * q;
  if (rq.minCoeff() >= lo && rq.maxCoeff() <= hi) return target;

  Vec p = joint_vector(scale_into_range(target, lo, hi));
  constexpr double kTol = 1e-12;
  std::vector<long> work;
  for (int iter = 0; iter < 500; ++iter) {
    Vec s = q - p;
    Eigen::MatrixXd aw(static_cast<long>(work.size()), kParamsPerJoint);
    for (std::size_t w = 0; w < work.size(); ++w) aw.row(static_cast<long>(w)) = a_row(work[w]);
    Eigen::VectorXd lambda;
    if (!work.empty()) {
      // Remove the component of q - p in the span of the working rows.
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(aw.transpose());
      lambda = cod.solve(s);
      s -= aw.transpose() * lambda;
    }
    if (s.norm() <= kTol * (1.0 + q.norm())) {
      if (work.empty()) break;
      Eigen::Index worst;
      if (lambda.minCoeff(&worst) >= -kTol) break;
      work.erase(work.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    long blocking = -1;
    for (long i = 0; i < 2 * ns; ++i) {
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      const double as = a_row(i).dot(s);
      if (as <= kTol) continue;
      const double t = (bound(i) - a_row(i).dot(p)) / as;
      if (t < alpha) {
        alpha = std::max(t, 0.0);
        blocking = i;
      }
    }
    p += alpha * s;
    if (blocking < 0) continue;
    work.push_back(blocking);
  }
  return joint_from_vector(p);
}

}  // namespace detail

/**
 * Pull every free joint back inside [lo, hi], moving its parameters as little
 * as possible. Feasibility is checked on the extremum_phases() samples.
 */
inline void project_to_range(GaitParams& p, double lo, double hi, const LockMask& mask = {}) {
  if (!(lo < hi)) throw InvalidInput("project_to_range: empty range");
  for (std::size_t i = 0; i < p.joints.size(); ++i) {
    if (i < mask.size() && mask[i]) continue;
    p.joints[i] = detail::nearest_in_range(p.joints[i], lo, hi);
  }
}

}  // namespace gaitcov

#endif  // GAITCOV_GAIT_HPP_
