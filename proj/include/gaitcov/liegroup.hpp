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

#ifndef GAITCOV_LIEGROUP_HPP_
#define GAITCOV_LIEGROUP_HPP_

/**
 * @file
 * @brief SE(2) poses, se(2) twists, exp/log and the rotation-weighted loss.
 *
 * Translations are measured in body lengths and rotations in radians. Every
 * pose produced here has its heading normalized to (-pi, pi]; the branch cut
 * of log() sits at theta = +pi, which maps to omega = +pi.
 */

#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "gaitcov/errors.hpp"

namespace gaitcov {

inline constexpr double kPi = std::numbers::pi;

/// Default weight relating rotation to translation: half a turn costs one body length.
inline constexpr double kDefaultRotWeight = 1.0 / std::numbers::pi;

/// Wrap an angle to (-pi, pi].
inline double normalize_angle(double theta) {
  if (theta > -kPi && theta <= kPi) return theta;
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

/// Element of SE(2).
struct Pose2 {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  static Pose2 identity() { return {}; }
  bool operator==(const Pose2&) const = default;
};

/// Element of se(2), in (translation, rotation) order.
struct Twist2 {
  double vx{0.0};
  double vy{0.0};
  double omega{0.0};

  bool operator==(const Twist2&) const = default;

  Eigen::Vector3d vec() const { return {vx, vy, omega}; }
  static Twist2 from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

inline Twist2 operator+(const Twist2& a, const Twist2& b) { return {a.vx + b.vx, a.vy + b.vy, a.omega + b.omega}; }
inline Twist2 operator-(const Twist2& a, const Twist2& b) { return {a.vx - b.vx, a.vy - b.vy, a.omega - b.omega}; }
inline Twist2 operator-(const Twist2& a) { return {-a.vx, -a.vy, -a.omega}; }
inline Twist2 operator*(double s, const Twist2& a) { return {s * a.vx, s * a.vy, s * a.omega}; }

inline std::ostream& operator<<(std::ostream& os, const Pose2& g) {
  return os << "(" << g.x << ", " << g.y << ", " << g.theta << ")";
}
inline std::ostream& operator<<(std::ostream& os, const Twist2& xi) {
  return os << "[" << xi.vx << ", " << xi.vy << ", " << xi.omega << "]";
}

/// Group product a*b: rotate b's translation by a's heading, then add.
inline Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, normalize_angle(a.theta + b.theta)};
}

inline Pose2 inverse(const Pose2& g) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  return {-(c * g.x + s * g.y), -(-s * g.x + c * g.y), normalize_angle(-g.theta)};
}

namespace detail {

// Coefficients of V(w) = [[a, -b], [b, a]], a = sin(w)/w, b = (1 - cos(w))/w,
// and their derivatives. Series below |w| = 1e-4.
struct VCoeffs {
  double a, b, da, db;
};

inline VCoeffs v_coeffs(double w) {
  if (std::abs(w) < 1e-4) {
    const double w2 = w * w;
    return {1.0 - w2 / 6.0, w / 2.0 - w * w2 / 24.0, -w / 3.0 + w * w2 / 30.0, 0.5 - w2 / 8.0};
  }
  const double s = std::sin(w);
  const double c = std::cos(w);
  return {s / w, (1.0 - c) / w, (w * c - s) / (w * w), (w * s - (1.0 - c)) / (w * w)};
}

// (w/2) cot(w/2), the diagonal of V(w)^-1.
inline double half_cot(double w) {
  if (std::abs(w) < 1e-4) return 1.0 - w * w / 12.0;
  return 0.5 * w / std::tan(0.5 * w);
}

}  // namespace detail

/// Exponential map; exact series limit for omega -> 0.
inline Pose2 exp(const Twist2& xi) {
  const auto v = detail::v_coeffs(xi.omega);
  return {v.a * xi.vx - v.b * xi.vy, v.b * xi.vx + v.a * xi.vy, normalize_angle(xi.omega)};
}

/// Logarithm on (-pi, pi]; theta = pi returns omega = +pi.
inline Twist2 log(const Pose2& g) {
  const double w = normalize_angle(g.theta);
  const double d = detail::half_cot(w);
  const double h = 0.5 * w;
  return {d * g.x + h * g.y, -h * g.x + d * g.y, w};
}

/// Weighted Euclidean norm on se(2).
inline double eta(const Twist2& xi, double rot_weight = kDefaultRotWeight) {
  if (!(rot_weight > 0.0)) throw InvalidConfiguration("rot_weight must be positive");
  const double r = rot_weight * xi.omega;
  return std::sqrt(xi.vx * xi.vx + xi.vy * xi.vy + r * r);
}

/// Distance of an achieved motion from a goal, eta(log(M G^-1)).
inline double relative_loss(const Pose2& motion, const Pose2& goal, double rot_weight = kDefaultRotWeight) {
  return eta(log(compose(motion, inverse(goal))), rot_weight);
}

/// Lie bracket of two twists.
inline Twist2 bracket(const Twist2& a, const Twist2& b) {
  return {-a.omega * b.vy + b.omega * a.vy, a.omega * b.vx - b.omega * a.vx, 0.0};
}

/// 3x3 homogeneous matrix of a pose.
inline Eigen::Matrix3d matrix(const Pose2& g) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  Eigen::Matrix3d m;
  m << c, -s, g.x, s, c, g.y, 0, 0, 1;
  return m;
}

// ---------------------------------------------------------------------------
// Coordinate Jacobians, all with respect to (x, y, theta) or (vx, vy, omega).
// They ignore the heading wrap, i.e. they are valid away from theta = +-pi.
// ---------------------------------------------------------------------------

/// d compose(a, b) / d a.
inline Eigen::Matrix3d compose_jacobian_first(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
  j(0, 2) = -s * b.x - c * b.y;
  j(1, 2) = c * b.x - s * b.y;
  return j;
}

/// d compose(a, b) / d b.
inline Eigen::Matrix3d compose_jacobian_second(const Pose2& a) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  Eigen::Matrix3d j;
  j << c, -s, 0, s, c, 0, 0, 0, 1;
  return j;
}

/// d exp(xi) / d xi.
inline Eigen::Matrix3d exp_jacobian(const Twist2& xi) {
  const auto v = detail::v_coeffs(xi.omega);
  Eigen::Matrix3d j;
  j << v.a, -v.b, v.da * xi.vx - v.db * xi.vy,  //
      v.b, v.a, v.db * xi.vx + v.da * xi.vy,    //
      0, 0, 1;
  return j;
}

/// d log(g) / d g, as the inverse of the exp Jacobian at log(g).
inline Eigen::Matrix3d log_jacobian(const Pose2& g) { return exp_jacobian(log(g)).inverse(); }

/// Gradient of eta; zero at the origin (a valid subgradient).
inline Eigen::Vector3d eta_gradient(const Twist2& xi, double rot_weight = kDefaultRotWeight) {
  const double n = eta(xi, rot_weight);
  if (n == 0.0) return Eigen::Vector3d::Zero();
  return Eigen::Vector3d(xi.vx, xi.vy, rot_weight * rot_weight * xi.omega) / n;
}

}  // namespace gaitcov

#endif  // GAITCOV_LIEGROUP_HPP_
