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

#ifndef GAITCOV_DYNAMICS_HPP_
#define GAITCOV_DYNAMICS_HPP_

/**
 * @file
 * @brief Drag-dominated swimmer models and gait-cycle integration.
 *
 * Every model exposes its local connection A(r): the 3 x n matrix taking a
 * shape velocity to the body twist, g^-1 dg/dt = A(r) dr/dt. A gait cycle is
 * integrated on SE(2) with a fixed-step fourth-order scheme.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gaitcov/errors.hpp"
#include "gaitcov/gait.hpp"
#include "gaitcov/liegroup.hpp"

namespace gaitcov {

using ShapeState = std::vector<double>;
using ConnectionMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Drag matrices with condition number above this are treated as singular.
inline constexpr double kSingularCondition = 1e12;
inline constexpr int kDefaultCycleSteps = 512;

/**
 * Chain of n_joints + 1 equal slender links with total length 1, under
 * resistive-force drag (c_t tangential, c_n normal, per unit length).
 *
 * The body frame sits at the centroid of the links with the mean link
 * orientation as its heading, so it is defined by shape alone.
 */
struct PurcellChain {
  int n_joints{3};
  double c_t{1.0};
  double c_n{2.0};
  double joint_limit{kPi / 2};
};

/// Two spheres on prismatic sliders; drag and input matrices as published.
struct TwoSlider {
  double d{1.0};
  /// Rotation applied to the input matrix, radians.
  double input_rotation{-kPi / 2};
  double min_extension{0.05};
  double max_extension{3.0};
};

/**
 * Equilateral triangle with a rotating slender link at each vertex. The
 * triangle's own drag is three static links from its centre to the vertices.
 */
struct ThreeBranch {
  double circumradius{0.2};
  double link_length{0.4};
  double static_length{0.2};
  double c_t{1.0};
  double c_n{2.0};
  double joint_limit{kPi};
};

namespace detail {

// One straight drag link, as seen in the body frame.
struct Link {
  Eigen::Vector2d q;               // midpoint
  double beta;                     // heading
  double length;
  Eigen::Matrix<double, 2, Eigen::Dynamic> dq;  // d q / d r
  Eigen::RowVectorXd dbeta;        // d beta / d r
};

inline void throw_if_singular(const Eigen::Matrix3d& m, std::span<const double> r) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto& s = svd.singularValues();
  const double cond = s(2) > 0.0 ? s(0) / s(2) : std::numeric_limits<double>::infinity();
  if (!(cond <= kSingularCondition)) throw SingularConfiguration(ShapeState(r.begin(), r.end()), cond);
}

// Total resistive-force wrench is K xi + Q rdot = 0.
inline ConnectionMatrix drag_connection(const std::vector<Link>& links, int n, double c_t, double c_n,
                                        std::span<const double> r) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  Eigen::Matrix<double, 3, Eigen::Dynamic> q = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, n);
  for (const auto& link : links) {
    const Eigen::Vector2d t(std::cos(link.beta), std::sin(link.beta));
    const Eigen::Vector2d nrm(-t.y(), t.x());
    const Eigen::Matrix2d d = c_t * t * t.transpose() + c_n * nrm * nrm.transpose();
    Eigen::Matrix<double, 3, 2> p;
    p.topRows<2>().setIdentity();
    p(2, 0) = -link.q.y();
    p(2, 1) = link.q.x();
    const double kappa = c_n * link.length * link.length * link.length / 12.0;
    const Eigen::Matrix<double, 3, 2> pd = link.length * p * d;
    k += pd * p.transpose();
    k(2, 2) += kappa;
    q += pd * link.dq;
    q.row(2) += kappa * link.dbeta;
  }
  throw_if_singular(k, r);
  return -k.ldlt().solve(q);
}

inline std::vector<Link> purcell_links(const PurcellChain& m, std::span<const double> r) {
  const int n = m.n_joints;
  const int nl = n + 1;
  const double len = 1.0 / nl;
  std::vector<double> phi(nl, 0.0);
  for (int i = 1; i < nl; ++i) phi[i] = phi[i - 1] + r[i - 1];
  double mean = 0.0;
  for (double p : phi) mean += p;
  mean /= nl;

  std::vector<Eigen::Vector2d> e(nl), je(nl), mid(nl);
  Eigen::Vector2d joint = Eigen::Vector2d::Zero(), centroid = Eigen::Vector2d::Zero();
  for (int i = 0; i < nl; ++i) {
    e[i] = {std::cos(phi[i]), std::sin(phi[i])};
    je[i] = {-e[i].y(), e[i].x()};
    mid[i] = joint + 0.5 * len * e[i];
    joint += len * e[i];
    centroid += mid[i] / nl;
  }

  // d mid_i / d r_j: links past joint j swing about it.
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> dmid(nl, Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, n));
  Eigen::Matrix<double, 2, Eigen::Dynamic> dcent = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, n);
  for (int j = 0; j < n; ++j) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int i = j + 1; i < nl; ++i) {
      dmid[i].col(j) = acc + 0.5 * len * je[i];
      acc += len * je[i];
      dcent.col(j) += dmid[i].col(j) / nl;
    }
  }

  const double cm = std::cos(mean), sm = std::sin(mean);
  Eigen::Matrix2d rot_back;
  rot_back << cm, sm, -sm, cm;
  std::vector<Link> links(nl);
  for (int i = 0; i < nl; ++i) {
    auto& l = links[i];
    l.q = rot_back * (mid[i] - centroid);
    l.beta = phi[i] - mean;
    l.length = len;
    l.dq.resize(2, n);
    l.dbeta.resize(n);
    const Eigen::Vector2d jq(-l.q.y(), l.q.x());
    for (int j = 0; j < n; ++j) {
      const double dmean = static_cast<double>(nl - 1 - j) / nl;
      l.dq.col(j) = rot_back * (dmid[i].col(j) - dcent.col(j)) - dmean * jq;
      l.dbeta(j) = (i > j ? 1.0 : 0.0) - dmean;
    }
  }
  return links;
}

inline std::vector<Link> three_branch_links(const ThreeBranch& m, std::span<const double> r) {
  std::vector<Link> links;
  links.reserve(6);
  for (int k = 0; k < 3; ++k) {
    const double psi = 2.0 * kPi * k / 3.0;
    const Eigen::Vector2d radial(std::cos(psi), std::sin(psi));
    Link s;
    s.q = 0.5 * m.static_length * radial;
    s.beta = psi;
    s.length = m.static_length;
    s.dq = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, 3);
    s.dbeta = Eigen::RowVectorXd::Zero(3);
    links.push_back(std::move(s));

    const double beta = psi + r[k];
    const Eigen::Vector2d t(std::cos(beta), std::sin(beta));
    Link l;
    l.q = m.circumradius * radial + 0.5 * m.link_length * t;
    l.beta = beta;
    l.length = m.link_length;
    l.dq = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, 3);
    l.dq.col(k) = 0.5 * m.link_length * Eigen::Vector2d(-t.y(), t.x());
    l.dbeta = Eigen::RowVectorXd::Zero(3);
    l.dbeta(k) = 1.0;
    links.push_back(std::move(l));
  }
  return links;
}

}  // namespace detail

/// Drag matrix M(r) of the two-slider swimmer.
inline Eigen::Matrix3d two_slider_drag_matrix(const TwoSlider& m, double r1, double r2) {
  const double d = m.d;
  Eigen::Matrix3d mat;
  mat << 3 * d, 0, 0,  //
      0, 3 * d, 0,     //
      -d * r2, -d * r1, d * (r1 * r1 + r2 * r2) + d * d * d / 4.0;
  return mat;
}

/// R(alpha) B, the input side of the two-slider model.
inline Eigen::Matrix<double, 3, 2> two_slider_input_matrix(const TwoSlider& m) {
  Eigen::Matrix3d rot;
  const double c = std::cos(m.input_rotation), s = std::sin(m.input_rotation);
  rot << c, -s, 0, s, c, 0, 0, 0, 1;
  Eigen::Matrix<double, 3, 2> b;
  b << 0, m.d, -m.d, 0, 0, 0;
  return rot * b;
}

/// A swimmer together with its geometry; immutable once built.
class ConnectionModel {
 public:
  using Variant = std::variant<PurcellChain, TwoSlider, ThreeBranch>;

  ConnectionModel(Variant v) : model_(std::move(v)) {  // NOLINT(google-explicit-constructor)
    if (const auto* p = std::get_if<PurcellChain>(&model_)) {
      if (p->n_joints < 1) throw InvalidConfiguration("purcell_chain needs at least one joint");
      if (!(p->c_t >= 0.0 && p->c_n >= 0.0)) throw InvalidConfiguration("drag coefficients must be non-negative");
    }
  }

  const Variant& variant() const { return model_; }

  std::string kind() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, PurcellChain>) return "purcell_chain";
          else if constexpr (std::is_same_v<T, TwoSlider>) return "two_slider";
          else return "three_branch";
        },
        model_);
  }

  std::size_t shape_dim() const {
    if (const auto* p = std::get_if<PurcellChain>(&model_)) return static_cast<std::size_t>(p->n_joints);
    if (std::holds_alternative<TwoSlider>(model_)) return 2;
    return 3;
  }

  /// Admissible range of every shape variable.
  std::pair<double, double> shape_limits() const {
    if (const auto* p = std::get_if<PurcellChain>(&model_)) return {-p->joint_limit, p->joint_limit};
    if (const auto* s = std::get_if<TwoSlider>(&model_)) return {s->min_extension, s->max_extension};
    const auto& t = std::get<ThreeBranch>(model_);
    return {-t.joint_limit, t.joint_limit};
  }

  void validate(std::span<const double> r) const {
    if (r.size() != shape_dim())
      throw InvalidInput(kind() + ": shape has " + std::to_string(r.size()) + " entries, expected " +
                         std::to_string(shape_dim()));
    if (std::holds_alternative<TwoSlider>(model_) && !(r[0] > 0.0 && r[1] > 0.0))
      throw InvalidInput("two_slider: slider extensions must be strictly positive");
  }

  ConnectionMatrix connection(std::span<const double> r) const {
    validate(r);
    return std::visit(
        [&](const auto& m) -> ConnectionMatrix {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, PurcellChain>) {
            return detail::drag_connection(detail::purcell_links(m, r), m.n_joints, m.c_t, m.c_n, r);
          } else if constexpr (std::is_same_v<T, ThreeBranch>) {
            return detail::drag_connection(detail::three_branch_links(m, r), 3, m.c_t, m.c_n, r);
          } else {
            const Eigen::Matrix3d drag = two_slider_drag_matrix(m, r[0], r[1]);
            detail::throw_if_singular(drag, r);
            return drag.partialPivLu().solve(two_slider_input_matrix(m));
          }
        },
        model_);
  }

  /// Body twist for a shape and shape velocity.
  Twist2 body_twist(std::span<const double> r, std::span<const double> rdot) const {
    const ConnectionMatrix a = connection(r);
    const Eigen::Map<const Eigen::VectorXd> v(rdot.data(), static_cast<long>(rdot.size()));
    return Twist2::from(a * v);
  }

 private:
  Variant model_;
};

/// Connection of a free-standing model value.
inline ConnectionMatrix connection(const ConnectionModel& model, std::span<const double> r) {
  return model.connection(r);
}

// ---------------------------------------------------------------------------
// Cycle integration.
// ---------------------------------------------------------------------------

struct TrajectorySample {
  double phase;
  ShapeState r;
  Pose2 pose;
};

struct CycleResult {
  Pose2 displacement;
  std::vector<TrajectorySample> trajectory;
};

struct IntegrateOptions {
  int steps{kDefaultCycleSteps};
  /// Cycle rate; the loop is traversed in time 2 pi / omega.
  double omega{1.0};
  bool record_trajectory{false};
};

namespace detail {

// Fourth-order Magnus step for dg/dt = g xi(t), using the twist at both ends
// and the midpoint. Time-symmetric: stepping a reversed loop gives the exact
// inverse element.
inline Twist2 magnus_step(const Twist2& x0, const Twist2& xm, const Twist2& x1, double h) {
  return (h / 6.0) * (x0 + 4.0 * xm + x1) + (h * h / 12.0) * bracket(x0, x1);
}

}  // namespace detail

namespace detail {

/**
 * Step counts for the smooth pieces between breakpoints.
 *
 * Each piece gets a share of `steps` proportional to its length plus the
 * shape-space distance travelled over it (at least one step); rounding uses
 * largest remainders.
 */
inline std::vector<int> allocate_steps(const GaitFunction& gait, std::span<const double> edges, int steps) {
  const std::size_t pieces = edges.size() - 1;
  if (pieces == 1) return {steps};
  std::vector<double> weight(pieces);
  ShapeState r(gait.dim), dr(gait.dim);
  constexpr int kProbe = 16;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double len = edges[i + 1] - edges[i];
    double travel = 0.0;
    for (int q = 0; q < kProbe; ++q) {
      gait.eval(edges[i] + (q + 0.5) * len / kProbe, r, dr);
      double n2 = 0.0;
      for (double v : dr) n2 += v * v;
      travel += std::sqrt(n2) * len / kProbe;
    }
    weight[i] = len + travel;
  }
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  std::vector<int> n(pieces);
  std::vector<std::pair<double, std::size_t>> frac;
  int used = 0;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double exact = steps * weight[i] / total;
    n[i] = std::max(1, static_cast<int>(std::floor(exact)));
    used += n[i];
    frac.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < steps; k = (k + 1) % pieces, ++used) ++n[frac[k].second];
  return n;
}

}  // namespace detail

/**
 * Integrate the body motion of one gait cycle starting from the identity.
 *
 * Steps never straddle a gait breakpoint: the cycle is cut at the
 * breakpoints and the pieces share `steps` (see allocate_steps). Twists at a
 * breakpoint, and at the end of the cycle, are one-sided limits from inside
 * each piece.
 * A SingularConfiguration raised by the model is rethrown carrying the phase.
 */
inline CycleResult integrate_cycle(const ConnectionModel& model, const GaitFunction& gait,
                                   const IntegrateOptions& opt = {}) {
  if (opt.steps < 64) throw InvalidInput("integrate_cycle: at least 64 steps per cycle are required");
  if (!(opt.omega > 0.0)) throw InvalidConfiguration("integrate_cycle: omega must be positive");
  if (gait.dim != model.shape_dim()) throw InvalidInput("integrate_cycle: gait dimension does not match model");

  std::vector<double> edges{0.0};
  for (double b : gait.breakpoints)
    if (b > edges.back() && b < 2.0 * kPi) edges.push_back(b);
  edges.push_back(2.0 * kPi);
  const auto counts = detail::allocate_steps(gait, edges, opt.steps);

  ShapeState r(gait.dim), dr(gait.dim);
  auto twist_at = [&](double phi) {
    gait.eval(phi, r, dr);
    for (auto& v : dr) v *= opt.omega;
    try {
      return model.body_twist(r, dr);
    } catch (const SingularConfiguration& e) {
      throw e.at_phase(wrap_phase(phi));
    }
  };
  // Offset used to read one-sided limits at interior breakpoints.
  constexpr double kSide = 1e-12;

  CycleResult out;
  Pose2 g = Pose2::identity();
  for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
    const double a = edges[piece], b = edges[piece + 1];
    const int n = counts[piece];
    const double dphi = (b - a) / n;
    const double h = dphi / opt.omega;
    Twist2 x0 = twist_at(piece == 0 ? a : a + kSide);
    if (opt.record_trajectory && piece == 0) out.trajectory.push_back({0.0, r, g});
    for (int s = 0; s < n; ++s) {
      const double p0 = a + s * dphi;
      const double p1 = s + 1 == n ? b : p0 + dphi;
      const Twist2 xm = twist_at(p0 + 0.5 * dphi);
      // Piece ends, 2 pi included, are left limits: 2 pi itself wraps to 0,
      // where a gait with a kink at its start (a concatenation) has another velocity.
      const Twist2 x1 = twist_at(s + 1 == n ? p1 - kSide : p1);
      g = compose(g, exp(detail::magnus_step(x0, xm, x1, h)));
      x0 = x1;
      if (opt.record_trajectory) out.trajectory.push_back({p1, r, g});
    }
  }
  out.displacement = g;
  return out;
}

inline CycleResult integrate_cycle(const ConnectionModel& model, const GaitFunction& gait, int steps) {
  return integrate_cycle(model, gait, IntegrateOptions{.steps = steps});
}

/// Displacement of a parametrized gait, paced by its own Omega.
inline Pose2 gait_displacement(const ConnectionModel& model, const GaitParams& p, int steps = kDefaultCycleSteps) {
  return integrate_cycle(model, as_function(p), IntegrateOptions{.steps = steps, .omega = p.omega}).displacement;
}

/// Several gaits run back to back as one continuous shape trajectory.
inline GaitFunction concatenate(std::vector<GaitFunction> gaits) {
  if (gaits.empty()) throw InvalidInput("concatenate: no gaits");
  const std::size_t n = gaits.front().dim;
  for (const auto& g : gaits)
    if (g.dim != n) throw InvalidInput("concatenate: gaits differ in dimension");
  const double m = static_cast<double>(gaits.size());
  std::vector<double> bp;
  for (std::size_t i = 0; i < gaits.size(); ++i) {
    const double base = 2.0 * kPi * static_cast<double>(i);
    if (i > 0) bp.push_back(base / m);
    for (double b : gaits[i].breakpoints) bp.push_back((base + b) / m);
  }
  return {n,
          [gaits = std::move(gaits), m](double phi, std::span<double> r, std::span<double> dr) {
            const double local = wrap_phase(phi) * m;
            const auto idx = std::min(static_cast<std::size_t>(local / (2.0 * kPi)), gaits.size() - 1);
            gaits[idx].eval(local - 2.0 * kPi * static_cast<double>(idx), r, dr);
            for (auto& v : dr) v *= m;
          },
          std::move(bp)};
}

// ---------------------------------------------------------------------------
// Hand-designed gaits.
// ---------------------------------------------------------------------------

/// Preset three-branch gait k in {1, 2, 3}; direction -1 runs it backward.
inline GaitFunction three_branch_preset_gait(int k, int direction = 1) {
  if (k < 1 || k > 3) throw InvalidInput("three_branch_preset_gait: k must be 1, 2 or 3");
  if (direction != 1 && direction != -1) throw InvalidInput("three_branch_preset_gait: direction must be +1 or -1");
  const std::size_t i_sin = static_cast<std::size_t>(k % 3);
  const std::size_t i_up = static_cast<std::size_t>((k + 1) % 3);
  const std::size_t i_down = static_cast<std::size_t>((k + 2) % 3);
  GaitFunction g{3, [=](double phi, std::span<double> r, std::span<double> dr) {
                   const double s = std::sin(phi), c = std::cos(phi);
                   r[i_sin] = s;
                   dr[i_sin] = c;
                   r[i_up] = 1.0 - c;
                   dr[i_up] = s;
                   r[i_down] = -1.0 + c;
                   dr[i_down] = -s;
                 }};
  return direction == 1 ? g : reversed(std::move(g));
}

namespace detail {

// Smooth 0 -> 1 ramp with zero end slopes.
inline std::pair<double, double> ease(double tau) {
  return {0.5 * (1.0 - std::cos(kPi * tau)), 0.5 * kPi * std::sin(kPi * tau)};
}

}  // namespace detail

/**
 * Two-slider loop: out along the r1 axis from the corner, a quarter arc of the
 * given radius about the corner, then back down the r2 axis. Each leg takes a
 * third of the cycle and starts and stops at rest.
 */
inline GaitFunction two_slider_arc_gait(double radius, double corner = 0.1, int direction = 1) {
  if (!(radius > 0.0) || !(corner > 0.0)) throw InvalidInput("two_slider_arc_gait: radius and corner must be positive");
  const double leg = 2.0 * kPi / 3.0;
  GaitFunction g{2, [=](double phi, std::span<double> r, std::span<double> dr) {
                   phi = wrap_phase(phi);
                   const int seg = std::min(2, static_cast<int>(phi / leg));
                   const auto [s, ds] = detail::ease((phi - seg * leg) / leg);
                   const double rate = ds / leg;
                   if (seg == 0) {
                     r[0] = corner + radius * s;
                     r[1] = corner;
                     dr[0] = radius * rate;
                     dr[1] = 0.0;
                   } else if (seg == 1) {
                     const double ang = 0.5 * kPi * s;
                     r[0] = corner + radius * std::cos(ang);
                     r[1] = corner + radius * std::sin(ang);
                     dr[0] = -radius * std::sin(ang) * 0.5 * kPi * rate;
                     dr[1] = radius * std::cos(ang) * 0.5 * kPi * rate;
                   } else {
                     r[0] = corner;
                     r[1] = corner + radius * (1.0 - s);
                     dr[0] = 0.0;
                     dr[1] = -radius * rate;
                   }
                 },
                 {leg, 2.0 * leg}};
  return direction == 1 ? g : reversed(std::move(g));
}

/// Square loop through (+-amp, +-amp) in two joints, starting at (-amp, -amp).
inline GaitFunction square_gait(double amp) {
  const double leg = 0.5 * kPi;
  return {2, [=](double phi, std::span<double> r, std::span<double> dr) {
            static constexpr double corners[5][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
            phi = wrap_phase(phi);
            const int seg = std::min(3, static_cast<int>(phi / leg));
            const auto [s, ds] = detail::ease((phi - seg * leg) / leg);
            for (int i = 0; i < 2; ++i) {
              const double a = amp * corners[seg][i], b = amp * corners[seg + 1][i];
              r[i] = a + (b - a) * s;
              dr[i] = (b - a) * ds / leg;
            }
          },
          {leg, 2.0 * leg, 3.0 * leg}};
}

/// Joint `active` follows center + amp sin(phi); the others hold `rest`.
inline GaitFunction single_joint_gait(std::size_t dim, std::size_t active, double amp, double center = 0.0,
                                      double rest = 0.0) {
  return {dim, [=](double phi, std::span<double> r, std::span<double> dr) {
            for (std::size_t i = 0; i < dim; ++i) {
              r[i] = rest;
              dr[i] = 0.0;
            }
            r[active] = center + amp * std::sin(phi);
            dr[active] = amp * std::cos(phi);
          }};
}

// ---------------------------------------------------------------------------
// Connection field sampling.
// ---------------------------------------------------------------------------

struct FieldSample {
  double r1, r2;
  ConnectionMatrix a;
};

/// A(r) over the Cartesian grid r1_vals x r2_vals; only for 2-D shape spaces.
inline std::vector<FieldSample> sample_connection_field(const ConnectionModel& model, std::span<const double> r1_vals,
                                                        std::span<const double> r2_vals) {
  if (model.shape_dim() != 2)
    throw Unsupported("connection field sampling needs a 2-D shape space; " + model.kind() + " has " +
                      std::to_string(model.shape_dim()));
  std::vector<FieldSample> out;
  out.reserve(r1_vals.size() * r2_vals.size());
  for (double r1 : r1_vals)
    for (double r2 : r2_vals) {
      const double r[2] = {r1, r2};
      out.push_back({r1, r2, model.connection(r)});
    }
  return out;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace gaitcov

#endif  // GAITCOV_DYNAMICS_HPP_
