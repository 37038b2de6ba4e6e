// Copyright 2026 The DriverSense Authors
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

#ifndef DRIVERSENSE_GEOMETRY_HPP_
#define DRIVERSENSE_GEOMETRY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace driversense {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double Dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double Norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Wraps an angle into (-pi, pi].
inline double NormalizeAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

// Wraps an angle into [0, 2pi).
inline double WrapTwoPi(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]

  Vec2 position() const { return {x, y}; }
  Vec2 forward() const { return {std::cos(heading), std::sin(heading)}; }
  // Unit vector pointing to the right-hand side of the heading.
  Vec2 right() const { return {std::sin(heading), -std::cos(heading)}; }

  // Body frame: +x to the right, +y forward.
  Vec2 BodyToWorld(Vec2 body) const {
    return position() + body.x * right() + body.y * forward();
  }
  Vec2 WorldToBody(Vec2 world) const {
    const Vec2 d = world - position();
    return {Dot(d, right()), Dot(d, forward())};
  }
};

inline Pose2D MakePose(double x, double y, double heading) {
  return {x, y, NormalizeAngle(heading)};
}

struct OrientedRect {
  Vec2 center;
  Vec2 half_extents;     // along the rectangle's local x (heading) and y axes
  double heading = 0.0;  // orientation of the local x axis

  friend bool operator==(const OrientedRect&, const OrientedRect&) = default;

  Vec2 axis_u() const { return {std::cos(heading), std::sin(heading)}; }
  Vec2 axis_v() const { return {-std::sin(heading), std::cos(heading)}; }

  std::array<Vec2, 4> Corners() const {
    const Vec2 u = half_extents.x * axis_u();
    const Vec2 v = half_extents.y * axis_v();
    return {center + u + v, center - u + v, center - u - v, center + u - v};
  }

  bool Contains(Vec2 p) const {
    const Vec2 d = p - center;
    return std::abs(Dot(d, axis_u())) <= half_extents.x &&
           std::abs(Dot(d, axis_v())) <= half_extents.y;
  }
};

// Distance along the ray origin + t * dir (|dir| = 1) to the first boundary
// crossing of `rect`, via the slab method in the rectangle's frame. Rays
// starting inside the rectangle report nothing.
inline std::optional<double> RayRectIntersection(Vec2 origin, Vec2 dir,
                                                 const OrientedRect& rect) {
  const Vec2 d = origin - rect.center;
  const Vec2 u = rect.axis_u();
  const Vec2 v = rect.axis_v();
  const double o[2] = {Dot(d, u), Dot(d, v)};
  const double r[2] = {Dot(dir, u), Dot(dir, v)};
  const double h[2] = {rect.half_extents.x, rect.half_extents.y};
  if (std::abs(o[0]) < h[0] && std::abs(o[1]) < h[1]) return std::nullopt;

  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (std::abs(r[k]) < 1e-15) {
      if (std::abs(o[k]) > h[k]) return std::nullopt;
      continue;
    }
    double t0 = (-h[k] - o[k]) / r[k];
    double t1 = (h[k] - o[k]) / r[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far < 0.0) return std::nullopt;
  return std::max(t_near, 0.0);
}

// Positive-area overlap test between two convex rectangles (separating axis
// theorem). Shapes that only touch along an edge do not overlap.
inline bool RectsOverlap(const OrientedRect& a, const OrientedRect& b,
                         double eps = 1e-9) {
  const auto ca = a.Corners();
  const auto cb = b.Corners();
  const std::array<Vec2, 4> axes = {a.axis_u(), a.axis_v(), b.axis_u(),
                                    b.axis_v()};
  for (const Vec2& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const Vec2& p : ca) {
      amin = std::min(amin, Dot(p, axis));
      amax = std::max(amax, Dot(p, axis));
    }
    for (const Vec2& p : cb) {
      bmin = std::min(bmin, Dot(p, axis));
      bmax = std::max(bmax, Dot(p, axis));
    }
    if (amax <= bmin + eps || bmax <= amin + eps) return false;
  }
  return true;
}

}  // namespace driversense

#endif  // DRIVERSENSE_GEOMETRY_HPP_
