// Copyright 2026 The affordnav Authors
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

#ifndef AFFORDNAV_GEOMETRY_HPP
#define AFFORDNAV_GEOMETRY_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace affordnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) noexcept { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) noexcept { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) noexcept { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }
inline Vec2 unit_from_angle(double angle) noexcept { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 rotate(Vec2 v, double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps to (-pi, pi].
inline double wrap_angle(double a) noexcept {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

inline double deg2rad(double d) noexcept { return d * std::numbers::pi / 180.0; }

inline double polyline_length(std::span<const Vec2> pts) noexcept {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += distance(pts[i - 1], pts[i]);
  return s;
}

/// Point at arc length s (clamped to [0, length]).
Vec2 point_at_arclength(std::span<const Vec2> pts, double s);

/// `count` points equally spaced by arc length, endpoints included.
std::vector<Vec2> resample_polyline(std::span<const Vec2> pts, int count);

struct Projection {
  std::size_t segment = 0;  // index of the segment start vertex
  double arclength = 0.0;   // arc length of the projected point
  Vec2 point;
  double distance = 0.0;
};

/// Closest point on the polyline (first minimum wins). Requires non-empty input.
Projection project_onto_polyline(std::span<const Vec2> pts, Vec2 p);

}  // namespace affordnav

#endif  // AFFORDNAV_GEOMETRY_HPP
