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

#include "affordnav/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace affordnav {

Vec2 point_at_arclength(std::span<const Vec2> pts, double s) {
  if (pts.empty()) throw std::invalid_argument("point_at_arclength: empty polyline");
  if (s <= 0.0) return pts.front();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double seg = distance(pts[i - 1], pts[i]);
    if (s <= seg && seg > 0.0) return pts[i - 1] + (s / seg) * (pts[i] - pts[i - 1]);
    s -= seg;
  }
  return pts.back();
}

std::vector<Vec2> resample_polyline(std::span<const Vec2> pts, int count) {
  if (pts.empty()) throw std::invalid_argument("resample_polyline: empty polyline");
  if (count < 1) throw std::invalid_argument("resample_polyline: count must be >= 1");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(pts.front());
    return out;
  }
  const double total = polyline_length(pts);
  for (int i = 0; i < count; ++i) {
    out.push_back(i == count - 1 ? pts.back() : point_at_arclength(pts, total * i / (count - 1)));
  }
  return out;
}

Projection project_onto_polyline(std::span<const Vec2> pts, Vec2 p) {
  if (pts.empty()) throw std::invalid_argument("project_onto_polyline: empty polyline");
  Projection best{0, 0.0, pts.front(), distance(pts.front(), p)};
  double base = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i], b = pts[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + t * ab;
    const double d = distance(p, q);
    const double len = std::sqrt(len2);
    if (d < best.distance) best = Projection{i, base + t * len, q, d};
    base += len;
  }
  return best;
}

}  // namespace affordnav
