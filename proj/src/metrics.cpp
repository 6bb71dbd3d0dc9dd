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

#include "affordnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace affordnav {

namespace {

void require_pairs(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("metric on an empty path");
  if (a.size() != b.size()) {
    throw std::invalid_argument("pointwise metric needs equal lengths, got " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
  }
}

void require_nonempty(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("metric on an empty path");
}

double dist(Vec2 p, Vec2 q) {
  const double dx = p.x - q.x, dy = p.y - q.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double mean_l2(std::span<const Vec2> pred, std::span<const Vec2> ref) {
  require_pairs(pred, ref);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += dist(pred[i], ref[i]);
  return s / static_cast<double>(pred.size());
}

double max_l2(std::span<const Vec2> pred, std::span<const Vec2> ref) {
  require_pairs(pred, ref);
  double m = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) m = std::max(m, dist(pred[i], ref[i]));
  return m;
}

double last_point_error(std::span<const Vec2> pred, std::span<const Vec2> ref) {
  require_pairs(pred, ref);
  return dist(pred.back(), ref.back());
}

double frechet(std::span<const Vec2> a, std::span<const Vec2> b) {
  require_nonempty(a, b);
  const std::size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist(a[i], b[j]);
      if (i == 0 && j == 0) {
        cur[j] = d;
      } else if (i == 0) {
        cur[j] = std::max(cur[j - 1], d);
      } else if (j == 0) {
        cur[j] = std::max(prev[j], d);
      } else {
        cur[j] = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      }
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

DtwResult dtw(std::span<const Vec2> a, std::span<const Vec2> b) {
  require_nonempty(a, b);
  const std::size_t m = b.size();
  std::vector<DtwResult> prev(m), cur(m);
  auto better = [](const DtwResult& x, const DtwResult& y) {
    return x.cost < y.cost || (x.cost == y.cost && x.length < y.length);
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist(a[i], b[j]);
      DtwResult best;
      if (i == 0 && j == 0) {
        best = {0.0, 0};
      } else if (i == 0) {
        best = cur[j - 1];
      } else if (j == 0) {
        best = prev[j];
      } else {
        best = prev[j - 1];
        if (better(prev[j], best)) best = prev[j];
        if (better(cur[j - 1], best)) best = cur[j - 1];
      }
      cur[j] = {best.cost + d, best.length + 1};
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double dtw_normalized(std::span<const Vec2> a, std::span<const Vec2> b) { return dtw(a, b).normalized(); }

std::vector<Vec2> subsample_uniform(std::span<const Vec2> pts, std::size_t count) {
  if (pts.empty()) throw std::invalid_argument("subsample_uniform: empty input");
  if (count == 0) throw std::invalid_argument("subsample_uniform: count must be positive");
  std::vector<Vec2> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(pts.back());
    return out;
  }
  const std::size_t n = pts.size();
  for (std::size_t k = 0; k < count; ++k) out.push_back(pts[(k * (n - 1) + (count - 1) / 2) / (count - 1)]);
  return out;
}

std::vector<MetricRow> metric_suite(std::span<const Vec2> pred, std::span<const Vec2> ref) {
  require_nonempty(pred, ref);
  const std::vector<Vec2> sub = subsample_uniform(ref, pred.size());
  return {{"mean_l2", mean_l2(pred, sub)},
          {"max_l2", max_l2(pred, sub)},
          {"last_point_error", last_point_error(pred, sub)},
          {"frechet_subsampled", frechet(pred, sub)},
          {"frechet_full", frechet(pred, ref)},
          {"dtw_normalized_subsampled", dtw_normalized(pred, sub)},
          {"dtw_normalized_full", dtw_normalized(pred, ref)}};
}

}  // namespace affordnav
