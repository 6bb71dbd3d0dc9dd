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

#ifndef AFFORDNAV_METRICS_HPP
#define AFFORDNAV_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "affordnav/geometry.hpp"

namespace affordnav {

// Pointwise metrics require equal, non-empty lengths (std::invalid_argument otherwise).
double mean_l2(std::span<const Vec2> pred, std::span<const Vec2> ref);
double max_l2(std::span<const Vec2> pred, std::span<const Vec2> ref);
double last_point_error(std::span<const Vec2> pred, std::span<const Vec2> ref);

/// Discrete Frechet distance.
double frechet(std::span<const Vec2> a, std::span<const Vec2> b);

struct DtwResult {
  double cost = 0.0;        // summed point distances along the optimal warping path
  std::size_t length = 0;   // number of matched pairs on that path
  double normalized() const { return cost / static_cast<double>(length); }
};

/// Dynamic time warping. Among minimum-cost warping paths the shortest is
/// taken, so the normalization is well defined.
DtwResult dtw(std::span<const Vec2> a, std::span<const Vec2> b);
double dtw_normalized(std::span<const Vec2> a, std::span<const Vec2> b);

/// `count` points picked at evenly spaced indices (rounded), endpoints kept.
std::vector<Vec2> subsample_uniform(std::span<const Vec2> pts, std::size_t count);

struct MetricRow {
  std::string metric;
  double value;
};

/// Full metric suite for one prediction against a (possibly dense)
/// reference. Pointwise metrics compare against the reference subsampled to
/// the prediction's length.
std::vector<MetricRow> metric_suite(std::span<const Vec2> pred, std::span<const Vec2> ref);

}  // namespace affordnav

#endif  // AFFORDNAV_METRICS_HPP
