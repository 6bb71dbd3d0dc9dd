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

#include "affordnav/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "affordnav/metrics.hpp"
#include "affordnav/rng.hpp"

namespace affordnav {

CameraModel CameraMount::at(const LogPose& pose) const {
  CameraModel c = CameraModel::robot_mounted({pose.x, pose.y}, pose.heading, height, pitch, width, image_height, focal);
  c.position.z = pose.z + height;
  return c;
}

void OdometryLog::validate() const {
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if (!(poses[i].t > poses[i - 1].t)) throw std::invalid_argument("OdometryLog: timestamps must strictly increase");
  }
}

OdometryLog log_from_trace(std::span<const AgentState> trace, const EmbodimentSpec& spec, double rate_hz,
                           std::string provenance) {
  if (!(rate_hz > 0.0)) throw std::invalid_argument("log_from_trace: rate must be positive");
  OdometryLog log;
  log.provenance = std::move(provenance);
  const double period = 1.0 / rate_hz;
  double next = trace.empty() ? 0.0 : trace.front().t;
  for (const auto& s : trace) {
    if (s.t + 1e-9 < next) continue;
    log.poses.push_back({s.t, s.x, s.y, s.z - spec.ride_height, s.heading});
    next = s.t + period;
  }
  log.validate();
  return log;
}

std::string_view to_string(HorizonTag h) { return h == HorizonTag::short_horizon ? "short" : "long"; }

nlohmann::json to_json(const LabeledExample& e) {
  nlohmann::json path = nlohmann::json::array();
  for (const Pixel& p : e.pixel_path) path.push_back({p.u, p.v});
  return {{"frame", e.frame},
          {"pixel_path", path},
          {"goal", {e.goal.u, e.goal.v}},
          {"horizon", std::string(to_string(e.horizon))},
          {"horizon_m", e.horizon_m},
          {"curvature", e.curvature},
          {"truncated", e.truncated},
          {"prompt", e.prompt}};
}

void write_examples_jsonl(std::ostream& os, std::span<const LabeledExample> examples) {
  for (const auto& e : examples) {
    if (e.usable) os << to_json(e).dump() << '\n';
  }
}

LabeledExample hindsight_label(const OdometryLog& log, std::size_t frame, double horizon, HorizonTag tag) {
  if (frame >= log.poses.size()) throw std::out_of_range("hindsight_label: frame beyond the log");
  if (!(horizon > 0.0)) throw std::invalid_argument("hindsight_label: horizon must be positive");
  LabeledExample ex;
  ex.frame = frame;
  ex.horizon = tag;
  ex.horizon_m = horizon;

  const LogPose& ref = log.poses[frame];
  std::vector<Vec2> ground{{ref.x, ref.y}};
  std::vector<Pixel> visible;
  double traveled = 0.0;
  std::size_t j = frame + 1;
  for (; j < log.poses.size(); ++j) {
    const LogPose& p = log.poses[j];
    const double step = distance(ground.back(), {p.x, p.y});
    if (traveled + step > horizon + 1e-9) break;
    traveled += step;
    ground.push_back({p.x, p.y});
    if (const auto px = project_to_pixel(log.camera.at(ref), {p.x, p.y, p.z})) visible.push_back(*px);
  }
  ex.truncated = j == log.poses.size();
  if (!(traveled > 0.0)) throw std::invalid_argument("hindsight_label: no displacement within the horizon");
  if (visible.size() < 2) return ex;  // unusable: too little of the future is in view

  std::vector<Vec2> as_points;
  for (const Pixel& p : visible) as_points.push_back({p.u, p.v});
  for (const Vec2& q : subsample_uniform(as_points, kWaypointsPerLabel)) ex.pixel_path.push_back({q.x, q.y});
  ex.goal = ex.pixel_path.back();
  ex.prompt = format_goal_prompt(ex.goal);
  const double chord = distance(ground.front(), ground.back());
  if (!(chord > 0.0)) return ex;  // closed loop: curvature undefined
  ex.curvature = curvature(ground);
  ex.usable = true;
  return ex;
}

FilterResult curvature_filter(std::span<const LabeledExample> examples, std::size_t keep_n, double outlier_frac) {
  if (!(outlier_frac >= 0.0 && outlier_frac < 1.0)) throw std::invalid_argument("curvature_filter: bad outlier fraction");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_curvature_desc = [&](std::size_t a, std::size_t b) { return examples[a].curvature > examples[b].curvature; };
  std::stable_sort(order.begin(), order.end(), by_curvature_desc);
  const auto drop = static_cast<std::size_t>(std::llround(outlier_frac * static_cast<double>(examples.size())));
  FilterResult out;
  const std::size_t remaining = order.size() - std::min(drop, order.size());
  if (keep_n > remaining) {
    out.warning = "requested " + std::to_string(keep_n) + " examples, only " + std::to_string(remaining) + " remain";
  }
  for (std::size_t i = drop; i < order.size() && out.examples.size() < keep_n; ++i) {
    out.examples.push_back(examples[order[i]]);
  }
  return out;
}

MixResult mix_horizons(const OdometryLog& log, double h_short, double h_long, std::uint64_t seed,
                       std::size_t frame_stride) {
  if (!(h_short > 0.0 && h_short < h_long)) throw std::invalid_argument("mix_horizons: need 0 < short < long");
  if (frame_stride == 0) throw std::invalid_argument("mix_horizons: frame stride must be positive");
  log.validate();
  Rng rng(derive_seed(seed, "datapipe/mix"));
  bool want_long = rng.bernoulli(0.5);
  MixResult out;
  std::size_t fallbacks = 0;
  for (std::size_t f = 0; f + 1 < log.poses.size(); f += frame_stride) {
    LabeledExample ex;
    try {
      if (want_long) {
        ex = hindsight_label(log, f, h_long, HorizonTag::long_horizon);
        if (ex.truncated) {
          ex = hindsight_label(log, f, h_short, HorizonTag::short_horizon);
          ++fallbacks;
        }
      } else {
        ex = hindsight_label(log, f, h_short, HorizonTag::short_horizon);
      }
    } catch (const std::invalid_argument&) {
      continue;  // stationary stretch
    }
    if (!ex.usable) continue;
    (ex.horizon == HorizonTag::long_horizon ? out.n_long : out.n_short) += 1;
    want_long = ex.horizon == HorizonTag::short_horizon;
    out.examples.push_back(std::move(ex));
  }
  const auto gap = out.n_short > out.n_long ? out.n_short - out.n_long : out.n_long - out.n_short;
  if (gap > 1) {
    out.warning = "horizon mix is " + std::to_string(out.n_short) + " short / " + std::to_string(out.n_long) +
                  " long (" + std::to_string(fallbacks) + " long labels fell back to short)";
  }
  return out;
}

}  // namespace affordnav
