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

#ifndef AFFORDNAV_DATAPIPE_HPP
#define AFFORDNAV_DATAPIPE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affordnav/embodiment.hpp"
#include "affordnav/pathspace.hpp"
#include "json.hpp"

namespace affordnav {

inline constexpr std::size_t kWaypointsPerLabel = 5;

struct LogPose {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // ground-contact height
  double heading = 0.0;
};

struct CameraMount {
  double height = 0.5;
  double pitch = 0.2617993877991494;
  int width = 640;
  int image_height = 480;
  double focal = 320.0;

  CameraModel at(const LogPose& pose) const;
};

struct OdometryLog {
  std::vector<LogPose> poses;
  CameraMount camera;
  std::string provenance;

  /// Throws std::invalid_argument unless timestamps strictly increase.
  void validate() const;
};

/// Log sampled at `rate_hz` from a mission trace; z is the support height
/// (body height minus ride height).
OdometryLog log_from_trace(std::span<const AgentState> trace, const EmbodimentSpec& spec, double rate_hz = 10.0,
                           std::string provenance = "mission");

enum class HorizonTag : std::uint8_t { short_horizon, long_horizon };
std::string_view to_string(HorizonTag h);

struct LabeledExample {
  std::size_t frame = 0;
  std::vector<Pixel> pixel_path;  // five points when usable
  Pixel goal;
  HorizonTag horizon = HorizonTag::short_horizon;
  double horizon_m = 0.0;
  double curvature = 1.0;  // of the ground path the label was built from
  bool usable = false;
  bool truncated = false;  // the log ended before the horizon was covered
  std::string prompt;
};

nlohmann::json to_json(const LabeledExample& e);
void write_examples_jsonl(std::ostream& os, std::span<const LabeledExample> examples);

/// Projects the poses travelled within `horizon` metres after `frame` into the
/// camera at `frame`, keeps those in the image and picks five at evenly spaced
/// indices. Throws std::invalid_argument when the robot does not move.
LabeledExample hindsight_label(const OdometryLog& log, std::size_t frame, double horizon,
                               HorizonTag tag = HorizonTag::short_horizon);

struct FilterResult {
  std::vector<LabeledExample> examples;
  std::string warning;
};

/// Drops the top `outlier_frac` by curvature, then keeps the `keep_n` most
/// curved of the rest (stable on ties).
FilterResult curvature_filter(std::span<const LabeledExample> examples, std::size_t keep_n,
                              double outlier_frac = 0.03);

struct MixResult {
  std::vector<LabeledExample> examples;
  std::size_t n_short = 0;
  std::size_t n_long = 0;
  std::string warning;
};

/// Labels every `frame_stride`-th frame, alternating short and long horizons
/// from a seeded start. A frame whose long horizon runs past the log end is
/// labelled short instead.
MixResult mix_horizons(const OdometryLog& log, double h_short = 5.0, double h_long = 15.0, std::uint64_t seed = 0,
                       std::size_t frame_stride = 10);

}  // namespace affordnav

#endif  // AFFORDNAV_DATAPIPE_HPP
