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

#ifndef AFFORDNAV_PATHSPACE_HPP
#define AFFORDNAV_PATHSPACE_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affordnav/geometry.hpp"
#include "json.hpp"

namespace affordnav {

/// Normalized image coordinate: u grows rightwards, v grows downwards.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct CandidatePath {
  std::vector<Vec2> world_points;
  std::optional<std::vector<Pixel>> pixel_points;
  std::optional<std::vector<double>> per_point_affordance;
  std::optional<double> cumulative_affordance;
  std::string tag;  // provenance label, e.g. "ramp" or "sampled"

  /// Throws std::invalid_argument when the optional fields are inconsistent.
  void validate() const;
};

nlohmann::json to_json(const CandidatePath& path);
CandidatePath candidate_path_from_json(const nlohmann::json& j);

/// Pinhole camera. Orientation is yaw (about world z), then pitch (positive
/// looks down), then roll, applied to a body frame whose x axis is the
/// optical axis.
struct CameraModel {
  double fx = 320.0;
  double fy = 320.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  Vec3 position{0.0, 0.0, 0.5};
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  void validate() const;
  /// Columns are the camera x, y, z axes expressed in the world frame.
  std::array<std::array<double, 3>, 3> world_from_camera() const;

  /// Camera mounted on a robot at (x, y) facing `heading`.
  static CameraModel robot_mounted(Vec2 robot, double heading, double mount_height = 0.5,
                                   double pitch_down = 0.2617993877991494, int width = 640, int height = 480,
                                   double focal = 320.0);
};

/// Normalized pixel of a world point, or nullopt when the point is on or
/// behind the camera plane or falls outside the image.
std::optional<Pixel> project_to_pixel(const CameraModel& camera, Vec3 world);

/// Intersection of the pixel ray with the z = 0 ground plane, or nullopt when
/// the ray is parallel to or points away from it.
std::optional<Vec2> backproject_to_ground(const CameraModel& camera, Pixel pixel);

inline constexpr int kLocBins = 1024;

/// Throws std::out_of_range for values outside [0, 1].
int encode_loc(double value);
/// Throws std::out_of_range for indices outside 0..1023.
double decode_loc(int index);
std::string loc_token(int index);

/// Thrown by the prompt and path-string parsers; names the offending token.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GoalSpec {
  std::optional<Vec3> world;
  std::optional<Pixel> pixel;
  std::string prompt;
};

std::string format_goal_prompt(Pixel goal);
/// Token indices (x, y) of a goal prompt.
std::pair<int, int> parse_goal_prompt(std::string_view prompt);
GoalSpec make_goal(Pixel goal);

/// Each point serializes as "<locXXXX><locYYYY>".
std::string format_path_string(std::span<const Pixel> points);
std::vector<std::pair<int, int>> parse_path_indices(std::string_view text);
std::vector<Pixel> parse_path_string(std::string_view text);

/// Arc length over chord length. Throws std::invalid_argument with fewer than
/// two points or coincident endpoints.
double curvature(std::span<const Vec2> path);

}  // namespace affordnav

#endif  // AFFORDNAV_PATHSPACE_HPP
