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

#ifndef AFFORDNAV_PLANNER_HPP
#define AFFORDNAV_PLANNER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affordnav/geometry.hpp"
#include "affordnav/pathspace.hpp"
#include "affordnav/terrain.hpp"
#include "json.hpp"

namespace affordnav {

inline constexpr int kWaypointsPerPath = 5;

struct Pose2 {
  Vec2 position;
  double heading = 0.0;
};

/// World point of a robot-frame point (x forward, y left).
Vec2 to_world(const Pose2& pose, Vec2 local);

struct PlannerRequest {
  Pose2 robot;
  Vec2 goal;
  int k = 10;
  std::optional<CameraModel> camera;  // attach pixel renderings when set
  std::uint64_t seed = 0;
  double spread = 1.5;           // lateral offset standard deviation, metres
  double planning_radius = 30.0;

  void validate() const;
};

/// Candidate source queried at every replan.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::vector<CandidatePath> plan(const PlannerRequest& request) = 0;
};

/// Quadratic curves from the robot to the goal through one laterally offset
/// midpoint. Never reads terrain.
std::vector<CandidatePath> sample_candidates(const PlannerRequest& request);

class SamplingPlanner : public Planner {
 public:
  std::vector<CandidatePath> plan(const PlannerRequest& request) override { return sample_candidates(request); }
};

/// One authored route in the robot frame of the scenario start.
struct ScriptedRoute {
  std::string tag;
  std::vector<Vec2> points;
};

struct Scenario {
  std::string id;
  std::string description;
  Pose2 start;
  Vec2 goal;
  std::vector<ScriptedRoute> routes;
};

const std::vector<Scenario>& scenario_registry();
/// Throws std::invalid_argument for an unknown id.
const Scenario& find_scenario(std::string_view id);
std::vector<std::string> scenario_ids();

/// Elevation map the scenario is played on.
ElevationMap build_scenario_world(std::string_view id);
/// Composed flat + stairs + plateau-with-wall scene used for heatmaps.
ElevationMap build_heatmap_world();

/// Authored routes of `id` placed at `pose`.
std::vector<CandidatePath> scripted_candidates(std::string_view id, const Pose2& pose);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

/// Replays fixed world-frame routes. Each plan returns, for every route, the
/// part still ahead of the robot (robot position, its projection on the
/// route, the remaining vertices) resampled to five waypoints. Routes the
/// robot has strayed from by more than `attach_radius` are skipped unless
/// that would leave none.
class ScriptedPlanner : public Planner {
 public:
  explicit ScriptedPlanner(std::vector<CandidatePath> routes, double attach_radius = 1.5);
  std::vector<CandidatePath> plan(const PlannerRequest& request) override;
  const std::vector<CandidatePath>& routes() const noexcept { return routes_; }

 private:
  std::vector<CandidatePath> routes_;
  double attach_radius_;
};

/// Attaches pixel renderings when every waypoint projects into the image.
void attach_pixels(CandidatePath& path, const CameraModel& camera);

}  // namespace affordnav

#endif  // AFFORDNAV_PLANNER_HPP
