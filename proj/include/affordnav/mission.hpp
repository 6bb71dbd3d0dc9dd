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

#ifndef AFFORDNAV_MISSION_HPP
#define AFFORDNAV_MISSION_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affordnav/affordance.hpp"
#include "affordnav/embodiment.hpp"
#include "affordnav/pathspace.hpp"
#include "affordnav/planner.hpp"
#include "affordnav/rng.hpp"
#include "affordnav/terrain.hpp"
#include "json.hpp"

namespace affordnav {

/// Scores every waypoint: the minimum affordance over query points spaced at
/// most `spacing` metres along the waypoint's outgoing segment, queried with
/// that segment's bearing snapped to the eight training headings. The last
/// waypoint reuses the previous bearing. Points off the map score 0.
void score_paths(const AffordanceModel& model, const ElevationMap& map, std::span<CandidatePath> paths,
                 double spacing = 1.0);
CandidatePath score_path(const AffordanceModel& model, const ElevationMap& map, CandidatePath path,
                         double spacing = 1.0);

enum class SelectionMode : std::uint8_t { greedy, softmax };
std::string_view to_string(SelectionMode m);
SelectionMode selection_mode_from_string(std::string_view name);

struct SelectionConfig {
  SelectionMode mode = SelectionMode::softmax;
  double beta = 0.1;
  double reject_threshold = 0.3;  // candidates scoring below are discarded
  std::uint64_t seed = 0;

  void validate() const;
};

/// Index of the chosen candidate, or nullopt when none reaches the threshold.
/// Candidates must carry a cumulative affordance.
std::optional<std::size_t> select_path(std::span<const CandidatePath> candidates, const SelectionConfig& config,
                                       Rng& rng);
std::optional<std::size_t> select_path(std::span<const CandidatePath> candidates, const SelectionConfig& config);

enum class Phase : std::uint8_t { plan, track, rotate, done, failed };
std::string_view to_string(Phase p);

struct MissionConfig {
  int k = 10;
  int m = 3;                      // track up to waypoint index m - 1 before replanning
  double waypoint_tolerance = 0.5;
  double plan_timeout = 20.0;     // seconds per TRACK phase
  double episode_cap = 120.0;     // seconds per episode
  double dt = 0.05;
  double rotate_increment = 0.5235987755982988;  // 30 degrees
  double waypoint_spacing = 10.0;  // 0 keeps the given waypoints as they are
  double query_spacing = 1.0;
  double planner_spread = 1.5;
  double tau = 0.3;
  double grace = 0.5;
  bool ablate_modulation = false;
  SelectionConfig selection;
  // camera mount
  double camera_height = 0.5;
  double camera_pitch = 0.2617993877991494;  // 15 degrees down
  int image_width = 640;
  int image_height = 480;
  double focal = 320.0;

  void validate() const;
};

struct ReplanRecord {
  double t = 0.0;
  Pose2 pose;
  std::vector<CandidatePath> candidates;
  std::optional<std::size_t> chosen;
};

struct EpisodeResult {
  bool success = false;
  std::string termination;  // "goal_reached", "collision", "fall", "left_map", "timeout", "no_feasible_plan",
                            // "rotate_exhausted", "no_progress"
  std::vector<AgentState> trace;
  std::vector<ReplanRecord> replans;
  std::vector<Phase> phases;  // phase sequence with consecutive repeats collapsed
  std::size_t steps = 0;
  double sim_time = 0.0;
  Vec2 final_position;
  /// Tag of the first chosen candidate, empty if none was chosen.
  std::string first_choice_tag() const;
};

nlohmann::json to_json(const EpisodeResult& r, bool include_trace = true);

/// Inserts intermediate waypoints so no leg (starting from `start`) is longer
/// than `spacing`; a spacing of 0 returns the waypoints unchanged.
std::vector<Vec2> densify_waypoints(Vec2 start, std::span<const Vec2> waypoints, double spacing);

/// Runs one receding-horizon episode. `model` may be null only with
/// `ablate_modulation`, which picks uniformly among raw candidates.
EpisodeResult run_mission(const ElevationMap& world, const EmbodimentSpec& spec, Planner& planner,
                          const AffordanceModel* model, const Pose2& start, std::span<const Vec2> waypoints,
                          const MissionConfig& config, std::uint64_t seed);

struct BenchmarkRow {
  std::string scenario;
  std::string embodiment;
  bool modulation = true;
  int episodes = 0;
  int successes = 0;
  std::map<std::string, int> first_choice_tags;
  double mean_time = 0.0;
  double success_rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
  /// Fraction of episodes whose first chosen path carried `tag`.
  double tag_rate(const std::string& tag) const;
};

/// Seeded episodes of one scripted scenario. Episode i uses
/// derive_seed(seed, i); the world, start and goal come from the scenario.
BenchmarkRow run_scenario_benchmark(std::string_view scenario, const EmbodimentSpec& spec,
                                    const AffordanceModel* model, const MissionConfig& config, int episodes,
                                    std::uint64_t seed, std::vector<EpisodeResult>* results = nullptr);

std::string benchmark_markdown(std::span<const BenchmarkRow> rows);
std::string benchmark_csv(std::span<const BenchmarkRow> rows);

/// Colour overlay: terrain in grey, candidates shaded from red (low score) to
/// green (high), the chosen path in blue and the executed trace in white.
void write_overlay_ppm(std::ostream& os, const ElevationMap& map, std::span<const CandidatePath> candidates,
                       std::optional<std::size_t> chosen, std::span<const AgentState> trace);

}  // namespace affordnav

#endif  // AFFORDNAV_MISSION_HPP
