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

#ifndef AFFORDNAV_EMBODIMENT_HPP
#define AFFORDNAV_EMBODIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affordnav/geometry.hpp"
#include "affordnav/terrain.hpp"

namespace affordnav {

enum class EmbodimentKind : std::uint8_t { legged, wheeled };

std::string_view to_string(EmbodimentKind kind);
EmbodimentKind embodiment_kind_from_string(std::string_view name);

/// Capability envelope of a kinematic agent. Step limits apply to the height
/// change between adjacent cells; slope is measured over `slope_baseline`
/// metres along the direction of motion.
struct EmbodimentSpec {
  EmbodimentKind kind = EmbodimentKind::legged;
  double max_step_up = 0.20;
  double max_step_down = 0.30;
  double max_slope = 0.6;
  double speed = 1.0;
  double ride_height = 0.35;
  double body_length = 0.6;
  double body_width = 0.4;
  double slope_baseline = 0.6;
  double turn_rate = 1.5;  // rad/s, rotate-in-place
  // wheeled only
  double wheelbase = 0.3;
  double max_steering = 0.6;
  double lookahead = 0.6;

  static EmbodimentSpec legged();
  static EmbodimentSpec wheeled();
  static EmbodimentSpec by_name(std::string_view name);
  /// Throws std::invalid_argument when a threshold is not positive.
  void validate() const;
};

struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double heading = 0.0;
  Vec2 v_planar;
  double v_z = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double t = 0.0;

  Vec2 position() const noexcept { return {x, y}; }
};

/// Legged agents consume `velocity`; wheeled agents consume `speed` and `steering`.
struct Command {
  Vec2 velocity;
  double speed = 0.0;
  double steering = 0.0;
};

struct StepResult {
  AgentState state;
  Vec2 commanded_velocity;  // planar velocity the command asked for
  bool blocked = false;     // motion cancelled by a step, slope, or the map edge
  bool left_map = false;
  bool dropped = false;     // descended more than max_step_down in one transition
};

/// Support height under the agent's footprint (mean of samples along the body
/// axis, each clamped to the admissible band around the centre cell).
double support_height(const ElevationMap& map, const EmbodimentSpec& spec, double x, double y, double heading);

/// Upright state resting on the terrain at (x, y).
AgentState make_agent_state(const ElevationMap& map, const EmbodimentSpec& spec, double x, double y, double heading);

StepResult step_agent(const AgentState& state, const EmbodimentSpec& spec, const Command& command,
                      const ElevationMap& map, double dt);

/// Forward-progress termination: true iff t >= grace and the realized velocity
/// projected on the commanded direction is below tau. Throws on a zero command.
bool wall_terminated(Vec2 v_realized, Vec2 v_commanded, double tau = 0.3, double t = 0.0, double grace = 0.5);

/// v_z < -1 m/s, or |roll| / |pitch| beyond 45 degrees.
bool fall_terminated(const AgentState& state);

enum class Termination : std::uint8_t { completed, wall, fall, timeout };
std::string_view to_string(Termination t);

struct RolloutConfig {
  double dt = 0.05;
  double horizon = 1.5;   // metres of travel
  double time_cap = 10.0;  // seconds
  double tau = 0.3;
  double grace = 0.5;
  double gamma = 0.99;
};

struct RolloutOutcome {
  bool success = false;
  Termination termination = Termination::timeout;
  std::vector<AgentState> trace;  // includes the start state
  double return_value = 0.0;      // discounted reward sum, -1 reward on failure
};

/// Drives the agent in a straight line along `direction` until it covers the
/// horizon or a termination rule fires.
RolloutOutcome rollout(const ElevationMap& map, const EmbodimentSpec& spec, const AgentState& start,
                       double direction, const RolloutConfig& config = {});

struct PursuitCommand {
  Command command;
  bool complete = false;
  Vec2 lookahead_point;
  double curvature = 0.0;
};

/// Pure pursuit toward the point `spec.lookahead` metres beyond the agent's
/// projection on `path`. Legged agents get a direct velocity toward it.
PursuitCommand pure_pursuit_command(const AgentState& state, std::span<const Vec2> path, const EmbodimentSpec& spec);

/// One JSON object per line, one line per state.
void write_trace_jsonl(std::ostream& os, std::span<const AgentState> trace);

}  // namespace affordnav

#endif  // AFFORDNAV_EMBODIMENT_HPP
