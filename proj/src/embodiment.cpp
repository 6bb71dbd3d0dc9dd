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

#include "affordnav/embodiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace affordnav {

namespace {

constexpr double kGravity = 9.81;
constexpr double kMaxTilt = std::numbers::pi / 4.0;

double clamped_sample(const ElevationMap& map, const EmbodimentSpec& spec, double center_h, Vec2 p) {
  return std::clamp(map.height_at_clamped(p.x, p.y), center_h - spec.max_step_down, center_h + spec.max_step_up);
}

bool rise_ok(const ElevationMap& map, const EmbodimentSpec& spec, int c0, int r0, int c1, int r1) {
  return map.at(c1, r1) - map.at(c0, r0) <= spec.max_step_up;
}

}  // namespace

std::string_view to_string(EmbodimentKind kind) { return kind == EmbodimentKind::legged ? "legged" : "wheeled"; }

EmbodimentKind embodiment_kind_from_string(std::string_view name) {
  if (name == "legged") return EmbodimentKind::legged;
  if (name == "wheeled") return EmbodimentKind::wheeled;
  throw std::invalid_argument("unknown embodiment: " + std::string(name));
}

EmbodimentSpec EmbodimentSpec::legged() { return EmbodimentSpec{}; }

EmbodimentSpec EmbodimentSpec::wheeled() {
  EmbodimentSpec s;
  s.kind = EmbodimentKind::wheeled;
  s.max_step_up = 0.05;
  s.max_step_down = 0.12;
  s.max_slope = 0.35;
  s.speed = 1.0;
  s.ride_height = 0.15;
  s.body_length = 0.5;
  s.body_width = 0.35;
  s.wheelbase = 0.3;
  s.max_steering = 0.6;
  s.lookahead = 0.6;
  return s;
}

EmbodimentSpec EmbodimentSpec::by_name(std::string_view name) {
  return embodiment_kind_from_string(name) == EmbodimentKind::legged ? legged() : wheeled();
}

void EmbodimentSpec::validate() const {
  for (double v : {max_step_up, max_step_down, max_slope, speed, body_length, body_width, slope_baseline, turn_rate,
                   lookahead}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("embodiment thresholds must be positive");
  }
  if (!(ride_height >= 0.0)) throw std::invalid_argument("ride_height must be >= 0");
  if (kind == EmbodimentKind::wheeled && (!(wheelbase > 0.0) || !(max_steering > 0.0))) {
    throw std::invalid_argument("wheeled embodiment needs positive wheelbase and max_steering");
  }
}

double support_height(const ElevationMap& map, const EmbodimentSpec& spec, double x, double y, double heading) {
  const double center_h = map.cell_height_at(x, y);
  const Vec2 axis = unit_from_angle(heading);
  double sum = 0.0;
  for (int k = -2; k <= 2; ++k) sum += clamped_sample(map, spec, center_h, Vec2{x, y} + (k * spec.body_length / 4.0) * axis);
  return sum / 5.0;
}

AgentState make_agent_state(const ElevationMap& map, const EmbodimentSpec& spec, double x, double y, double heading) {
  AgentState s;
  s.x = x;
  s.y = y;
  s.heading = heading;
  s.z = support_height(map, spec, x, y, heading) + spec.ride_height;
  return s;
}

StepResult step_agent(const AgentState& state, const EmbodimentSpec& spec, const Command& command,
                      const ElevationMap& map, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_agent: dt must be positive");
  StepResult out;
  AgentState next = state;
  next.t = state.t + dt;
  const Vec2 p0 = state.position();

  Vec2 v_cmd;
  double new_heading = state.heading;
  if (spec.kind == EmbodimentKind::legged) {
    v_cmd = command.velocity;
    if (norm(v_cmd) > 0.0) new_heading = std::atan2(v_cmd.y, v_cmd.x);
  } else {
    const double steer = std::clamp(command.steering, -spec.max_steering, spec.max_steering);
    v_cmd = command.speed * unit_from_angle(state.heading);
    new_heading = wrap_angle(state.heading + command.speed / spec.wheelbase * std::tan(steer) * dt);
  }
  out.commanded_velocity = v_cmd;
  const Vec2 target = p0 + dt * v_cmd;

  bool blocked = false;
  if (!map.contains(target.x, target.y)) {
    blocked = true;
    out.left_map = true;
  } else if (target != p0) {
    const auto [c0, r0] = map.cell_of(p0.x, p0.y);
    const auto [c1, r1] = map.cell_of(target.x, target.y);
    if (!rise_ok(map, spec, c0, r0, c1, r1)) blocked = true;
    // Diagonal cell changes must also clear both orthogonal neighbours.
    if (!blocked && c0 != c1 && r0 != r1) {
      blocked = !rise_ok(map, spec, c0, r0, c1, r0) || !rise_ok(map, spec, c0, r0, c0, r1);
    }
    if (!blocked) {
      const Vec2 dir = (1.0 / norm(target - p0)) * (target - p0);
      const double half = spec.slope_baseline / 2.0;
      const Vec2 ahead = target + half * dir, behind = target - half * dir;
      const double slope = (map.cell_height_at(ahead.x, ahead.y) - map.cell_height_at(behind.x, behind.y)) /
                           spec.slope_baseline;
      if (slope > spec.max_slope) blocked = true;
    }
    if (!blocked && map.at(c0, r0) - map.at(c1, r1) > spec.max_step_down) out.dropped = true;
  }

  const Vec2 p1 = blocked ? p0 : target;
  next.x = p1.x;
  next.y = p1.y;
  if (!(blocked && spec.kind == EmbodimentKind::wheeled)) next.heading = new_heading;
  next.v_planar = (1.0 / dt) * (p1 - p0);

  const double prev_ground = map.cell_height_at(p0.x, p0.y);
  next.z = support_height(map, spec, p1.x, p1.y, next.heading) + spec.ride_height;
  next.v_z = (next.z - state.z) / dt;
  if (out.dropped) {
    const double drop = prev_ground - map.cell_height_at(p1.x, p1.y);
    next.v_z = std::min(next.v_z, -std::sqrt(2.0 * kGravity * drop));
  }

  const double center_h = map.cell_height_at(p1.x, p1.y);
  const Vec2 axis = unit_from_angle(next.heading);
  const Vec2 left{-axis.y, axis.x};
  const double h_front = clamped_sample(map, spec, center_h, p1 + (spec.body_length / 2.0) * axis);
  const double h_back = clamped_sample(map, spec, center_h, p1 - (spec.body_length / 2.0) * axis);
  const double h_left = clamped_sample(map, spec, center_h, p1 + (spec.body_width / 2.0) * left);
  const double h_right = clamped_sample(map, spec, center_h, p1 - (spec.body_width / 2.0) * left);
  next.pitch = std::atan2(h_front - h_back, spec.body_length);
  next.roll = std::atan2(h_left - h_right, spec.body_width);

  out.state = next;
  out.blocked = blocked;
  return out;
}

bool wall_terminated(Vec2 v_realized, Vec2 v_commanded, double tau, double t, double grace) {
  const double n = norm(v_commanded);
  if (!(n > 0.0)) throw std::invalid_argument("wall_terminated: commanded velocity must be non-zero");
  return t >= grace && dot(v_realized, v_commanded) / n < tau;
}

bool fall_terminated(const AgentState& state) {
  return state.v_z < -1.0 || std::abs(state.roll) > kMaxTilt || std::abs(state.pitch) > kMaxTilt;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::wall: return "wall";
    case Termination::fall: return "fall";
    case Termination::timeout: return "timeout";
  }
  return "timeout";
}

RolloutOutcome rollout(const ElevationMap& map, const EmbodimentSpec& spec, const AgentState& start, double direction,
                       const RolloutConfig& config) {
  if (!map.contains(start.x, start.y)) throw std::out_of_range("rollout: start outside map");
  RolloutOutcome out;
  AgentState state = start;
  if (spec.kind == EmbodimentKind::wheeled) state.heading = direction;
  out.trace.push_back(state);

  Command cmd;
  cmd.velocity = spec.speed * unit_from_angle(direction);
  cmd.speed = spec.speed;
  cmd.steering = 0.0;

  double traveled = 0.0;
  for (long steps = 1;; ++steps) {
    StepResult r = step_agent(state, spec, cmd, map, config.dt);
    r.state.t = start.t + steps * config.dt;
    traveled += distance(state.position(), r.state.position());
    state = r.state;
    out.trace.push_back(state);

    std::optional<Termination> term;
    if (r.dropped || fall_terminated(state)) {
      term = Termination::fall;
    } else if (wall_terminated(state.v_planar, r.commanded_velocity, config.tau, state.t - start.t, config.grace)) {
      term = Termination::wall;
    } else if (traveled >= config.horizon - 1e-9) {
      term = Termination::completed;
    } else if (state.t - start.t >= config.time_cap - 1e-9) {
      term = Termination::timeout;
    }
    if (term) {
      out.termination = *term;
      out.success = *term == Termination::completed;
      const bool failed = *term == Termination::wall || *term == Termination::fall;
      out.return_value = failed ? -std::pow(config.gamma, static_cast<double>(steps - 1)) : 0.0;
      return out;
    }
  }
}

PursuitCommand pure_pursuit_command(const AgentState& state, std::span<const Vec2> path, const EmbodimentSpec& spec) {
  PursuitCommand out;
  const Vec2 p = state.position();
  if (path.empty()) {
    out.complete = true;
    return out;
  }
  const Projection proj = project_onto_polyline(path, p);
  const double total = polyline_length(path);
  if (proj.arclength >= total - 1e-9) {
    bool beyond;
    if (path.size() >= 2 && total > 0.0) {
      Vec2 last_dir = path.back() - path[path.size() - 2];
      for (std::size_t i = path.size() - 1; norm(last_dir) == 0.0 && i > 0; --i) last_dir = path[i] - path[i - 1];
      beyond = dot(p - path.back(), last_dir) >= 0.0;
    } else {
      beyond = distance(p, path.back()) <= 1e-6;
    }
    if (beyond) {
      out.complete = true;
      out.lookahead_point = path.back();
      return out;
    }
  }
  const Vec2 target = point_at_arclength(path, proj.arclength + spec.lookahead);
  out.lookahead_point = target;
  const Vec2 d = target - p;
  const double dist = norm(d);
  if (dist <= 0.0) {
    out.complete = true;
    return out;
  }
  const double lateral = -std::sin(state.heading) * d.x + std::cos(state.heading) * d.y;
  out.curvature = 2.0 * lateral / (dist * dist);
  if (spec.kind == EmbodimentKind::legged) {
    out.command.velocity = (spec.speed / dist) * d;
    out.command.speed = spec.speed;
  } else {
    out.command.speed = spec.speed;
    out.command.steering = std::clamp(std::atan(out.curvature * spec.wheelbase), -spec.max_steering, spec.max_steering);
    out.command.velocity = spec.speed * unit_from_angle(state.heading);
  }
  return out;
}

void write_trace_jsonl(std::ostream& os, std::span<const AgentState> trace) {
  for (const auto& s : trace) {
    nlohmann::json j = {{"t", s.t},         {"x", s.x},         {"y", s.y},
                        {"z", s.z},         {"heading", s.heading}, {"vx", s.v_planar.x},
                        {"vy", s.v_planar.y}, {"vz", s.v_z},     {"roll", s.roll},
                        {"pitch", s.pitch}};
    os << j.dump() << '\n';
  }
}

}  // namespace affordnav
