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

#include "affordnav/mission.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace affordnav {

namespace {

struct QueryPoint {
  Vec2 p;
  int bin;
};

int bearing_bin(Vec2 from, Vec2 to) { return snap_heading(std::atan2(to.y - from.y, to.x - from.x)); }

/// Query points for waypoint i of `pts`, each tagged with its heading bin.
std::vector<QueryPoint> waypoint_queries(const std::vector<Vec2>& pts, std::size_t i, double spacing) {
  const std::size_t n = pts.size();
  if (n == 1) return {{pts[0], 0}};
  if (i + 1 == n) return {{pts[i], bearing_bin(pts[i - 1], pts[i])}};
  const Vec2 a = pts[i], b = pts[i + 1];
  const double len = distance(a, b);
  if (!(len > 0.0)) {
    const int bin = i > 0 ? bearing_bin(pts[i - 1], a) : 0;
    return {{a, bin}};
  }
  const int bin = bearing_bin(a, b);
  const int sub = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-9)));
  std::vector<QueryPoint> q;
  for (int j = 0; j < sub; ++j) q.push_back({a + (static_cast<double>(j) / sub) * (b - a), bin});
  return q;
}

}  // namespace

void score_paths(const AffordanceModel& model, const ElevationMap& map, std::span<CandidatePath> paths,
                 double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("score_paths: spacing must be positive");
  // Gather every in-map query so the network runs once per replan.
  struct Slot {
    std::size_t path, point;
  };
  std::vector<Slot> slots;
  std::vector<QueryPoint> queries;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const auto& pts = paths[k].world_points;
    if (pts.empty()) throw std::invalid_argument("score_paths: empty path");
    paths[k].per_point_affordance = std::vector<double>(pts.size(), 1.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (const auto& q : waypoint_queries(pts, i, spacing)) {
        if (!map.contains(q.p.x, q.p.y)) {
          (*paths[k].per_point_affordance)[i] = 0.0;
          continue;
        }
        slots.push_back({k, i});
        queries.push_back(q);
      }
    }
  }
  if (!queries.empty()) {
    Eigen::MatrixXf x(model.layout().input_size(), static_cast<Eigen::Index>(queries.size()));
    for (std::size_t j = 0; j < queries.size(); ++j) {
      const Observation obs = observe(map, queries[j].p, queries[j].bin, model.layout());
      model.encode(obs.local_map, obs.qx, obs.qy, queries[j].bin, x.col(static_cast<Eigen::Index>(j)).data());
    }
    const auto scores = model.query_batch(x);
    for (std::size_t j = 0; j < scores.size(); ++j) {
      double& v = (*paths[slots[j].path].per_point_affordance)[slots[j].point];
      v = std::min(v, scores[j]);
    }
  }
  for (auto& p : paths) {
    p.cumulative_affordance = *std::min_element(p.per_point_affordance->begin(), p.per_point_affordance->end());
  }
}

CandidatePath score_path(const AffordanceModel& model, const ElevationMap& map, CandidatePath path, double spacing) {
  score_paths(model, map, std::span<CandidatePath>(&path, 1), spacing);
  return path;
}

std::string_view to_string(SelectionMode m) { return m == SelectionMode::greedy ? "greedy" : "softmax"; }

SelectionMode selection_mode_from_string(std::string_view name) {
  if (name == "greedy") return SelectionMode::greedy;
  if (name == "softmax") return SelectionMode::softmax;
  throw std::invalid_argument("unknown selection mode: " + std::string(name));
}

void SelectionConfig::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("SelectionConfig: beta must be positive");
  if (!(reject_threshold >= 0.0 && reject_threshold <= 1.0)) {
    throw std::invalid_argument("SelectionConfig: rejection threshold must be in [0, 1]");
  }
}

std::optional<std::size_t> select_path(std::span<const CandidatePath> candidates, const SelectionConfig& config,
                                       Rng& rng) {
  config.validate();
  std::vector<std::size_t> kept;
  double best = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].cumulative_affordance) throw std::invalid_argument("select_path: unscored candidate");
    const double f = *candidates[i].cumulative_affordance;
    if (f < config.reject_threshold) continue;
    kept.push_back(i);
    best = std::max(best, f);
  }
  if (kept.empty()) return std::nullopt;
  if (config.mode == SelectionMode::greedy) {
    for (std::size_t i : kept) {
      if (*candidates[i].cumulative_affordance == best) return i;
    }
  }
  // Shifting by the maximum keeps exp() in range for tiny beta.
  std::vector<double> w(kept.size());
  double total = 0.0;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    w[j] = std::exp((*candidates[kept[j]].cumulative_affordance - best) / config.beta);
    total += w[j];
  }
  double u = rng.uniform() * total;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    if (u < w[j]) return kept[j];
    u -= w[j];
  }
  return kept.back();
}

std::optional<std::size_t> select_path(std::span<const CandidatePath> candidates, const SelectionConfig& config) {
  Rng rng(derive_seed(config.seed, "select"));
  return select_path(candidates, config, rng);
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::plan: return "plan";
    case Phase::track: return "track";
    case Phase::rotate: return "rotate";
    case Phase::done: return "done";
    case Phase::failed: return "failed";
  }
  return "?";
}

void MissionConfig::validate() const {
  if (k < 1) throw std::invalid_argument("MissionConfig: k must be >= 1");
  if (m < 2 || m > kWaypointsPerPath) throw std::invalid_argument("MissionConfig: m must be in 2..5");
  if (!(dt > 0.0) || !(plan_timeout > 0.0) || !(episode_cap > 0.0)) {
    throw std::invalid_argument("MissionConfig: time parameters must be positive");
  }
  if (!(rotate_increment > 0.0) || !(waypoint_tolerance > 0.0) || !(waypoint_spacing >= 0.0)) {
    throw std::invalid_argument("MissionConfig: increments and tolerances must be positive");
  }
  selection.validate();
}

std::string EpisodeResult::first_choice_tag() const {
  for (const auto& r : replans) {
    if (r.chosen) return r.candidates[*r.chosen].tag;
  }
  return {};
}

nlohmann::json to_json(const EpisodeResult& r, bool include_trace) {
  nlohmann::json j{{"success", r.success},
                   {"termination", r.termination},
                   {"steps", r.steps},
                   {"sim_time", r.sim_time},
                   {"final_position", {r.final_position.x, r.final_position.y}}};
  nlohmann::json phases = nlohmann::json::array();
  for (Phase p : r.phases) phases.push_back(std::string(to_string(p)));
  j["phases"] = phases;
  nlohmann::json replans = nlohmann::json::array();
  for (const auto& rp : r.replans) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& p : rp.candidates) c.push_back(to_json(p));
    replans.push_back({{"t", rp.t},
                       {"pose", {rp.pose.position.x, rp.pose.position.y, rp.pose.heading}},
                       {"candidates", c},
                       {"chosen", rp.chosen ? nlohmann::json(*rp.chosen) : nlohmann::json(nullptr)}});
  }
  j["replans"] = replans;
  if (include_trace) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& s : r.trace) tr.push_back({s.t, s.x, s.y, s.z, s.heading});
    j["trace"] = tr;
    j["trace_fields"] = {"t", "x", "y", "z", "heading"};
  }
  return j;
}

std::vector<Vec2> densify_waypoints(Vec2 start, std::span<const Vec2> waypoints, double spacing) {
  if (!(spacing >= 0.0)) throw std::invalid_argument("densify_waypoints: spacing must be non-negative");
  if (spacing == 0.0) return {waypoints.begin(), waypoints.end()};
  std::vector<Vec2> out;
  Vec2 prev = start;
  for (const Vec2& w : waypoints) {
    const int legs = std::max(1, static_cast<int>(std::ceil(distance(prev, w) / spacing - 1e-9)));
    for (int i = 1; i < legs; ++i) out.push_back(prev + (static_cast<double>(i) / legs) * (w - prev));
    out.push_back(w);
    prev = w;
  }
  return out;
}

EpisodeResult run_mission(const ElevationMap& world, const EmbodimentSpec& spec, Planner& planner,
                          const AffordanceModel* model, const Pose2& start, std::span<const Vec2> waypoints,
                          const MissionConfig& config, std::uint64_t seed) {
  config.validate();
  spec.validate();
  if (!model && !config.ablate_modulation) throw std::invalid_argument("run_mission: modulation needs a model");
  if (waypoints.empty()) throw std::invalid_argument("run_mission: no waypoints");
  if (!world.contains(start.position.x, start.position.y)) throw std::invalid_argument("run_mission: start off map");
  for (const Vec2& w : waypoints) {
    if (!world.contains(w.x, w.y)) throw std::invalid_argument("run_mission: waypoint off map");
  }

  Rng select_rng(derive_seed(seed, "mission/select"));
  const std::uint64_t planner_seed = derive_seed(seed, "mission/planner");
  std::vector<Vec2> queue = densify_waypoints(start.position, waypoints, config.waypoint_spacing);
  std::size_t next_goal = 0;

  EpisodeResult res;
  AgentState state = make_agent_state(world, spec, start.position.x, start.position.y, start.heading);
  res.trace.push_back(state);
  Phase phase = Phase::plan;
  auto enter = [&](Phase p) {
    phase = p;
    if (res.phases.empty() || res.phases.back() != p) res.phases.push_back(p);
  };
  enter(Phase::plan);

  std::vector<Vec2> tracked;
  double plan_start = 0.0;
  double rotated = 0.0;  // rotation since the last successful plan
  bool rotate_for_feasibility = false;  // some plan since the last accepted one was rejected
  std::size_t steps_in_plan = 0;
  const double cap = config.episode_cap - 1e-9;
  auto fail = [&](std::string why) {
    res.termination = std::move(why);
    enter(Phase::failed);
  };

  while (phase != Phase::done && phase != Phase::failed) {
    if (state.t >= cap) {
      fail("timeout");
      break;
    }
    const Vec2 goal = queue[next_goal];
    if (phase == Phase::plan) {
      const CameraModel cam = CameraModel::robot_mounted(state.position(), state.heading, config.camera_height,
                                                         config.camera_pitch, config.image_width,
                                                         config.image_height, config.focal);
      if (!project_to_pixel(cam, {goal.x, goal.y, 0.0})) {
        enter(Phase::rotate);
        continue;
      }
      PlannerRequest req;
      req.robot = {state.position(), state.heading};
      req.goal = goal;
      req.k = config.k;
      req.camera = cam;
      req.seed = derive_seed(planner_seed, static_cast<std::uint64_t>(res.replans.size()));
      req.spread = config.planner_spread;
      ReplanRecord rec;
      rec.t = state.t;
      rec.pose = req.robot;
      rec.candidates = planner.plan(req);
      if (rec.candidates.empty()) throw std::runtime_error("run_mission: planner returned no candidates");
      if (config.ablate_modulation) {
        rec.chosen = static_cast<std::size_t>(select_rng.below(rec.candidates.size()));
      } else {
        score_paths(*model, world, rec.candidates, config.query_spacing);
        rec.chosen = select_path(rec.candidates, config.selection, select_rng);
      }
      if (rec.chosen) {
        const auto& pts = rec.candidates[*rec.chosen].world_points;
        tracked.assign(pts.begin(), pts.begin() + std::min<std::ptrdiff_t>(config.m, static_cast<std::ptrdiff_t>(pts.size())));
        if (distance(state.position(), tracked.back()) <= config.waypoint_tolerance) tracked = pts;
        plan_start = state.t;
        steps_in_plan = 0;
        rotated = 0.0;
        rotate_for_feasibility = false;
        res.replans.push_back(std::move(rec));
        enter(Phase::track);
      } else {
        res.replans.push_back(std::move(rec));
        rotate_for_feasibility = true;
        enter(Phase::rotate);
      }
      continue;
    }

    if (phase == Phase::rotate) {
      if (rotated >= 2.0 * std::numbers::pi - 1e-9) {
        fail(rotate_for_feasibility ? "no_feasible_plan" : "rotate_exhausted");
        break;
      }
      const double bearing = std::atan2(goal.y - state.y, goal.x - state.x);
      const double dir = wrap_angle(bearing - state.heading) >= 0.0 ? 1.0 : -1.0;
      double remaining = config.rotate_increment;
      while (remaining > 1e-12 && state.t < cap) {
        const double d = std::min(remaining, spec.turn_rate * config.dt);
        const double t = state.t + config.dt;
        state = make_agent_state(world, spec, state.x, state.y, wrap_angle(state.heading + dir * d));
        state.t = t;
        remaining -= d;
        rotated += d;
        ++res.steps;
        res.trace.push_back(state);
      }
      enter(Phase::plan);
      continue;
    }

    // TRACK
    if (distance(state.position(), goal) <= config.waypoint_tolerance) {
      if (++next_goal == queue.size()) {
        res.success = true;
        res.termination = "goal_reached";
        enter(Phase::done);
      } else {
        enter(Phase::plan);
      }
      continue;
    }
    const PursuitCommand pc = pure_pursuit_command(state, tracked, spec);
    if (steps_in_plan == 0 && pc.complete) {
      fail("no_progress");  // the chosen plan asks for no motion
      break;
    }
    if (steps_in_plan > 0 && (pc.complete || distance(state.position(), tracked.back()) <= config.waypoint_tolerance ||
                              state.t - plan_start >= config.plan_timeout - 1e-9)) {
      enter(Phase::plan);
      continue;
    }
    const StepResult sr = step_agent(state, spec, pc.command, world, config.dt);
    state = sr.state;
    ++res.steps;
    ++steps_in_plan;
    res.trace.push_back(state);
    if (sr.left_map) {
      fail("left_map");
    } else if (sr.dropped || fall_terminated(state)) {
      fail("fall");
    } else if (norm(sr.commanded_velocity) > 0.0 &&
               wall_terminated(state.v_planar, sr.commanded_velocity, config.tau, state.t - plan_start, config.grace)) {
      fail("collision");
    }
  }
  res.sim_time = state.t;
  res.final_position = state.position();
  return res;
}

double BenchmarkRow::tag_rate(const std::string& tag) const {
  const auto it = first_choice_tags.find(tag);
  return episodes && it != first_choice_tags.end() ? static_cast<double>(it->second) / episodes : 0.0;
}

BenchmarkRow run_scenario_benchmark(std::string_view scenario, const EmbodimentSpec& spec,
                                    const AffordanceModel* model, const MissionConfig& config, int episodes,
                                    std::uint64_t seed, std::vector<EpisodeResult>* results) {
  if (episodes < 1) throw std::invalid_argument("run_scenario_benchmark: episodes must be >= 1");
  const Scenario& sc = find_scenario(scenario);
  const ElevationMap world = build_scenario_world(scenario);
  const std::vector<Vec2> goals{sc.goal};
  MissionConfig mc = config;
  mc.waypoint_spacing = 0.0;  // the authored routes already end at the goal
  BenchmarkRow row;
  row.scenario = sc.id;
  row.embodiment = std::string(to_string(spec.kind));
  row.modulation = !config.ablate_modulation;
  double time_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    ScriptedPlanner planner(scripted_candidates(scenario, sc.start));
    EpisodeResult r = run_mission(world, spec, planner, model, sc.start, goals, mc,
                                  derive_seed(seed, static_cast<std::uint64_t>(e)));
    ++row.episodes;
    row.successes += r.success ? 1 : 0;
    time_sum += r.sim_time;
    const std::string tag = r.first_choice_tag();
    if (!tag.empty()) ++row.first_choice_tags[tag];
    if (results) results->push_back(std::move(r));
  }
  row.mean_time = time_sum / episodes;
  return row;
}

namespace {

std::string fmt(double v, int prec) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

std::string tags_summary(const BenchmarkRow& r) {
  std::string s;
  for (const auto& [tag, n] : r.first_choice_tags) {
    if (!s.empty()) s += ' ';
    s += tag + "=" + std::to_string(n);
  }
  return s;
}

}  // namespace

std::string benchmark_markdown(std::span<const BenchmarkRow> rows) {
  std::string out = "| scenario | embodiment | modulation | episodes | success | SR (%) | mean time (s) | first choice |\n";
  out += "|---|---|---|---:|---:|---:|---:|---|\n";
  for (const auto& r : rows) {
    out += "| " + r.scenario + " | " + r.embodiment + " | " + (r.modulation ? "with" : "without") + " | " +
           std::to_string(r.episodes) + " | " + std::to_string(r.successes) + " | " + fmt(100.0 * r.success_rate(), 1) +
           " | " + fmt(r.mean_time, 2) + " | " + tags_summary(r) + " |\n";
  }
  return out;
}

std::string benchmark_csv(std::span<const BenchmarkRow> rows) {
  std::string out = "scenario,embodiment,modulation,episodes,successes,success_rate,mean_time,first_choice\n";
  for (const auto& r : rows) {
    out += r.scenario + "," + r.embodiment + "," + (r.modulation ? "1" : "0") + "," + std::to_string(r.episodes) +
           "," + std::to_string(r.successes) + "," + fmt(r.success_rate(), 4) + "," + fmt(r.mean_time, 3) + "," +
           tags_summary(r) + "\n";
  }
  return out;
}

void write_overlay_ppm(std::ostream& os, const ElevationMap& map, std::span<const CandidatePath> candidates,
                       std::optional<std::size_t> chosen, std::span<const AgentState> trace) {
  const int w = map.width_cells(), h = map.height_cells();
  std::vector<std::array<std::uint8_t, 3>> img(static_cast<std::size_t>(w) * h);
  const double lo = map.min_height(), span = std::max(map.max_height() - lo, 1e-9);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto g = static_cast<std::uint8_t>(40 + 150 * (map.at(c, r) - lo) / span);
      img[static_cast<std::size_t>(h - 1 - r) * w + c] = {g, g, g};
    }
  }
  auto plot = [&](Vec2 p, std::array<std::uint8_t, 3> rgb) {
    const int c = static_cast<int>(std::floor((p.x - map.origin_x()) / map.resolution()));
    const int r = static_cast<int>(std::floor((p.y - map.origin_y()) / map.resolution()));
    if (map.contains_cell(c, r)) img[static_cast<std::size_t>(h - 1 - r) * w + c] = rgb;
  };
  auto draw = [&](std::span<const Vec2> pts, std::array<std::uint8_t, 3> rgb) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double len = distance(pts[i], pts[i + 1]);
      const int n = std::max(1, static_cast<int>(len / (0.5 * map.resolution())));
      for (int s = 0; s <= n; ++s) plot(pts[i] + (static_cast<double>(s) / n) * (pts[i + 1] - pts[i]), rgb);
    }
  };
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (chosen && *chosen == i) continue;
    const double f = candidates[i].cumulative_affordance.value_or(0.5);
    draw(candidates[i].world_points, {static_cast<std::uint8_t>(255 * (1 - f)), static_cast<std::uint8_t>(255 * f), 0});
  }
  if (chosen && *chosen < candidates.size()) draw(candidates[*chosen].world_points, {40, 90, 255});
  for (const auto& s : trace) plot(s.position(), {255, 255, 255});
  os << "P6\n" << w << ' ' << h << "\n255\n";
  for (const auto& px : img) os.write(reinterpret_cast<const char*>(px.data()), 3);
}

}  // namespace affordnav
