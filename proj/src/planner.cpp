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

#include "affordnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "affordnav/rng.hpp"

namespace affordnav {

Vec2 to_world(const Pose2& pose, Vec2 local) { return pose.position + rotate(local, pose.heading); }

void PlannerRequest::validate() const {
  if (k < 1) throw std::invalid_argument("PlannerRequest: k must be >= 1");
  if (!(spread >= 0.0)) throw std::invalid_argument("PlannerRequest: spread must be non-negative");
  const double d = distance(robot.position, goal);
  if (!(d > 0.0)) throw std::invalid_argument("PlannerRequest: goal coincides with the robot");
  if (d > planning_radius) throw std::invalid_argument("PlannerRequest: goal beyond the planning radius");
}

void attach_pixels(CandidatePath& path, const CameraModel& camera) {
  std::vector<Pixel> px;
  for (const Vec2& p : path.world_points) {
    const auto q = project_to_pixel(camera, {p.x, p.y, 0.0});
    if (!q) {
      path.pixel_points.reset();
      return;
    }
    px.push_back(*q);
  }
  path.pixel_points = std::move(px);
}

std::vector<CandidatePath> sample_candidates(const PlannerRequest& request) {
  request.validate();
  Rng rng(derive_seed(request.seed, "planner/sample"));
  const Vec2 p0 = request.robot.position, g = request.goal;
  const Vec2 chord = g - p0;
  const Vec2 perp = (1.0 / norm(chord)) * Vec2{-chord.y, chord.x};
  const Vec2 mid = 0.5 * (p0 + g);
  constexpr int kDense = 33;

  std::vector<CandidatePath> out;
  out.reserve(static_cast<std::size_t>(request.k));
  for (int i = 0; i < request.k; ++i) {
    const double lateral = request.spread > 0.0 ? rng.normal(0.0, request.spread) : 0.0;
    // Control point chosen so the curve passes through the offset midpoint at t = 1/2.
    const Vec2 through = mid + lateral * perp;
    const Vec2 ctrl = 2.0 * through - mid;
    std::vector<Vec2> dense;
    dense.reserve(kDense);
    for (int s = 0; s < kDense; ++s) {
      const double t = static_cast<double>(s) / (kDense - 1);
      dense.push_back((1 - t) * (1 - t) * p0 + 2 * (1 - t) * t * ctrl + t * t * g);
    }
    dense.back() = g;
    CandidatePath path;
    path.world_points = resample_polyline(dense, kWaypointsPerPath);
    path.tag = "sampled";
    if (request.camera) attach_pixels(path, *request.camera);
    out.push_back(std::move(path));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario fixtures

namespace {

ScriptedRoute route(std::string tag, std::initializer_list<Vec2> pts) { return {std::move(tag), pts}; }

std::vector<Scenario> make_registry() {
  std::vector<Scenario> reg;

  Scenario sr;
  sr.id = "stairs_vs_ramp";
  sr.description = "Plateau reachable by a 6-step staircase (0.1 m risers) or a 0.15-gradient ramp";
  sr.start = {{2.0, 8.0}, 0.0};
  sr.goal = {13.0, 8.0};
  for (double d : {0.0, 0.3, -0.3, 0.6, -0.6}) {
    sr.routes.push_back(route("via_stairs", {{0, 0}, {3.5, 3.5 + d}, {6.5, 3.5 + d}, {8.5, 3.5 + d}, {11, 0}}));
  }
  for (double d : {0.0, 0.3, -0.3, 0.6, -0.6}) {
    sr.routes.push_back(route("via_ramp", {{0, 0}, {3, -3.5 + d}, {5.5, -3.5 + d}, {8.5, -3.5 + d}, {11, 0}}));
  }
  reg.push_back(std::move(sr));

  Scenario lab;
  lab.id = "lab_obstacle";
  lab.description = "1 m wall across the direct line to the goal; 8 of 10 candidates pass through it";
  lab.start = {{2.0, 6.0}, 0.0};
  lab.goal = {10.0, 6.0};
  for (double y : {-2.1, -1.5, -0.9, -0.3, 0.3, 0.9, 1.5, 2.1}) {
    lab.routes.push_back(route("through_wall", {{0, 0}, {2, y}, {4, y}, {6, y}, {8, 0}}));
  }
  lab.routes.push_back(route("around_wall", {{0, 0}, {2.5, 4.6}, {5, 4.6}, {6.5, 3}, {8, 0}}));
  lab.routes.push_back(route("around_wall", {{0, 0}, {2.5, -4.6}, {5, -4.6}, {6.5, -3}, {8, 0}}));
  reg.push_back(std::move(lab));

  return reg;
}

ElevationMap grid(int w, int h, auto&& height_of) {
  std::vector<double> heights(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) heights[static_cast<std::size_t>(r) * w + c] = height_of(c, r);
  }
  return ElevationMap(w, h, 0.1, std::move(heights));
}

}  // namespace

const std::vector<Scenario>& scenario_registry() {
  static const std::vector<Scenario> reg = make_registry();
  return reg;
}

const Scenario& find_scenario(std::string_view id) {
  for (const auto& s : scenario_registry()) {
    if (s.id == id) return s;
  }
  throw std::invalid_argument("unknown scenario: " + std::string(id));
}

std::vector<std::string> scenario_ids() {
  std::vector<std::string> ids;
  for (const auto& s : scenario_registry()) ids.push_back(s.id);
  return ids;
}

// Worlds are 0.1 m grids; all feature boundaries fall on cell edges.
ElevationMap build_scenario_world(std::string_view id) {
  if (id == "stairs_vs_ramp") {
    return grid(160, 160, [](int c, int r) {
      if (c >= 100) return 0.6;
      if (r >= 100 && r < 130 && c >= 76) return 0.1 * ((c - 76) / 4 + 1);
      if (r >= 30 && r < 60 && c >= 60) return 0.15 * ((c - 60) + 0.5) * 0.1;
      return 0.0;
    });
  }
  if (id == "lab_obstacle") {
    return grid(120, 120, [](int c, int r) { return (c >= 55 && c < 60 && r >= 25 && r < 95) ? 1.0 : 0.0; });
  }
  throw std::invalid_argument("unknown scenario: " + std::string(id));
}

ElevationMap build_heatmap_world() {
  return grid(160, 100, [](int c, int r) {
    if (c < 30) return 0.0;
    if (c < 70) return 0.1 * ((c - 30) / 4 + 1);
    if (c >= 130 && c < 134 && r >= 20 && r < 80) return 2.0;
    return 1.0;
  });
}

std::vector<CandidatePath> scripted_candidates(std::string_view id, const Pose2& pose) {
  const Scenario& s = find_scenario(id);
  std::vector<CandidatePath> out;
  for (const auto& r : s.routes) {
    CandidatePath p;
    p.tag = r.tag;
    for (const Vec2& q : r.points) p.world_points.push_back(to_world(pose, q));
    out.push_back(std::move(p));
  }
  return out;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& r : s.routes) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Vec2& p : r.points) pts.push_back({p.x, p.y});
    routes.push_back({{"tag", r.tag}, {"points", pts}});
  }
  return {{"id", s.id},
          {"description", s.description},
          {"start", {{"x", s.start.position.x}, {"y", s.start.position.y}, {"heading", s.start.heading}}},
          {"goal", {s.goal.x, s.goal.y}},
          {"routes", routes}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.id = j.at("id").get<std::string>();
  s.description = j.value("description", "");
  const auto& st = j.at("start");
  s.start = {{st.at("x").get<double>(), st.at("y").get<double>()}, st.at("heading").get<double>()};
  s.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
  for (const auto& r : j.at("routes")) {
    ScriptedRoute route{r.at("tag").get<std::string>(), {}};
    for (const auto& p : r.at("points")) route.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (route.points.size() != kWaypointsPerPath) {
      throw std::invalid_argument("scenario " + s.id + ": every route needs exactly 5 points");
    }
    s.routes.push_back(std::move(route));
  }
  return s;
}

ScriptedPlanner::ScriptedPlanner(std::vector<CandidatePath> routes, double attach_radius)
    : routes_(std::move(routes)), attach_radius_(attach_radius) {
  if (routes_.empty()) throw std::invalid_argument("ScriptedPlanner: no routes");
  for (const auto& r : routes_) {
    if (r.world_points.empty()) throw std::invalid_argument("ScriptedPlanner: empty route");
  }
}

std::vector<CandidatePath> ScriptedPlanner::plan(const PlannerRequest& request) {
  const Vec2 robot = request.robot.position;
  std::vector<CandidatePath> near, all;
  for (const auto& r : routes_) {
    const auto& pts = r.world_points;
    const Projection proj = project_onto_polyline(pts, robot);
    std::vector<Vec2> rest;
    if (proj.distance > 1e-9) rest.push_back(robot);
    rest.push_back(proj.point);
    for (std::size_t i = proj.segment + 1; i < pts.size(); ++i) {
      if (!(pts[i] == rest.back())) rest.push_back(pts[i]);
    }
    CandidatePath p;
    p.tag = r.tag;
    p.world_points = resample_polyline(rest, kWaypointsPerPath);
    if (request.camera) attach_pixels(p, *request.camera);
    if (proj.distance <= attach_radius_) near.push_back(p);
    all.push_back(std::move(p));
  }
  return near.empty() ? all : near;
}

}  // namespace affordnav
