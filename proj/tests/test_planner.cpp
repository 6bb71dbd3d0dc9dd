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
#include "affordnav/planner.hpp"
#include "doctest.h"

using namespace affordnav;

namespace {

double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto directed = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = 1e300;
      for (const auto& y : q) best = std::min(best, distance(x, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

PlannerRequest basic_request(std::uint64_t seed) {
  PlannerRequest r;
  r.robot = {{1.0, 2.0}, 0.3};
  r.goal = {9.0, 5.0};
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("sampled candidates have five waypoints from robot to goal") {
  const auto req = basic_request(1);
  const auto c = sample_candidates(req);
  REQUIRE(c.size() == 10u);
  for (const auto& p : c) {
    REQUIRE(p.world_points.size() == 5u);
    CHECK(distance(p.world_points.front(), req.robot.position) < 1e-9);
    CHECK(distance(p.world_points.back(), req.goal) < 1e-9);
    CHECK(p.tag == "sampled");
    CHECK_FALSE(p.pixel_points);
  }
}

TEST_CASE("sampling is deterministic and diverse") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = sample_candidates(basic_request(seed));
    const auto b = sample_candidates(basic_request(seed));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].world_points == b[i].world_points);
    double widest = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = i + 1; j < a.size(); ++j)
        widest = std::max(widest, hausdorff(a[i].world_points, a[j].world_points));
    CHECK(widest > 0.2);
  }
  auto req = basic_request(3);
  req.spread = 0.0;
  const auto straight = sample_candidates(req);
  CHECK(straight[0].world_points == straight[5].world_points);
  req.k = 2;
  req.spread = 1.5;
  const auto two = sample_candidates(req);
  CHECK(hausdorff(two[0].world_points, two[1].world_points) > 0.2);
}

TEST_CASE("planner request validation") {
  auto req = basic_request(1);
  req.goal = req.robot.position;
  CHECK_THROWS_AS(sample_candidates(req), std::invalid_argument);
  req = basic_request(1);
  req.k = 0;
  CHECK_THROWS_AS(sample_candidates(req), std::invalid_argument);
  req = basic_request(1);
  req.goal = {100, 100};
  CHECK_THROWS_AS(sample_candidates(req), std::invalid_argument);
}

TEST_CASE("pixel renderings attach when every waypoint is in view") {
  auto req = basic_request(2);
  // a raised chase camera; a robot-mounted one never sees the robot's own footprint
  const double yaw = std::atan2(3.0, 8.0);
  const Vec2 behind{req.robot.position.x - 2.0 * std::cos(yaw), req.robot.position.y - 2.0 * std::sin(yaw)};
  req.camera = CameraModel::robot_mounted(behind, yaw, 2.0);
  int with = 0;
  for (const auto& p : sample_candidates(req)) {
    p.validate();
    with += p.pixel_points.has_value();
  }
  CHECK(with > 0);
  req.camera = CameraModel::robot_mounted(req.robot.position, yaw);
  for (const auto& p : sample_candidates(req)) CHECK_FALSE(p.pixel_points.has_value());
}

TEST_CASE("scenario fixtures") {
  CHECK(scenario_ids() == std::vector<std::string>{"stairs_vs_ramp", "lab_obstacle"});
  CHECK_THROWS_AS(find_scenario("moon"), std::invalid_argument);
  CHECK_THROWS_AS(build_scenario_world("moon"), std::invalid_argument);

  const auto& sr = find_scenario("stairs_vs_ramp");
  int stairs = 0, ramp = 0;
  for (const auto& r : sr.routes) {
    CHECK(r.points.size() == 5u);
    stairs += r.tag == "via_stairs";
    ramp += r.tag == "via_ramp";
  }
  CHECK(stairs == 5);
  CHECK(ramp == 5);
  const auto& lab = find_scenario("lab_obstacle");
  int through = 0;
  for (const auto& r : lab.routes) through += r.tag == "through_wall";
  CHECK(through == 8);
  CHECK(lab.routes.size() == 10u);

  // identity pose returns the fixture unchanged
  const auto c = scripted_candidates("lab_obstacle", Pose2{});
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i].world_points == lab.routes[i].points);
  // the start pose places every route at the robot and the goal
  for (const auto& p : scripted_candidates("stairs_vs_ramp", sr.start)) {
    CHECK(distance(p.world_points.front(), sr.start.position) < 1e-9);
    CHECK(distance(p.world_points.back(), sr.goal) < 1e-9);
  }
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& s : scenario_registry()) {
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(back.id == s.id);
    REQUIRE(back.routes.size() == s.routes.size());
    for (std::size_t i = 0; i < s.routes.size(); ++i) {
      CHECK(back.routes[i].tag == s.routes[i].tag);
      CHECK(back.routes[i].points == s.routes[i].points);
    }
  }
  auto j = scenario_to_json(scenario_registry().front());
  j["routes"][0]["points"].erase(0);
  CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
}

TEST_CASE("scenario worlds separate the embodiments") {
  const auto world = build_scenario_world("stairs_vs_ramp");
  const auto l = EmbodimentSpec::legged(), w = EmbodimentSpec::wheeled();
  RolloutConfig cfg;
  cfg.horizon = 4.0;
  // up the staircase (rows 100..129)
  CHECK(rollout(world, l, make_agent_state(world, l, 7.0, 11.5, 0.0), 0.0, cfg).success);
  CHECK_FALSE(rollout(world, w, make_agent_state(world, w, 7.0, 11.5, 0.0), 0.0, cfg).success);
  // up the ramp (rows 30..59)
  CHECK(rollout(world, l, make_agent_state(world, l, 5.5, 4.5, 0.0), 0.0, cfg).success);
  CHECK(rollout(world, w, make_agent_state(world, w, 5.5, 4.5, 0.0), 0.0, cfg).success);
  // the lab wall stops both
  const auto lab = build_scenario_world("lab_obstacle");
  CHECK_FALSE(rollout(lab, l, make_agent_state(lab, l, 4.5, 6.0, 0.0), 0.0, cfg).success);
}

TEST_CASE("scripted planner replans from the robot's position") {
  const auto& sc = find_scenario("stairs_vs_ramp");
  ScriptedPlanner planner(scripted_candidates(sc.id, sc.start));
  PlannerRequest req;
  req.robot = sc.start;
  req.goal = sc.goal;
  CHECK(planner.plan(req).size() == 10u);

  // partway along the first ramp route only nearby routes are offered
  req.robot.position = {sc.start.position.x + 4.0, sc.start.position.y - 3.5};
  const auto near = planner.plan(req);
  CHECK_FALSE(near.empty());
  for (const auto& p : near) {
    CHECK(p.tag == "via_ramp");
    REQUIRE(p.world_points.size() == 5u);
    CHECK(distance(p.world_points.front(), req.robot.position) < 1e-9);
    CHECK(distance(p.world_points.back(), sc.goal) < 1e-9);
  }
  CHECK_THROWS_AS(ScriptedPlanner({}), std::invalid_argument);
}
