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


#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "affordnav/datapipe.hpp"
#include "affordnav/embodiment.hpp"
#include "affordnav/rng.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace affordnav;

namespace {

/// A straight or gently curving drive sampled at 10 Hz.
OdometryLog synthetic_log(double length, double turn_rate = 0.0, double speed = 1.0) {
  OdometryLog log;
  double x = 0.0, y = 0.0, h = 0.0;
  const double dt = 0.1;
  for (int i = 0; i * dt * speed <= length; ++i) {
    log.poses.push_back({i * dt, x, y, 0.0, h});
    x += speed * dt * std::cos(h);
    y += speed * dt * std::sin(h);
    h += turn_rate * dt;
  }
  return log;
}

LabeledExample with_curvature(double c, std::size_t frame) {
  LabeledExample e;
  e.curvature = c;
  e.frame = frame;
  e.usable = true;
  return e;
}

}  // namespace

TEST_CASE("hindsight labels reproduce a path authored in pixel space") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const LogPose ref{0.0, rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-1, 1),
                      rng.uniform(-std::numbers::pi, std::numbers::pi)};
    OdometryLog log;
    log.poses.push_back(ref);
    const CameraModel cam = log.camera.at(ref);
    // five pixels marching from the bottom of the image towards the horizon
    std::vector<Pixel> authored;
    double v = rng.uniform(0.85, 0.95);
    for (int k = 0; k < 5; ++k) {
      authored.push_back({rng.uniform(0.2, 0.8), v});
      v -= rng.uniform(0.04, 0.07);
    }
    // lift to the ground plane under the robot, which sits at height ref.z
    CameraModel level = cam;
    level.position.z -= ref.z;
    double t = 0.0;
    for (const Pixel& p : authored) {
      const auto g = backproject_to_ground(level, p);
      REQUIRE(g);
      log.poses.push_back({t += 0.5, g->x, g->y, ref.z, 0.0});
    }
    const LabeledExample ex = hindsight_label(log, 0, 1e6);
    REQUIRE(ex.usable);
    CHECK(ex.truncated);
    REQUIRE(ex.pixel_path.size() == 5u);
    for (int k = 0; k < 5; ++k) {
      CHECK(std::abs(ex.pixel_path[k].u - authored[k].u) < 1e-6);
      CHECK(std::abs(ex.pixel_path[k].v - authored[k].v) < 1e-6);
    }
    CHECK(ex.goal == ex.pixel_path.back());
    CHECK(parse_goal_prompt(ex.prompt) == std::pair{encode_loc(ex.goal.u), encode_loc(ex.goal.v)});
    CHECK(ex.curvature >= 1.0);
  }
}

TEST_CASE("hindsight labels cover only the horizon and flag truncation") {
  const auto log = synthetic_log(30.0, 0.05);
  const auto ex = hindsight_label(log, 0, 5.0);
  CHECK(ex.usable);
  CHECK_FALSE(ex.truncated);
  CHECK(ex.pixel_path.size() == 5u);
  for (const auto& p : ex.pixel_path) {
    CHECK(p.u >= 0.0);
    CHECK(p.u <= 1.0);
    CHECK(p.v >= 0.0);
    CHECK(p.v <= 1.0);
  }
  // points nearer the robot sit lower in the image
  CHECK(ex.pixel_path.front().v > ex.pixel_path.back().v);
  const auto end = hindsight_label(log, log.poses.size() - 30, 15.0, HorizonTag::long_horizon);
  CHECK(end.truncated);
  CHECK(end.horizon == HorizonTag::long_horizon);
  CHECK_THROWS_AS(hindsight_label(log, log.poses.size(), 5.0), std::out_of_range);
  OdometryLog still;
  still.poses = {{0, 1, 1, 0, 0}, {1, 1, 1, 0, 0}};
  CHECK_THROWS_AS(hindsight_label(still, 0, 5.0), std::invalid_argument);
}

TEST_CASE("paths that leave the view are unusable") {
  OdometryLog log;
  log.poses = {{0, 0, 0, 0, 0}, {1, -1, 0, 0, 0}, {2, -2, 0, 0, 0}};
  const auto ex = hindsight_label(log, 0, 10.0);
  CHECK_FALSE(ex.usable);
  std::ostringstream os;
  const std::vector<LabeledExample> v{ex};
  write_examples_jsonl(os, v);
  CHECK(os.str().empty());
}

TEST_CASE("curvature filter keeps the most curved examples") {
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 100; ++i) ex.push_back(with_curvature(1.0 + i * 0.01, static_cast<std::size_t>(i)));
  const auto r = curvature_filter(ex, 10);
  REQUIRE(r.examples.size() == 10u);
  CHECK(r.warning.empty());
  // the top 3 are treated as outliers
  CHECK(r.examples.front().frame == 96u);
  CHECK(r.examples.back().frame == 87u);
  std::set<std::size_t> frames;
  for (const auto& e : ex) frames.insert(e.frame);
  for (const auto& e : r.examples) CHECK(frames.count(e.frame) == 1u);

  const auto all = curvature_filter(ex, 500);
  CHECK(all.examples.size() == 97u);
  CHECK_FALSE(all.warning.empty());
  CHECK(curvature_filter(ex, 10, 0.0).examples.front().frame == 99u);
  CHECK_THROWS_AS(curvature_filter(ex, 10, 1.0), std::invalid_argument);

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabeledExample> v;
    const auto n = rng.below(40);
    for (std::size_t i = 0; i < n; ++i) v.push_back(with_curvature(1.0 + rng.uniform(), i));
    const auto keep = rng.below(50);
    CHECK(curvature_filter(v, keep).examples.size() <= keep);
  }
}

TEST_CASE("horizon mixing balances short and long labels") {
  const auto log = synthetic_log(120.0, 0.02);
  const auto a = mix_horizons(log, 5.0, 15.0, 3);
  const auto b = mix_horizons(log, 5.0, 15.0, 3);
  REQUIRE(a.examples.size() == b.examples.size());
  for (std::size_t i = 0; i < a.examples.size(); ++i) CHECK(a.examples[i].horizon == b.examples[i].horizon);
  CHECK(a.n_short + a.n_long == a.examples.size());
  CHECK(a.n_long > 10u);
  // frames with a full long horizon ahead alternate; the last 15 m can only
  // take short labels, which the warning reports
  std::size_t s = 0, l = 0;
  for (const auto& e : a.examples) {
    if (e.frame * 0.1 > 120.0 - 15.0 - 0.5) break;
    (e.horizon == HorizonTag::long_horizon ? l : s) += 1;
  }
  CHECK(s + l > 90u);
  CHECK((s > l ? s - l : l - s) <= 1u);
  CHECK(a.n_short > a.n_long);
  CHECK(a.warning.find("fell back") != std::string::npos);
  for (const auto& e : a.examples) CHECK(e.horizon_m == (e.horizon == HorizonTag::long_horizon ? 15.0 : 5.0));
  CHECK_THROWS_AS(mix_horizons(log, 15.0, 5.0), std::invalid_argument);
}

TEST_CASE("logs from mission traces") {
  ElevationMap flat(100, 100, 0.1);
  for (double& h : flat.heights()) h = 0.25;
  const auto spec = EmbodimentSpec::legged();
  AgentState s = make_agent_state(flat, spec, 1.0, 5.0, 0.0);
  std::vector<AgentState> trace{s};
  Command cmd;
  cmd.velocity = {1.0, 0.0};
  for (int i = 0; i < 100; ++i) {
    s = step_agent(s, spec, cmd, flat, 0.05).state;
    trace.push_back(s);
  }
  const auto log = log_from_trace(trace, spec);
  CHECK(log.poses.size() == 51u);
  for (const auto& p : log.poses) CHECK(p.z == doctest::Approx(0.25));
  for (std::size_t i = 1; i < log.poses.size(); ++i) CHECK(log.poses[i].t > log.poses[i - 1].t);
  OdometryLog bad = log;
  bad.poses[3].t = bad.poses[2].t;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const auto mix = mix_horizons(log, 1.0, 3.0, 1, 5);
  std::ostringstream os;
  write_examples_jsonl(os, mix.examples);
  std::istringstream in(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["pixel_path"].size() == 5u);
    CHECK(j["prompt"].get<std::string>().rfind("Navigate to x=<loc", 0) == 0);
    ++n;
  }
  CHECK(n == mix.examples.size());
}
