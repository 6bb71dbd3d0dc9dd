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

#include "affordnav/pathspace.hpp"
#include "doctest.h"
#include "properties.hpp"

using namespace affordnav;

TEST_CASE("projection round trip over 1000 random camera poses") {
  const auto o = props::projection_roundtrip_sweep(1000, 17);
  CHECK(o.checked == 1000);
  CHECK_MESSAGE(o.ok(), o.first_failure);
  CHECK(o.worst < 1e-6);
}

TEST_CASE("camera frame conventions") {
  const auto cam = CameraModel::robot_mounted({0, 0}, 0.0, 0.5, 0.0);
  // straight ahead at camera height lands on the principal point
  const auto c = project_to_pixel(cam, {5.0, 0.0, 0.5});
  REQUIRE(c);
  CHECK(c->u == doctest::Approx(0.5));
  CHECK(c->v == doctest::Approx(0.5));
  // left of the optical axis is the left half of the image; below is the bottom half
  CHECK(project_to_pixel(cam, {5.0, 1.0, 0.5})->u < 0.5);
  CHECK(project_to_pixel(cam, {5.0, 0.0, 0.0})->v > 0.5);
  // behind the camera and outside the image are rejected
  CHECK_FALSE(project_to_pixel(cam, {-5.0, 0.0, 0.0}));
  CHECK_FALSE(project_to_pixel(cam, {1.0, 5.0, 0.5}));
  // a level camera never sees the ground above the horizon
  CHECK_FALSE(backproject_to_ground(cam, {0.5, 0.3}));
  CHECK_FALSE(backproject_to_ground(cam, {0.5, 0.5}));

  const auto down = CameraModel::robot_mounted({1, 2}, std::numbers::pi / 2);
  const auto g = backproject_to_ground(down, {0.5, 0.5});
  REQUIRE(g);
  CHECK(g->x == doctest::Approx(1.0));
  CHECK(g->y == doctest::Approx(2.0 + 0.5 / std::tan(down.pitch)));
}

TEST_CASE("location codec") {
  const auto o = props::codec_sweep(10000, 4);
  CHECK_MESSAGE(o.ok(), o.first_failure);
  CHECK(o.worst <= 0.5 / kLocBins + 1e-15);
  CHECK(encode_loc(0.0) == 0);
  CHECK(encode_loc(1.0) == 1023);
  CHECK(encode_loc(0.5) == 512);
  CHECK(decode_loc(0) == doctest::Approx(0.5 / 1024));
  CHECK_THROWS_AS(encode_loc(1.0001), std::out_of_range);
  CHECK_THROWS_AS(encode_loc(-0.0001), std::out_of_range);
  CHECK_THROWS_AS(encode_loc(std::nan("")), std::out_of_range);
  CHECK_THROWS_AS(decode_loc(1024), std::out_of_range);
  CHECK(loc_token(7) == "<loc0007>");
}

TEST_CASE("goal prompt grammar") {
  CHECK(format_goal_prompt({0.5, 0.25}) == "Navigate to x=<loc0512>, y=<loc0256>.");
  CHECK(parse_goal_prompt("Navigate to x=<loc0512>, y=<loc0256>.") == std::pair{512, 256});
  const auto o = props::prompt_fuzz(10000, 21);
  CHECK(o.checked == 10000);
  CHECK_MESSAGE(o.ok(), o.first_failure);
  for (const char* bad : {"Navigate to x=<loc0512>, y=<loc0256>", "Navigate to x=<loc512>, y=<loc0256>.",
                          "Navigate to x=<loc2048>, y=<loc0256>.", "navigate to x=<loc0512>, y=<loc0256>.",
                          "Navigate to x=<loc0512>, y=<loc0256>. ", "Navigate to x=<locabcd>, y=<loc0256>."}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_goal_prompt(bad), ParseError);
  }
  const GoalSpec g = make_goal({0.1, 0.9});
  CHECK(g.prompt == format_goal_prompt({0.1, 0.9}));
}

TEST_CASE("path strings") {
  const std::vector<Pixel> pts{{0.0, 1.0}, {0.5, 0.25}};
  const std::string s = format_path_string(pts);
  CHECK(s == "<loc0000><loc1023><loc0512><loc0256>");
  const auto back = parse_path_string(s);
  REQUIRE(back.size() == 2u);
  CHECK(back[1].u == doctest::Approx(512.5 / 1024));
  CHECK(parse_path_string("").empty());
  try {
    parse_path_indices("<loc0001><loc0002><loc0003>");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("<loc0003>") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_path_indices("<loc0001><loc02>"), ParseError);
  CHECK_THROWS_AS(parse_path_indices("<loc0001> <loc0002>"), ParseError);
}

TEST_CASE("curvature") {
  const std::vector<Vec2> straight{{0, 0}, {1, 0}, {2, 0}};
  CHECK(curvature(straight) == 1.0);
  const std::vector<Vec2> corner{{0, 0}, {1, 0}, {1, 1}};
  CHECK(curvature(corner) == doctest::Approx(2.0 / std::sqrt(2.0)));
  std::vector<Vec2> semi;
  for (int i = 0; i <= 2000; ++i) {
    const double a = std::numbers::pi * i / 2000.0;
    semi.push_back({std::cos(a), std::sin(a)});
  }
  CHECK(curvature(semi) == doctest::Approx(std::numbers::pi / 2).epsilon(0.01 / (std::numbers::pi / 2)));
  const std::vector<Vec2> loop{{0, 0}, {1, 0}, {0, 0}};
  CHECK_THROWS_AS(curvature(loop), std::invalid_argument);
  CHECK_THROWS_AS(curvature(std::vector<Vec2>{{0, 0}}), std::invalid_argument);

  // >= 1 always; equal to 1 exactly for collinear monotone paths
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    auto p = oracle::random_polyline(rng, 8);
    p.push_back({p.front().x + 1.0, p.front().y});
    CHECK(curvature(p) >= 1.0);
    const double t0 = rng.uniform(), slope = rng.uniform(-3, 3);
    std::vector<Vec2> line;
    double t = t0;
    for (int i = 0; i < 6; ++i, t += rng.uniform(0.1, 1.0)) line.push_back({t, slope * t});
    CHECK(curvature(line) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("candidate path JSON") {
  CandidatePath p;
  p.world_points = {{0, 0}, {1, 1}};
  p.pixel_points = std::vector<Pixel>{{0.5, 0.9}, {0.5, 0.6}};
  p.per_point_affordance = std::vector<double>{0.9, 0.4};
  p.cumulative_affordance = 0.4;
  p.tag = "ramp";
  const auto back = candidate_path_from_json(to_json(p));
  CHECK(back.world_points == p.world_points);
  CHECK(*back.pixel_points == *p.pixel_points);
  CHECK(*back.cumulative_affordance == 0.4);
  CHECK(back.tag == "ramp");
  p.cumulative_affordance = 0.9;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.cumulative_affordance.reset();
  p.pixel_points->pop_back();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
