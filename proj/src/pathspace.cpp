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

#include "affordnav/pathspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace affordnav {

void CandidatePath::validate() const {
  if (pixel_points && pixel_points->size() != world_points.size()) {
    throw std::invalid_argument("CandidatePath: pixel_points length differs from world_points");
  }
  if (per_point_affordance && per_point_affordance->size() != world_points.size()) {
    throw std::invalid_argument("CandidatePath: per_point_affordance length differs from world_points");
  }
  if (cumulative_affordance) {
    if (!per_point_affordance || per_point_affordance->empty()) {
      throw std::invalid_argument("CandidatePath: cumulative affordance without per-point scores");
    }
    if (*cumulative_affordance != *std::min_element(per_point_affordance->begin(), per_point_affordance->end())) {
      throw std::invalid_argument("CandidatePath: cumulative affordance is not the per-point minimum");
    }
  }
}

nlohmann::json to_json(const CandidatePath& path) {
  nlohmann::json j;
  j["world_points"] = nlohmann::json::array();
  for (const Vec2& p : path.world_points) j["world_points"].push_back({p.x, p.y});
  if (path.pixel_points) {
    j["pixel_points"] = nlohmann::json::array();
    for (const Pixel& p : *path.pixel_points) j["pixel_points"].push_back({p.u, p.v});
  }
  if (path.per_point_affordance) j["per_point_affordance"] = *path.per_point_affordance;
  if (path.cumulative_affordance) j["cumulative_affordance"] = *path.cumulative_affordance;
  if (!path.tag.empty()) j["tag"] = path.tag;
  return j;
}

CandidatePath candidate_path_from_json(const nlohmann::json& j) {
  CandidatePath path;
  for (const auto& p : j.at("world_points")) path.world_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (j.contains("pixel_points")) {
    path.pixel_points.emplace();
    for (const auto& p : j.at("pixel_points")) path.pixel_points->push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  if (j.contains("per_point_affordance")) path.per_point_affordance = j.at("per_point_affordance").get<std::vector<double>>();
  if (j.contains("cumulative_affordance")) path.cumulative_affordance = j.at("cumulative_affordance").get<double>();
  path.tag = j.value("tag", "");
  path.validate();
  return path;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("CameraModel: focal lengths must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("CameraModel: image size must be positive");
}

std::array<std::array<double, 3>, 3> CameraModel::world_from_camera() const {
  const double cy_ = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  // Body frame (x forward, y left, z up) in world: Rz(yaw) * Ry(pitch) * Rx(roll).
  const double b[3][3] = {
      {cy_ * cp, cy_ * sp * sr - sy * cr, cy_ * sp * cr + sy * sr},
      {sy * cp, sy * sp * sr + cy_ * cr, sy * sp * cr - cy_ * sr},
      {-sp, cp * sr, cp * cr},
  };
  // Optical frame: x right = -body y, y down = -body z, z forward = body x.
  std::array<std::array<double, 3>, 3> m{};
  for (int r = 0; r < 3; ++r) {
    m[r][0] = -b[r][1];
    m[r][1] = -b[r][2];
    m[r][2] = b[r][0];
  }
  return m;
}

CameraModel CameraModel::robot_mounted(Vec2 robot, double heading, double mount_height, double pitch_down, int width,
                                       int height, double focal) {
  CameraModel c;
  c.fx = c.fy = focal;
  c.width = width;
  c.height = height;
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  c.position = {robot.x, robot.y, mount_height};
  c.yaw = heading;
  c.pitch = pitch_down;
  c.validate();
  return c;
}

std::optional<Pixel> project_to_pixel(const CameraModel& camera, Vec3 world) {
  const auto m = camera.world_from_camera();
  const double d[3] = {world.x - camera.position.x, world.y - camera.position.y, world.z - camera.position.z};
  double pc[3];
  for (int c = 0; c < 3; ++c) pc[c] = m[0][c] * d[0] + m[1][c] * d[1] + m[2][c] * d[2];
  if (!(pc[2] > 0.0)) return std::nullopt;
  const Pixel p{(camera.fx * pc[0] / pc[2] + camera.cx) / camera.width,
                (camera.fy * pc[1] / pc[2] + camera.cy) / camera.height};
  if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0)) return std::nullopt;
  return p;
}

std::optional<Vec2> backproject_to_ground(const CameraModel& camera, Pixel pixel) {
  const auto m = camera.world_from_camera();
  const double rc[3] = {(pixel.u * camera.width - camera.cx) / camera.fx,
                        (pixel.v * camera.height - camera.cy) / camera.fy, 1.0};
  double rw[3];
  for (int r = 0; r < 3; ++r) rw[r] = m[r][0] * rc[0] + m[r][1] * rc[1] + m[r][2] * rc[2];
  if (!(rw[2] < 0.0) || !(camera.position.z > 0.0)) return std::nullopt;
  const double t = -camera.position.z / rw[2];
  return Vec2{camera.position.x + t * rw[0], camera.position.y + t * rw[1]};
}

int encode_loc(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::out_of_range("encode_loc: value outside [0, 1]");
  return std::clamp(static_cast<int>(std::floor(value * kLocBins)), 0, kLocBins - 1);
}

double decode_loc(int index) {
  if (index < 0 || index >= kLocBins) throw std::out_of_range("decode_loc: index outside 0..1023");
  return (index + 0.5) / kLocBins;
}

std::string loc_token(int index) {
  if (index < 0 || index >= kLocBins) throw std::out_of_range("loc_token: index outside 0..1023");
  char buf[16];
  std::snprintf(buf, sizeof buf, "<loc%04d>", index);
  return buf;
}

namespace {

/// Parses one "<locNNNN>" token at `pos`, advancing it.
int take_token(std::string_view text, std::size_t& pos) {
  const std::size_t close = text.find('>', pos);
  const std::string_view tok = text.substr(pos, close == std::string_view::npos ? std::string_view::npos : close - pos + 1);
  auto fail = [&](const char* why) { throw ParseError(std::string(why) + ": '" + std::string(tok) + "'"); };
  if (tok.size() != 9 || tok.substr(0, 4) != "<loc" || tok.back() != '>') fail("malformed location token");
  int value = 0;
  for (std::size_t i = 4; i < 8; ++i) {
    if (tok[i] < '0' || tok[i] > '9') fail("malformed location token");
    value = value * 10 + (tok[i] - '0');
  }
  if (value >= kLocBins) fail("location token out of range");
  pos += tok.size();
  return value;
}

void expect_literal(std::string_view text, std::size_t& pos, std::string_view lit) {
  if (text.substr(pos, lit.size()) != lit) {
    throw ParseError("expected '" + std::string(lit) + "' at offset " + std::to_string(pos) + ": '" +
                     std::string(text.substr(pos, lit.size())) + "'");
  }
  pos += lit.size();
}

}  // namespace

std::string format_goal_prompt(Pixel goal) {
  return "Navigate to x=" + loc_token(encode_loc(goal.u)) + ", y=" + loc_token(encode_loc(goal.v)) + ".";
}

std::pair<int, int> parse_goal_prompt(std::string_view prompt) {
  std::size_t pos = 0;
  expect_literal(prompt, pos, "Navigate to x=");
  const int x = take_token(prompt, pos);
  expect_literal(prompt, pos, ", y=");
  const int y = take_token(prompt, pos);
  expect_literal(prompt, pos, ".");
  if (pos != prompt.size()) throw ParseError("trailing text after goal prompt: '" + std::string(prompt.substr(pos)) + "'");
  return {x, y};
}

GoalSpec make_goal(Pixel goal) {
  GoalSpec g;
  g.pixel = goal;
  g.prompt = format_goal_prompt(goal);
  return g;
}

std::string format_path_string(std::span<const Pixel> points) {
  std::string out;
  for (const Pixel& p : points) out += loc_token(encode_loc(p.u)) + loc_token(encode_loc(p.v));
  return out;
}

std::vector<std::pair<int, int>> parse_path_indices(std::string_view text) {
  std::vector<int> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) tokens.push_back(take_token(text, pos));
  if (tokens.size() % 2 != 0) {
    throw ParseError("odd token count " + std::to_string(tokens.size()) + ", unpaired token '" +
                     loc_token(tokens.back()) + "'");
  }
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < tokens.size(); i += 2) out.emplace_back(tokens[i], tokens[i + 1]);
  return out;
}

std::vector<Pixel> parse_path_string(std::string_view text) {
  std::vector<Pixel> out;
  for (const auto& [x, y] : parse_path_indices(text)) out.push_back({decode_loc(x), decode_loc(y)});
  return out;
}

double curvature(std::span<const Vec2> path) {
  if (path.size() < 2) throw std::invalid_argument("curvature: need at least two points");
  const double chord = distance(path.front(), path.back());
  if (!(chord > 0.0)) throw std::invalid_argument("curvature: coincident endpoints");
  // Arc length can undershoot the chord by rounding on collinear input.
  return std::max(1.0, polyline_length(path) / chord);
}

}  // namespace affordnav
