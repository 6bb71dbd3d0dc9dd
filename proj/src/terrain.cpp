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

#include "affordnav/terrain.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "affordnav/binary_io.hpp"
#include "affordnav/errors.hpp"
#include "affordnav/rng.hpp"

namespace affordnav {

namespace {

int cells_for(double length, double resolution, const char* what) {
  const double n = length / resolution;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument(std::string(what) + " is not a whole number of cells at this resolution");
  }
  return static_cast<int>(r);
}

void check_range(const Range& r, const char* what) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw std::invalid_argument(std::string(what) + ": range requires lo <= hi");
  }
}

// float -> double through the shortest decimal that round-trips the float,
// so a stored 0.1f reads back as 0.1.
double widen_shortest(float f) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), f);
  double d = 0.0;
  std::from_chars(buf, res.ptr, d);
  return d;
}

}  // namespace

std::string_view to_string(TerrainFamily family) {
  switch (family) {
    case TerrainFamily::simple_stairs: return "simple_stairs";
    case TerrainFamily::simple_ramp: return "simple_ramp";
    case TerrainFamily::procedural: return "procedural";
    case TerrainFamily::smooth_mounds: return "smooth_mounds";
    case TerrainFamily::irregular_stairs: return "irregular_stairs";
    case TerrainFamily::custom: return "custom";
  }
  return "custom";
}

TerrainFamily family_from_string(std::string_view name) {
  for (auto f : kGeneratedFamilies) {
    if (to_string(f) == name) return f;
  }
  if (name == "custom") return TerrainFamily::custom;
  throw std::invalid_argument("unknown terrain family: " + std::string(name));
}

// ---------------------------------------------------------------------------
// ElevationMap

ElevationMap::ElevationMap(int width_cells, int height_cells, double resolution, double origin_x,
                           double origin_y, std::uint64_t seed, TerrainFamily family)
    : ElevationMap(width_cells, height_cells, resolution,
                   std::vector<double>(static_cast<std::size_t>(std::max(width_cells, 0)) *
                                           static_cast<std::size_t>(std::max(height_cells, 0)),
                                       0.0),
                   origin_x, origin_y, seed, family) {}

ElevationMap::ElevationMap(int width_cells, int height_cells, double resolution, std::vector<double> heights,
                           double origin_x, double origin_y, std::uint64_t seed, TerrainFamily family)
    : width_(width_cells),
      height_(height_cells),
      resolution_(resolution),
      origin_x_(origin_x),
      origin_y_(origin_y),
      seed_(seed),
      family_(family),
      heights_(std::move(heights)) {
  if (width_ <= 0 || height_ <= 0) throw std::invalid_argument("ElevationMap: dimensions must be positive");
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw std::invalid_argument("ElevationMap: resolution must be positive");
  }
  if (heights_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw std::invalid_argument("ElevationMap: height count does not match dimensions");
  }
  for (double h : heights_) {
    if (!std::isfinite(h)) throw std::invalid_argument("ElevationMap: non-finite height");
  }
}

bool ElevationMap::contains(double x, double y) const noexcept {
  return x >= origin_x_ && y >= origin_y_ && x <= origin_x_ + extent_x() && y <= origin_y_ + extent_y();
}

std::pair<int, int> ElevationMap::cell_of(double x, double y) const noexcept {
  int col = static_cast<int>(std::floor((x - origin_x_) / resolution_));
  int row = static_cast<int>(std::floor((y - origin_y_) / resolution_));
  return {std::clamp(col, 0, width_ - 1), std::clamp(row, 0, height_ - 1)};
}

std::pair<double, double> ElevationMap::cell_center(int col, int row) const noexcept {
  return {origin_x_ + (col + 0.5) * resolution_, origin_y_ + (row + 0.5) * resolution_};
}

double ElevationMap::height_at(double x, double y) const {
  if (!contains(x, y)) throw std::out_of_range("height_at: query outside map extent");
  return height_at_clamped(x, y);
}

double ElevationMap::height_at_clamped(double x, double y) const noexcept {
  double fx = std::clamp((x - origin_x_) / resolution_ - 0.5, 0.0, static_cast<double>(width_ - 1));
  double fy = std::clamp((y - origin_y_) / resolution_ - 0.5, 0.0, static_cast<double>(height_ - 1));
  const int c0 = static_cast<int>(std::floor(fx));
  const int r0 = static_cast<int>(std::floor(fy));
  const int c1 = std::min(c0 + 1, width_ - 1);
  const int r1 = std::min(r0 + 1, height_ - 1);
  const double tx = fx - c0;
  const double ty = fy - r0;
  const double h00 = at(c0, r0), h10 = at(c1, r0), h01 = at(c0, r1), h11 = at(c1, r1);
  // lerp form: exact on constant patches
  const double lo = h00 + tx * (h10 - h00);
  const double hi = h01 + tx * (h11 - h01);
  return lo + ty * (hi - lo);
}

double ElevationMap::cell_height_at(double x, double y) const noexcept {
  auto [c, r] = cell_of(x, y);
  return at(c, r);
}

double ElevationMap::min_height() const noexcept { return *std::min_element(heights_.begin(), heights_.end()); }
double ElevationMap::max_height() const noexcept { return *std::max_element(heights_.begin(), heights_.end()); }

// ---------------------------------------------------------------------------
// Parameters

void TerrainParams::validate() const {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  check_range(step_rise, "step_rise");
  check_range(ramp_gradient, "ramp_gradient");
  check_range(level_gap, "level_gap");
  check_range(box_height, "box_height");
  check_range(box_footprint, "box_footprint");
  check_range(ramp_start_offset, "ramp_start_offset");
  check_range(mound_height, "mound_height");
  if (step_rise.lo < 0.0 || ramp_gradient.lo < 0.0) throw std::invalid_argument("rises and gradients must be >= 0");
  if (!(flat_length > 0.0) || !(incline_length > 0.0) || !(width > 0.0) || !(step_width > 0.0)) {
    throw std::invalid_argument("layout lengths must be positive");
  }
  if (tiles_per_side < 1) throw std::invalid_argument("tiles_per_side must be >= 1");
  if (!(tile_size > 0.0)) throw std::invalid_argument("tile_size must be positive");
  if (!allow_flat && !allow_box && !allow_ramp && !allow_stairs) {
    throw std::invalid_argument("at least one tile type must be allowed");
  }
  if (min_stair_steps < 1) throw std::invalid_argument("min_stair_steps must be >= 1");
  if (wfc_max_retries < 1) throw std::invalid_argument("wfc_max_retries must be >= 1");
  if (box_footprint.lo <= 0.0 || box_footprint.hi > tile_size) {
    throw std::invalid_argument("box_footprint must lie in (0, tile_size]");
  }
  if (ramp_start_offset.lo < 0.0 || ramp_start_offset.hi >= tile_size) {
    throw std::invalid_argument("ramp_start_offset must lie in [0, tile_size)");
  }
  if (!(mound_extent > 0.0)) throw std::invalid_argument("mound_extent must be positive");
  if (seed_count < 1) throw std::invalid_argument("seed_count must be >= 1");
  if (smoothing_iterations < 0) throw std::invalid_argument("smoothing_iterations must be >= 0");
  if (!(smoothing_threshold >= 0.0)) throw std::invalid_argument("smoothing_threshold must be >= 0");
  if (!(terrace_step > 0.0)) throw std::invalid_argument("terrace_step must be positive");
}

TerrainParams TerrainParams::defaults(TerrainFamily family) {
  TerrainParams p;
  p.family = family;
  return p;
}

// ---------------------------------------------------------------------------
// Simple stairs / ramp

ElevationMap generate_simple_stairs(std::uint64_t seed, const TerrainParams& params) {
  params.validate();
  const double res = params.resolution;
  const int step_cells = cells_for(params.step_width, res, "step width");
  const int flat_cells = cells_for(params.flat_length, res, "flat length");
  const int incline_cells = cells_for(params.incline_length, res, "incline length");
  const int width_cells = cells_for(params.width, res, "terrain width");
  if (incline_cells % step_cells != 0) throw std::invalid_argument("staircase length is not a whole number of steps");
  const int steps = incline_cells / step_cells;

  Rng rng(derive_seed(seed, "simple_stairs"));
  std::vector<double> cumulative(static_cast<std::size_t>(steps) + 1, 0.0);
  for (int k = 1; k <= steps; ++k) cumulative[k] = cumulative[k - 1] + rng.uniform(params.step_rise.lo, params.step_rise.hi);

  const int length_cells = 2 * flat_cells + incline_cells;
  ElevationMap map(length_cells, width_cells, res, 0.0, 0.0, seed, TerrainFamily::simple_stairs);
  for (int row = 0; row < width_cells; ++row) {
    for (int col = 0; col < length_cells; ++col) {
      double h = 0.0;
      if (col >= flat_cells + incline_cells) {
        h = cumulative[steps];
      } else if (col >= flat_cells) {
        h = cumulative[(col - flat_cells) / step_cells + 1];
      }
      map.at(col, row) = h;
    }
  }
  return map;
}

ElevationMap generate_simple_ramp(std::uint64_t seed, const TerrainParams& params) {
  params.validate();
  const double res = params.resolution;
  const int flat_cells = cells_for(params.flat_length, res, "flat length");
  const int incline_cells = cells_for(params.incline_length, res, "incline length");
  const int width_cells = cells_for(params.width, res, "terrain width");

  Rng rng(derive_seed(seed, "simple_ramp"));
  const double gradient = rng.uniform(params.ramp_gradient.lo, params.ramp_gradient.hi);
  const double top = gradient * params.incline_length;

  const int length_cells = 2 * flat_cells + incline_cells;
  ElevationMap map(length_cells, width_cells, res, 0.0, 0.0, seed, TerrainFamily::simple_ramp);
  for (int row = 0; row < width_cells; ++row) {
    for (int col = 0; col < length_cells; ++col) {
      double h = 0.0;
      if (col >= flat_cells + incline_cells) {
        h = top;
      } else if (col >= flat_cells) {
        h = gradient * ((col - flat_cells) + 0.5) * res;
      }
      map.at(col, row) = h;
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Procedural tiles via wave function collapse

namespace {

constexpr std::array<std::pair<int, int>, 4> kDirStep{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

int opposite(int side) { return (side + 2) % 4; }

struct Label {
  TileType type;
  int dir;
  int level;
  double weight;
};

std::vector<Label> build_labels(const TerrainParams& p, int levels) {
  std::vector<Label> labels;
  for (int l = 0; l < levels; ++l) {
    if (p.allow_flat) labels.push_back({TileType::flat, 0, l, 4.0});
    if (p.allow_box) labels.push_back({TileType::box, 0, l, 1.5});
  }
  for (int d = 0; d < 4; ++d) {
    for (int l = 0; l + 1 < levels; ++l) {
      if (p.allow_ramp) labels.push_back({TileType::ramp, d, l, 1.0});
      if (p.allow_stairs) labels.push_back({TileType::stairs, d, l, 1.0});
    }
  }
  return labels;
}

bool is_incline(TileType t) { return t == TileType::ramp || t == TileType::stairs; }

// Constraint that tile `a` imposes on neighbour `b` lying on `side` of `a`.
bool one_sided_ok(const Label& a, const Label& b, int side) {
  if (is_incline(a.type)) {
    if (side == a.dir) {  // uphill end
      return (b.type == TileType::flat && b.level == a.level + 1) ||
             (b.type == a.type && b.dir == a.dir && b.level == a.level + 1);
    }
    if (side == opposite(a.dir)) {  // downhill end
      return (b.type == TileType::flat && b.level == a.level) ||
             (b.type == a.type && b.dir == a.dir && b.level + 1 == a.level);
    }
    return true;
  }
  if (!is_incline(b.type)) return a.level == b.level;
  return true;
}

using Domain = std::uint64_t;

struct Wfc {
  const std::vector<Label>& labels;
  int n;
  std::vector<std::array<Domain, 4>> support;  // per label, per side: compatible neighbour labels

  Wfc(const std::vector<Label>& l, int tiles) : labels(l), n(tiles), support(l.size()) {
    for (std::size_t a = 0; a < labels.size(); ++a) {
      for (int side = 0; side < 4; ++side) {
        Domain mask = 0;
        for (std::size_t b = 0; b < labels.size(); ++b) {
          if (one_sided_ok(labels[a], labels[b], side) && one_sided_ok(labels[b], labels[a], opposite(side))) {
            mask |= Domain{1} << b;
          }
        }
        support[a][side] = mask;
      }
    }
  }

  double entropy(Domain d) const {
    double sum = 0.0, sum_wlogw = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (d & (Domain{1} << i)) {
        sum += labels[i].weight;
        sum_wlogw += labels[i].weight * std::log(labels[i].weight);
      }
    }
    return std::log(sum) - sum_wlogw / sum;
  }

  bool propagate(std::vector<Domain>& dom, std::vector<int> queue) const {
    while (!queue.empty()) {
      const int cell = queue.back();
      queue.pop_back();
      const int cx = cell % n, cy = cell / n;
      for (int side = 0; side < 4; ++side) {
        const int nx = cx + kDirStep[side].first, ny = cy + kDirStep[side].second;
        if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
        Domain allowed = 0;
        for (std::size_t a = 0; a < labels.size(); ++a) {
          if (dom[cell] & (Domain{1} << a)) allowed |= support[a][side];
        }
        const int ncell = ny * n + nx;
        const Domain next = dom[ncell] & allowed;
        if (next == dom[ncell]) continue;
        if (next == 0) return false;
        dom[ncell] = next;
        queue.push_back(ncell);
      }
    }
    return true;
  }

  // One attempt; empty result on contradiction.
  std::vector<int> run(Rng& rng) const {
    const Domain all = labels.size() == 64 ? ~Domain{0} : ((Domain{1} << labels.size()) - 1);
    std::vector<Domain> dom(static_cast<std::size_t>(n) * n, all);
    std::vector<int> seeds(dom.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = static_cast<int>(i);
    if (!propagate(dom, seeds)) return {};
    for (;;) {
      int best = -1;
      double best_h = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < dom.size(); ++i) {
        if (std::popcount(dom[i]) <= 1) continue;
        const double h = entropy(dom[i]) + 1e-6 * rng.uniform();
        if (h < best_h) {
          best_h = h;
          best = static_cast<int>(i);
        }
      }
      if (best < 0) break;
      double total = 0.0;
      for (std::size_t a = 0; a < labels.size(); ++a) {
        if (dom[best] & (Domain{1} << a)) total += labels[a].weight;
      }
      double pick = rng.uniform() * total;
      std::size_t chosen = labels.size();
      for (std::size_t a = 0; a < labels.size(); ++a) {
        if (!(dom[best] & (Domain{1} << a))) continue;
        chosen = a;
        pick -= labels[a].weight;
        if (pick < 0.0) break;
      }
      dom[best] = Domain{1} << chosen;
      if (!propagate(dom, {best})) return {};
    }
    std::vector<int> out(dom.size());
    for (std::size_t i = 0; i < dom.size(); ++i) out[i] = std::countr_zero(dom[i]);
    return out;
  }
};

// Distance from the downhill edge of a tile, in the tile's uphill direction.
double uphill_coord(int dir, double lx, double ly, double size) {
  switch (dir) {
    case 0: return lx;
    case 1: return ly;
    case 2: return size - lx;
    default: return size - ly;
  }
}

}  // namespace

ProceduralTerrain generate_procedural_terrain(std::uint64_t seed, const TerrainParams& params) {
  params.validate();
  const double res = params.resolution;
  const int tile_cells = cells_for(params.tile_size, res, "tile size");
  const int step_cells = cells_for(params.step_width, res, "step width");
  const int max_steps = tile_cells / step_cells;
  if (max_steps < params.min_stair_steps) throw std::invalid_argument("tile too small for min_stair_steps");
  const int n = params.tiles_per_side;
  const int levels = (params.allow_ramp || params.allow_stairs) ? 3 : 1;
  const auto labels = build_labels(params, levels);
  if (labels.empty()) throw std::invalid_argument("no tile labels available");
  const Wfc wfc(labels, n);

  std::vector<int> assignment;
  int attempt = 0;
  for (; attempt < params.wfc_max_retries; ++attempt) {
    Rng rng(derive_seed(derive_seed(seed, "procedural/wfc"), static_cast<std::uint64_t>(attempt)));
    assignment = wfc.run(rng);
    if (!assignment.empty()) break;
  }
  if (assignment.empty()) throw std::runtime_error("wave function collapse: contradiction after all retries");

  Rng rng(derive_seed(seed, "procedural/geometry"));
  std::vector<double> level_height(static_cast<std::size_t>(levels), 0.0);
  for (int l = 1; l < levels; ++l) level_height[l] = level_height[l - 1] + rng.uniform(params.level_gap.lo, params.level_gap.hi);

  const int cells = n * tile_cells;
  ElevationMap map(cells, cells, res, 0.0, 0.0, seed, TerrainFamily::procedural);
  std::vector<Tile> tiles(static_cast<std::size_t>(n) * n);
  for (int ty = 0; ty < n; ++ty) {
    for (int tx = 0; tx < n; ++tx) {
      const Label& lab = labels[assignment[ty * n + tx]];
      Tile tile;
      tile.type = lab.type;
      tile.dir = static_cast<TileDir>(lab.dir);
      tile.level = lab.level;
      tile.base_height = level_height[lab.level];
      tile.top_height = is_incline(lab.type) ? level_height[lab.level + 1] : tile.base_height;

      double ramp_offset = 0.0;
      double box_cx = 0.0, box_cy = 0.0, box_a = 0.0, box_b = 0.0, box_h = 0.0;
      if (lab.type == TileType::stairs) {
        tile.stair_steps = params.min_stair_steps +
                           static_cast<int>(rng.below(static_cast<std::uint64_t>(max_steps - params.min_stair_steps + 1)));
        tile.stair_rise = (tile.top_height - tile.base_height) / tile.stair_steps;
      } else if (lab.type == TileType::ramp) {
        ramp_offset = rng.uniform(params.ramp_start_offset.lo, params.ramp_start_offset.hi);
      } else if (lab.type == TileType::box) {
        box_a = rng.uniform(params.box_footprint.lo, params.box_footprint.hi);
        box_b = rng.uniform(params.box_footprint.lo, params.box_footprint.hi);
        box_cx = rng.uniform(box_a / 2.0, params.tile_size - box_a / 2.0);
        box_cy = rng.uniform(box_b / 2.0, params.tile_size - box_b / 2.0);
        box_h = rng.uniform(params.box_height.lo, params.box_height.hi);
      }

      for (int r = 0; r < tile_cells; ++r) {
        for (int c = 0; c < tile_cells; ++c) {
          const double lx = (c + 0.5) * res, ly = (r + 0.5) * res;
          double h = tile.base_height;
          if (lab.type == TileType::stairs) {
            // Steps fill the uphill end of the tile; the last tread is flush with the upper level.
            const int s_cells = [&] {
              switch (lab.dir) {
                case 0: return c;
                case 1: return r;
                case 2: return tile_cells - 1 - c;
                default: return tile_cells - 1 - r;
              }
            }();
            const int first = tile_cells - tile.stair_steps * step_cells;
            if (s_cells >= first) {
              const int k = (s_cells - first) / step_cells + 1;
              h = k == tile.stair_steps ? tile.top_height : tile.base_height + k * tile.stair_rise;
            }
          } else if (lab.type == TileType::ramp) {
            const double s = uphill_coord(lab.dir, lx, ly, params.tile_size);
            const double t = std::clamp((s - ramp_offset) / (params.tile_size - ramp_offset), 0.0, 1.0);
            h = tile.base_height + t * (tile.top_height - tile.base_height);
          } else if (lab.type == TileType::box) {
            if (std::abs(lx - box_cx) <= box_a / 2.0 && std::abs(ly - box_cy) <= box_b / 2.0) h += box_h;
          }
          map.at(tx * tile_cells + c, ty * tile_cells + r) = h;
        }
      }
      tiles[ty * n + tx] = tile;
    }
  }
  return ProceduralTerrain{std::move(map), n, std::move(tiles), attempt + 1};
}

ElevationMap generate_procedural(std::uint64_t seed, const TerrainParams& params) {
  return generate_procedural_terrain(seed, params).map;
}

// ---------------------------------------------------------------------------
// Cellular automaton mounds

std::vector<double> smooth_pass(std::span<const double> heights, int width, int height, double threshold) {
  if (heights.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("smooth_pass: size mismatch");
  }
  std::vector<double> out(heights.begin(), heights.end());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int nr = r + dr, nc = c + dc;
          if (nr < 0 || nc < 0 || nr >= height || nc >= width) continue;
          const double v = heights[static_cast<std::size_t>(nr) * width + nc];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      if (hi > lo && hi - lo > threshold) out[static_cast<std::size_t>(r) * width + c] = 0.5 * (hi + lo);
    }
  }
  return out;
}

double quantize_height(double h, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("quantize_height: step must be positive");
  return std::round(h / step) * step;
}

namespace {

ElevationMap mounds(std::uint64_t seed, const TerrainParams& params, TerrainFamily family) {
  params.validate();
  const int side = cells_for(params.mound_extent, params.resolution, "mound extent");
  const std::size_t count = static_cast<std::size_t>(side) * side;
  if (static_cast<std::size_t>(params.seed_count) > count) {
    throw std::invalid_argument("smooth mounds: seed_count exceeds cell count");
  }
  Rng rng(derive_seed(seed, "smooth_mounds"));
  // Partial Fisher-Yates over cell indices picks distinct seed cells.
  std::vector<std::uint32_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = static_cast<std::uint32_t>(i);
  struct Seed {
    std::uint32_t cell;
    double height;
  };
  std::vector<Seed> seeds;
  for (int i = 0; i < params.seed_count; ++i) {
    const auto j = i + rng.below(count - static_cast<std::size_t>(i));
    std::swap(order[i], order[j]);
    seeds.push_back({order[i], rng.uniform(params.mound_height.lo, params.mound_height.hi)});
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.cell < b.cell; });

  std::vector<double> h(count);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      long best = std::numeric_limits<long>::max();
      double value = 0.0;
      for (const auto& s : seeds) {
        const long dc = static_cast<long>(s.cell % side) - c;
        const long dr = static_cast<long>(s.cell / side) - r;
        const long d2 = dc * dc + dr * dr;
        if (d2 < best) {
          best = d2;
          value = s.height;
        }
      }
      h[static_cast<std::size_t>(r) * side + c] = value;
    }
  }
  for (int it = 0; it < params.smoothing_iterations; ++it) h = smooth_pass(h, side, side, params.smoothing_threshold);
  return ElevationMap(side, side, params.resolution, std::move(h), 0.0, 0.0, seed, family);
}

}  // namespace

ElevationMap generate_smooth_mounds(std::uint64_t seed, const TerrainParams& params) {
  return mounds(seed, params, TerrainFamily::smooth_mounds);
}

ElevationMap generate_irregular_stairs(std::uint64_t seed, const TerrainParams& params) {
  ElevationMap map = mounds(seed, params, TerrainFamily::irregular_stairs);
  for (double& h : map.heights()) h = quantize_height(h, params.terrace_step);
  return map;
}

ElevationMap generate_terrain(std::uint64_t seed, const TerrainParams& params) {
  switch (params.family) {
    case TerrainFamily::simple_stairs: return generate_simple_stairs(seed, params);
    case TerrainFamily::simple_ramp: return generate_simple_ramp(seed, params);
    case TerrainFamily::procedural: return generate_procedural(seed, params);
    case TerrainFamily::smooth_mounds: return generate_smooth_mounds(seed, params);
    case TerrainFamily::irregular_stairs: return generate_irregular_stairs(seed, params);
    case TerrainFamily::custom: break;
  }
  throw std::invalid_argument("generate_terrain: no generator for family 'custom'");
}

// ---------------------------------------------------------------------------
// Crops

ElevationMap crop_local(const ElevationMap& map, double center_x, double center_y, int crop_cells) {
  if (crop_cells < 1) throw std::invalid_argument("crop_local: crop_cells must be >= 1");
  if (!map.contains(center_x, center_y)) throw std::out_of_range("crop_local: center outside map");
  const auto [cc, cr] = map.cell_of(center_x, center_y);
  const int c0 = cc - crop_cells / 2;
  const int r0 = cr - crop_cells / 2;
  if (c0 < 0 || r0 < 0 || c0 + crop_cells > map.width_cells() || r0 + crop_cells > map.height_cells()) {
    throw std::out_of_range("crop_local: window exceeds map bounds");
  }
  const double ref = map.at(cc, cr);
  std::vector<double> h(static_cast<std::size_t>(crop_cells) * crop_cells);
  for (int r = 0; r < crop_cells; ++r) {
    for (int c = 0; c < crop_cells; ++c) h[static_cast<std::size_t>(r) * crop_cells + c] = map.at(c0 + c, r0 + r) - ref;
  }
  return ElevationMap(crop_cells, crop_cells, map.resolution(), std::move(h),
                      map.origin_x() + c0 * map.resolution(), map.origin_y() + r0 * map.resolution(), map.seed(),
                      map.family());
}

// ---------------------------------------------------------------------------
// EMAP / PGM

void write_emap(std::ostream& os, const ElevationMap& map) {
  binio::put_magic(os, "EMAP1");
  binio::put_u32(os, static_cast<std::uint32_t>(map.width_cells()));
  binio::put_u32(os, static_cast<std::uint32_t>(map.height_cells()));
  binio::put_f32(os, static_cast<float>(map.resolution()));
  binio::put_f64(os, map.origin_x());
  binio::put_f64(os, map.origin_y());
  binio::put_u64(os, map.seed());
  binio::put_u8(os, static_cast<std::uint8_t>(map.family()));
  for (double h : map.heights()) binio::put_f32(os, static_cast<float>(h));
}

ElevationMap read_emap(std::istream& is) {
  binio::expect_magic(is, "EMAP1");
  const auto w = binio::get_u32(is);
  const auto h = binio::get_u32(is);
  const double res = widen_shortest(binio::get_f32(is));
  const double ox = binio::get_f64(is);
  const double oy = binio::get_f64(is);
  const auto seed = binio::get_u64(is);
  const auto tag = binio::get_u8(is);
  if (tag > 4 && tag != 255) throw FormatError("EMAP: unknown family tag " + std::to_string(tag));
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) throw FormatError("EMAP: implausible dimensions");
  std::vector<double> heights(static_cast<std::size_t>(w) * h);
  for (double& v : heights) {
    v = binio::get_f32(is);
    if (!std::isfinite(v)) throw FormatError("EMAP: non-finite height");
  }
  if (!(res > 0.0)) throw FormatError("EMAP: non-positive resolution");
  return ElevationMap(static_cast<int>(w), static_cast<int>(h), res, std::move(heights), ox, oy, seed,
                      static_cast<TerrainFamily>(tag));
}

void save_emap(const std::filesystem::path& path, const ElevationMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  write_emap(os, map);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ElevationMap load_emap(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  return read_emap(is);
}

void write_pgm(std::ostream& os, std::span<const double> values, int width, int height, std::optional<Range> range) {
  if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("write_pgm: size mismatch");
  }
  double lo = 0.0, hi = 0.0;
  if (range) {
    lo = range->lo;
    hi = range->hi;
  } else if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  os << "P5\n" << width << ' ' << height << "\n255\n";
  for (int r = height - 1; r >= 0; --r) {
    for (int c = 0; c < width; ++c) {
      const double v = values[static_cast<std::size_t>(r) * width + c];
      const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
    }
  }
}

void save_pgm(const std::filesystem::path& path, std::span<const double> values, int width, int height,
              std::optional<Range> range) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  write_pgm(os, values, width, height, range);
}

}  // namespace affordnav
