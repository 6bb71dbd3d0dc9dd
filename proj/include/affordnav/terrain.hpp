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

#ifndef AFFORDNAV_TERRAIN_HPP
#define AFFORDNAV_TERRAIN_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace affordnav {

enum class TerrainFamily : std::uint8_t {
  simple_stairs = 0,
  simple_ramp = 1,
  procedural = 2,
  smooth_mounds = 3,
  irregular_stairs = 4,
  custom = 255,
};

inline constexpr TerrainFamily kGeneratedFamilies[] = {
    TerrainFamily::simple_stairs, TerrainFamily::simple_ramp, TerrainFamily::procedural,
    TerrainFamily::smooth_mounds, TerrainFamily::irregular_stairs};

std::string_view to_string(TerrainFamily family);
/// Throws std::invalid_argument on an unknown name.
TerrainFamily family_from_string(std::string_view name);

/// Uniform-resolution 2.5D height grid. Cell (col, row) covers
/// [origin_x + col*res, origin_x + (col+1)*res) x [origin_y + row*res, ...),
/// heights are stored row-major (row = y index).
class ElevationMap {
 public:
  ElevationMap(int width_cells, int height_cells, double resolution, double origin_x = 0.0,
               double origin_y = 0.0, std::uint64_t seed = 0, TerrainFamily family = TerrainFamily::custom);
  ElevationMap(int width_cells, int height_cells, double resolution, std::vector<double> heights,
               double origin_x = 0.0, double origin_y = 0.0, std::uint64_t seed = 0,
               TerrainFamily family = TerrainFamily::custom);

  int width_cells() const noexcept { return width_; }
  int height_cells() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  double origin_x() const noexcept { return origin_x_; }
  double origin_y() const noexcept { return origin_y_; }
  double extent_x() const noexcept { return width_ * resolution_; }
  double extent_y() const noexcept { return height_ * resolution_; }
  std::uint64_t seed() const noexcept { return seed_; }
  TerrainFamily family() const noexcept { return family_; }

  std::span<const double> heights() const noexcept { return heights_; }
  std::span<double> heights() noexcept { return heights_; }

  double at(int col, int row) const { return heights_[index(col, row)]; }
  double& at(int col, int row) { return heights_[index(col, row)]; }
  std::size_t index(int col, int row) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  bool contains(double x, double y) const noexcept;
  bool contains_cell(int col, int row) const noexcept {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  /// Cell containing (x, y); the far boundary belongs to the last cell.
  std::pair<int, int> cell_of(double x, double y) const noexcept;
  std::pair<double, double> cell_center(int col, int row) const noexcept;

  /// Bilinear interpolation between cell centers. Throws std::out_of_range
  /// outside the map extent.
  double height_at(double x, double y) const;
  /// Bilinear interpolation with the query clamped onto the map.
  double height_at_clamped(double x, double y) const noexcept;
  /// Height of the cell containing the (clamped) point.
  double cell_height_at(double x, double y) const noexcept;

  double min_height() const noexcept;
  double max_height() const noexcept;

  friend bool operator==(const ElevationMap&, const ElevationMap&) = default;

 private:
  int width_;
  int height_;
  double resolution_;
  double origin_x_;
  double origin_y_;
  std::uint64_t seed_;
  TerrainFamily family_;
  std::vector<double> heights_;
};

struct Range {
  double lo;
  double hi;
};

enum class TileType : std::uint8_t { flat = 0, box = 1, ramp = 2, stairs = 3 };
/// Compass direction on the tile grid: east = +x, north = +y.
enum class TileDir : std::uint8_t { east = 0, north = 1, west = 2, south = 3 };

struct TerrainParams {
  TerrainFamily family = TerrainFamily::simple_stairs;
  double resolution = 0.1;

  // simple stairs / simple ramp layout along +x
  double flat_length = 2.0;
  double incline_length = 6.0;
  double width = 10.0;
  double step_width = 0.4;
  Range step_rise{0.05, 0.15};
  Range ramp_gradient{0.01, 0.3};

  // procedural (wave function collapse over square tiles)
  int tiles_per_side = 5;
  double tile_size = 2.0;
  bool allow_flat = true;
  bool allow_box = true;
  bool allow_ramp = true;
  bool allow_stairs = true;
  Range level_gap{0.25, 0.6};
  Range box_height{0.3, 1.0};
  Range box_footprint{0.5, 1.5};
  Range ramp_start_offset{0.0, 1.0};
  int min_stair_steps = 3;
  int wfc_max_retries = 32;

  // smooth mounds / irregular stairs (cellular automaton)
  double mound_extent = 10.0;
  int seed_count = 20;
  Range mound_height{1.0, 3.0};
  double smoothing_threshold = 0.5;
  int smoothing_iterations = 10;
  double terrace_step = 0.2;

  /// Throws std::invalid_argument on inconsistent parameters.
  void validate() const;

  static TerrainParams defaults(TerrainFamily family);
};

struct Tile {
  TileType type = TileType::flat;
  TileDir dir = TileDir::east;  // uphill direction for ramps and stairs
  int level = 0;                // base level; ramps and stairs rise to level + 1
  int stair_steps = 0;
  double stair_rise = 0.0;
  double base_height = 0.0;
  double top_height = 0.0;
  friend bool operator==(const Tile&, const Tile&) = default;
};

struct ProceduralTerrain {
  ElevationMap map;
  int tiles_per_side;
  std::vector<Tile> tiles;  // row-major, tile (tx, ty) at ty * tiles_per_side + tx
  int attempts;             // 1 + number of contradiction restarts
};

ElevationMap generate_simple_stairs(std::uint64_t seed, const TerrainParams& params);
ElevationMap generate_simple_ramp(std::uint64_t seed, const TerrainParams& params);
ProceduralTerrain generate_procedural_terrain(std::uint64_t seed, const TerrainParams& params);
ElevationMap generate_procedural(std::uint64_t seed, const TerrainParams& params);
ElevationMap generate_smooth_mounds(std::uint64_t seed, const TerrainParams& params);
ElevationMap generate_irregular_stairs(std::uint64_t seed, const TerrainParams& params);
/// Dispatches on params.family.
ElevationMap generate_terrain(std::uint64_t seed, const TerrainParams& params);

/// One synchronous smoothing pass over an 8-connected neighbourhood: a cell
/// whose neighbour range exceeds `threshold` takes the mean of that max and min.
std::vector<double> smooth_pass(std::span<const double> heights, int width, int height, double threshold);
double quantize_height(double h, double step);

/// Sub-grid centred on the cell containing (center_x, center_y), re-expressed
/// relative to that cell's height. Throws std::out_of_range if the window
/// leaves the map.
ElevationMap crop_local(const ElevationMap& map, double center_x, double center_y, int crop_cells);

void write_emap(std::ostream& os, const ElevationMap& map);
ElevationMap read_emap(std::istream& is);
void save_emap(const std::filesystem::path& path, const ElevationMap& map);
ElevationMap load_emap(const std::filesystem::path& path);

/// Binary PGM of a scalar grid (row 0 = lowest y printed last). Values are
/// min-max normalised unless an explicit range is given.
void write_pgm(std::ostream& os, std::span<const double> values, int width, int height,
               std::optional<Range> range = std::nullopt);
void save_pgm(const std::filesystem::path& path, std::span<const double> values, int width, int height,
              std::optional<Range> range = std::nullopt);

}  // namespace affordnav

#endif  // AFFORDNAV_TERRAIN_HPP
