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

#ifndef AFFORDNAV_PIPELINE_HPP
#define AFFORDNAV_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "affordnav/affordance.hpp"
#include "affordnav/embodiment.hpp"
#include "affordnav/mission.hpp"
#include "affordnav/terrain.hpp"
#include "json.hpp"

namespace affordnav {

/// Invalid configuration document; the message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BenchmarkEntry {
  std::string scenario;
  std::vector<std::string> embodiments;
};

/// One experiment. Every omitted field keeps the default below; unknown keys
/// are rejected.
struct RunConfig {
  std::uint64_t master_seed = 1;
  std::string output_dir = "affordnav_out";

  std::vector<TerrainFamily> families{std::begin(kGeneratedFamilies), std::end(kGeneratedFamilies)};
  int terrains_per_family = 20;
  TerrainParams terrain_overrides;  // family field ignored

  std::map<std::string, EmbodimentSpec> embodiments{{"legged", EmbodimentSpec::legged()},
                                                     {"wheeled", EmbodimentSpec::wheeled()}};
  CollectConfig collect = [] {
    CollectConfig c;
    c.n_samples = 10000;
    return c;
  }();
  double holdout_fraction = 0.2;
  TrainConfig train;
  MissionConfig mission;
  int episodes = 20;
  std::vector<BenchmarkEntry> benchmark{{"stairs_vs_ramp", {"wheeled", "legged"}}, {"lab_obstacle", {"legged"}}};

  /// Named sub-stream of the master seed (e.g. "terrain", "collect/wheeled").
  std::uint64_t stream(std::string_view name) const { return derive_seed(master_seed, name); }
  const EmbodimentSpec& embodiment(const std::string& name) const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// terrains_per_family maps of every configured family, in family order.
std::vector<ElevationMap> generate_terrain_set(const RunConfig& cfg);
/// Seed of terrain `index` of `family` under `master`.
std::uint64_t terrain_seed(std::uint64_t master, TerrainFamily family, int index);

struct TrainedEmbodiment {
  std::string name;
  CollectResult collected;
  std::vector<AffordanceSample> train_set;
  std::vector<AffordanceSample> holdout_set;
  AffordanceModel model;
  TrainReport report;
  EvalReport holdout;
};

/// Splits so both halves keep the interleaved class balance: the last
/// `fraction` of the dataset (rounded to an even count) is held out.
std::pair<std::vector<AffordanceSample>, std::vector<AffordanceSample>> split_holdout(
    std::vector<AffordanceSample> samples, double fraction);

TrainedEmbodiment train_embodiment(const RunConfig& cfg, const std::string& name,
                                   const std::vector<ElevationMap>& terrains);

struct PipelineResult {
  std::vector<TrainedEmbodiment> models;
  std::vector<BenchmarkRow> rows;
  std::string markdown;
  std::string csv;
};

/// Terrains, datasets, models and the benchmark table. When `out` is
/// non-empty the artifacts are written below it.
PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out = {});

}  // namespace affordnav

#endif  // AFFORDNAV_PIPELINE_HPP
