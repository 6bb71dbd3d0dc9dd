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

#ifndef AFFORDNAV_AFFORDANCE_HPP
#define AFFORDNAV_AFFORDANCE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "affordnav/embodiment.hpp"
#include "affordnav/geometry.hpp"
#include "affordnav/mlp.hpp"
#include "affordnav/terrain.hpp"
#include "json.hpp"

namespace affordnav {

inline constexpr int kHeadingBins = 8;

/// Bin angle in radians (bin * 45 degrees).
double heading_bin_angle(int bin);
/// Nearest of the eight training headings.
int snap_heading(double angle);

/// How a local observation is cut from an elevation map. The crop is
/// heading-aligned (its first axis points along the query heading) and its
/// centre sits `forward_offset` metres ahead of the query point, so the
/// stretch of terrain a short rollout would cover is inside the window.
struct FeatureLayout {
  int crop_cells = 25;
  double resolution = 0.1;
  double forward_offset = 0.75;
  int heading_bins = kHeadingBins;

  int input_size() const noexcept { return crop_cells * crop_cells + 2 + heading_bins; }
  double window() const noexcept { return crop_cells * resolution; }
  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct Observation {
  std::vector<float> local_map;  // crop_cells^2, row-major, metres relative to the query point
  float qx = 0.5f;
  float qy = 0.5f;
  int heading_bin = 0;
};

/// `jitter` shifts the crop centre (along-heading, left-of-heading) in metres.
Observation observe(const ElevationMap& map, Vec2 query, int heading_bin, const FeatureLayout& layout,
                    Vec2 jitter = {});

struct AffordanceSample {
  int crop_cells = 0;
  std::vector<float> local_map;
  float qx = 0.0f;
  float qy = 0.0f;
  std::uint8_t heading_bin = 0;
  std::uint8_t label = 0;
  float return_value = 0.0f;
  friend bool operator==(const AffordanceSample&, const AffordanceSample&) = default;
};

struct CollectConfig {
  int n_samples = 1000;           // balanced output size (rounded down to even)
  std::size_t max_attempts = 0;   // rollout budget; 0 means 20 * n_samples
  RolloutConfig rollout;
  FeatureLayout layout;
  double jitter = 0.15;           // uniform crop-centre jitter, metres
  double edge_margin = 0.6;       // start and horizon end stay this far inside the map
};

struct CollectResult {
  std::vector<AffordanceSample> samples;
  std::size_t raw_success = 0;
  std::size_t raw_failure = 0;
  std::size_t attempts = 0;
  bool balanced = false;  // false when the budget ran out before both classes filled
  std::string warning;
};

CollectResult collect_dataset(std::span<const ElevationMap> terrains, const EmbodimentSpec& spec,
                              const CollectConfig& config, std::uint64_t seed);

enum class ModelMode : std::uint8_t { classification, regression };
std::string_view to_string(ModelMode mode);
ModelMode model_mode_from_string(std::string_view name);

struct TrainConfig {
  std::vector<int> hidden{128, 64};
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 20;
  ModelMode mode = ModelMode::classification;
};

class AffordanceModel {
 public:
  AffordanceModel() = default;
  AffordanceModel(FeatureLayout layout, ModelMode mode, Mlp<float> net, nlohmann::json metadata = {});

  const FeatureLayout& layout() const noexcept { return layout_; }
  ModelMode mode() const noexcept { return mode_; }
  const Mlp<float>& net() const noexcept { return net_; }
  const nlohmann::json& metadata() const noexcept { return metadata_; }
  nlohmann::json& metadata() noexcept { return metadata_; }

  /// Traversal probability in [0, 1]. Throws LayoutError on a shape mismatch.
  double query(std::span<const float> local_map, double qx, double qy, int heading_bin) const;
  double query(const Observation& obs) const { return query(obs.local_map, obs.qx, obs.qy, obs.heading_bin); }
  /// Scores for feature columns (input_size x n).
  std::vector<double> query_batch(const Eigen::MatrixXf& features) const;

  /// Feature column for one sample; validates the layout.
  void encode(std::span<const float> local_map, double qx, double qy, int heading_bin, float* column) const;

 private:
  FeatureLayout layout_;
  ModelMode mode_ = ModelMode::classification;
  Mlp<float> net_;
  nlohmann::json metadata_;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
};

/// Deterministic given (dataset, config, seed). Throws std::runtime_error on a
/// non-finite loss.
AffordanceModel train(std::span<const AffordanceSample> dataset, const FeatureLayout& layout,
                      const TrainConfig& config, std::uint64_t seed, TrainReport* report = nullptr);

/// Mean training objective of `model` on `dataset` (BCE or squared error by mode).
double dataset_loss(const AffordanceModel& model, std::span<const AffordanceSample> dataset);

/// Target the model regresses: the label for classification, 1 + return for regression.
float training_target(const AffordanceSample& s, ModelMode mode);

struct EvalReport {
  std::size_t n = 0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  double auc = 0.0;
  double label_mean = 0.0;
};

EvalReport evaluate(const AffordanceModel& model, std::span<const AffordanceSample> dataset);
/// Area under the ROC curve (Mann-Whitney, ties count one half).
double roc_auc(std::span<const double> scores, std::span<const int> labels);
nlohmann::json to_json(const EvalReport& r);

struct AffordanceGrid {
  int width = 0;   // lattice columns
  int height = 0;  // lattice rows
  int stride = 1;  // map cells between lattice points
  int heading_bin = 0;
  std::vector<double> values;  // row-major
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * width + i]; }
};

/// Scores every `stride`-th cell centre of the map for one heading.
AffordanceGrid affordance_grid(const AffordanceModel& model, const ElevationMap& map, int heading_bin, int stride);

// AFS1 sample records and AFM1 model files (+ JSON sidecar at "<path>.json").
void write_samples(std::ostream& os, std::span<const AffordanceSample> samples);
std::vector<AffordanceSample> read_samples(std::istream& is);
void save_samples(const std::filesystem::path& path, std::span<const AffordanceSample> samples);
std::vector<AffordanceSample> load_samples(const std::filesystem::path& path);

void write_model(std::ostream& os, const AffordanceModel& model);
nlohmann::json model_sidecar(const AffordanceModel& model);
AffordanceModel read_model(std::istream& is, const nlohmann::json& sidecar);
void save_model(const std::filesystem::path& path, const AffordanceModel& model);
AffordanceModel load_model(const std::filesystem::path& path);

}  // namespace affordnav

#endif  // AFFORDNAV_AFFORDANCE_HPP
