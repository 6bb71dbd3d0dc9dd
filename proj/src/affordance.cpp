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

#include "affordnav/affordance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "affordnav/binary_io.hpp"
#include "affordnav/errors.hpp"
#include "affordnav/rng.hpp"

namespace affordnav {

double heading_bin_angle(int bin) {
  if (bin < 0 || bin >= kHeadingBins) throw std::out_of_range("heading bin must be in 0..7");
  return bin * (std::numbers::pi / 4.0);
}

int snap_heading(double angle) {
  const double step = std::numbers::pi / 4.0;
  const long k = std::lround(wrap_angle(angle) / step);
  return static_cast<int>(((k % kHeadingBins) + kHeadingBins) % kHeadingBins);
}

Observation observe(const ElevationMap& map, Vec2 query, int heading_bin, const FeatureLayout& layout, Vec2 jitter) {
  if (layout.crop_cells < 1 || !(layout.resolution > 0.0)) throw LayoutError("invalid feature layout");
  const double angle = heading_bin_angle(heading_bin);
  const Vec2 fwd = unit_from_angle(angle);
  const Vec2 left{-fwd.y, fwd.x};
  const Vec2 center = query + fwd * (layout.forward_offset + jitter.x) + left * jitter.y;
  const double ref = map.height_at_clamped(query.x, query.y);
  const int n = layout.crop_cells;
  const double half = 0.5 * (n - 1);

  Observation obs;
  obs.heading_bin = heading_bin;
  obs.local_map.resize(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Vec2 p = center + fwd * ((i - half) * layout.resolution) + left * ((j - half) * layout.resolution);
      obs.local_map[static_cast<std::size_t>(j) * n + i] = static_cast<float>(map.height_at_clamped(p.x, p.y) - ref);
    }
  }
  const Vec2 rel = query - center;
  const double w = layout.window();
  obs.qx = static_cast<float>(std::clamp(0.5 + dot(rel, fwd) / w, 0.0, 1.0));
  obs.qy = static_cast<float>(std::clamp(0.5 + dot(rel, left) / w, 0.0, 1.0));
  return obs;
}

CollectResult collect_dataset(std::span<const ElevationMap> terrains, const EmbodimentSpec& spec,
                              const CollectConfig& config, std::uint64_t seed) {
  if (terrains.empty()) throw std::invalid_argument("collect_dataset: no terrains");
  if (config.n_samples < 1) throw std::invalid_argument("collect_dataset: n_samples must be >= 1");
  spec.validate();
  const std::size_t per_class = static_cast<std::size_t>(config.n_samples) / 2;
  const std::size_t budget = config.max_attempts ? config.max_attempts : 20 * static_cast<std::size_t>(config.n_samples);
  const double reach = config.rollout.horizon + config.edge_margin;
  for (const auto& map : terrains) {
    if (map.extent_x() <= 2.0 * reach || map.extent_y() <= 2.0 * reach) {
      throw std::invalid_argument("collect_dataset: terrain too small for the rollout horizon");
    }
  }

  Rng rng(derive_seed(seed, "collect"));
  CollectResult out;
  std::vector<AffordanceSample> success, failure;
  while (out.attempts < budget && (success.size() < per_class || failure.size() < per_class)) {
    const auto& map = terrains[rng.below(terrains.size())];
    const int bin = static_cast<int>(rng.below(kHeadingBins));
    const Vec2 dir = unit_from_angle(heading_bin_angle(bin));
    const double m = config.edge_margin;
    Vec2 start{}, end{};
    do {
      start = {rng.uniform(map.origin_x() + m, map.origin_x() + map.extent_x() - m),
               rng.uniform(map.origin_y() + m, map.origin_y() + map.extent_y() - m)};
      end = start + dir * reach;
    } while (end.x < map.origin_x() + m || end.x > map.origin_x() + map.extent_x() - m ||
             end.y < map.origin_y() + m || end.y > map.origin_y() + map.extent_y() - m);
    const Vec2 jitter{rng.uniform(-config.jitter, config.jitter), rng.uniform(-config.jitter, config.jitter)};
    ++out.attempts;

    const AgentState s0 = make_agent_state(map, spec, start.x, start.y, heading_bin_angle(bin));
    const RolloutOutcome r = rollout(map, spec, s0, heading_bin_angle(bin), config.rollout);
    (r.success ? out.raw_success : out.raw_failure) += 1;
    auto& bucket = r.success ? success : failure;
    if (bucket.size() >= per_class) continue;

    const Observation obs = observe(map, start, bin, config.layout, jitter);
    AffordanceSample s;
    s.crop_cells = config.layout.crop_cells;
    s.local_map = obs.local_map;
    s.qx = obs.qx;
    s.qy = obs.qy;
    s.heading_bin = static_cast<std::uint8_t>(bin);
    s.label = r.success ? 1 : 0;
    s.return_value = static_cast<float>(r.return_value);
    bucket.push_back(std::move(s));
  }

  const std::size_t k = std::min(success.size(), failure.size());
  out.balanced = k == per_class;
  if (!out.balanced) {
    std::ostringstream msg;
    msg << "budget exhausted after " << out.attempts << " rollouts: " << out.raw_success << " successes, "
        << out.raw_failure << " failures; balanced subset has " << 2 * k << " of " << 2 * per_class << " samples";
    out.warning = msg.str();
  }
  // Interleave so a prefix of the dataset is itself balanced.
  out.samples.reserve(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    out.samples.push_back(std::move(success[i]));
    out.samples.push_back(std::move(failure[i]));
  }
  return out;
}

std::string_view to_string(ModelMode mode) {
  return mode == ModelMode::classification ? "classification" : "regression";
}

ModelMode model_mode_from_string(std::string_view name) {
  if (name == "classification") return ModelMode::classification;
  if (name == "regression") return ModelMode::regression;
  throw std::invalid_argument("unknown model mode: " + std::string(name));
}

AffordanceModel::AffordanceModel(FeatureLayout layout, ModelMode mode, Mlp<float> net, nlohmann::json metadata)
    : layout_(layout), mode_(mode), net_(std::move(net)), metadata_(std::move(metadata)) {
  if (net_.input_size() != layout_.input_size()) {
    throw LayoutError("network expects " + std::to_string(net_.input_size()) + " inputs, layout provides " +
                      std::to_string(layout_.input_size()));
  }
}

void AffordanceModel::encode(std::span<const float> local_map, double qx, double qy, int heading_bin,
                             float* column) const {
  const auto cells = static_cast<std::size_t>(layout_.crop_cells) * layout_.crop_cells;
  if (local_map.size() != cells) {
    throw LayoutError("local map has " + std::to_string(local_map.size()) + " cells, model expects " +
                      std::to_string(cells));
  }
  if (heading_bin < 0 || heading_bin >= layout_.heading_bins) throw LayoutError("heading bin out of range");
  std::copy(local_map.begin(), local_map.end(), column);
  column[cells] = static_cast<float>(qx);
  column[cells + 1] = static_cast<float>(qy);
  std::fill(column + cells + 2, column + cells + 2 + layout_.heading_bins, 0.0f);
  column[cells + 2 + heading_bin] = 1.0f;
}

double AffordanceModel::query(std::span<const float> local_map, double qx, double qy, int heading_bin) const {
  Eigen::MatrixXf x(layout_.input_size(), 1);
  encode(local_map, qx, qy, heading_bin, x.data());
  return Mlp<float>::sigmoid(net_.logits(x)(0));
}

std::vector<double> AffordanceModel::query_batch(const Eigen::MatrixXf& features) const {
  if (features.rows() != layout_.input_size()) throw LayoutError("feature rows do not match the model layout");
  const auto z = net_.logits(features);
  std::vector<double> out(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(i)] = Mlp<float>::sigmoid(z(i));
  return out;
}

float training_target(const AffordanceSample& s, ModelMode mode) {
  return mode == ModelMode::classification ? static_cast<float>(s.label) : 1.0f + s.return_value;
}

namespace {

LossKind loss_kind(ModelMode mode) {
  return mode == ModelMode::classification ? LossKind::bce_logits : LossKind::squared_sigmoid;
}

Eigen::MatrixXf feature_matrix(const AffordanceModel& model, std::span<const AffordanceSample> data) {
  Eigen::MatrixXf x(model.layout().input_size(), static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    model.encode(s.local_map, s.qx, s.qy, s.heading_bin, x.col(static_cast<Eigen::Index>(i)).data());
  }
  return x;
}

Eigen::RowVectorXf target_row(std::span<const AffordanceSample> data, ModelMode mode) {
  Eigen::RowVectorXf y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i)) = training_target(data[i], mode);
  return y;
}

nlohmann::json layout_json(const FeatureLayout& l) {
  return {{"crop_cells", l.crop_cells},
          {"resolution", l.resolution},
          {"forward_offset", l.forward_offset},
          {"heading_bins", l.heading_bins},
          {"feature_order", {"local_map", "qx", "qy", "heading_onehot"}}};
}

}  // namespace

AffordanceModel train(std::span<const AffordanceSample> dataset, const FeatureLayout& layout,
                      const TrainConfig& config, std::uint64_t seed, TrainReport* report) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (config.batch_size < 1 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("train: invalid hyperparameters");
  }
  std::vector<int> sizes{layout.input_size()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  Rng init_rng(derive_seed(seed, "train/init"));
  Rng shuffle_rng(derive_seed(seed, "train/shuffle"));

  nlohmann::json meta{{"seed", seed},
                      {"hidden", config.hidden},
                      {"learning_rate", config.learning_rate},
                      {"batch_size", config.batch_size},
                      {"epochs", config.epochs},
                      {"samples", dataset.size()}};
  AffordanceModel model(layout, config.mode, Mlp<float>(sizes, init_rng), meta);
  const Eigen::MatrixXf x = feature_matrix(model, dataset);
  const Eigen::RowVectorXf y = target_row(dataset, config.mode);
  const LossKind kind = loss_kind(config.mode);

  // The model is rebuilt at the end; train a local copy of the network.
  Mlp<float> net = model.net();
  Adam<float> opt(net, config.learning_rate);
  TrainReport rep;
  rep.initial_loss = net.loss_and_grad(x, y, kind, nullptr);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<Mlp<float>::Layer> grads;
  Eigen::MatrixXf xb;
  Eigen::RowVectorXf yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(end - begin);
      xb.resize(x.rows(), b);
      yb.resize(b);
      for (Eigen::Index k = 0; k < b; ++k) {
        xb.col(k) = x.col(order[begin + static_cast<std::size_t>(k)]);
        yb(k) = y(order[begin + static_cast<std::size_t>(k)]);
      }
      const float loss = net.loss_and_grad(xb, yb, kind, &grads);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                                 std::to_string(begin));
      }
      sum += static_cast<double>(loss) * static_cast<double>(b);
      opt.step(net, grads);
    }
    rep.epoch_loss.push_back(sum / static_cast<double>(order.size()));
  }
  rep.final_loss = net.loss_and_grad(x, y, kind, nullptr);
  if (!std::isfinite(rep.final_loss)) throw std::runtime_error("train: non-finite final loss");
  meta["initial_loss"] = rep.initial_loss;
  meta["final_loss"] = rep.final_loss;
  if (report) *report = std::move(rep);
  return AffordanceModel(layout, config.mode, std::move(net), std::move(meta));
}

double dataset_loss(const AffordanceModel& model, std::span<const AffordanceSample> dataset) {
  if (dataset.empty()) throw std::invalid_argument("dataset_loss: empty dataset");
  return model.net().loss_and_grad(feature_matrix(model, dataset), target_row(dataset, model.mode()),
                                   loss_kind(model.mode()), nullptr);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] != 0) {
        pos_rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = idx.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("roc_auc: both classes are required");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport evaluate(const AffordanceModel& model, std::span<const AffordanceSample> dataset) {
  if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const auto scores = model.query_batch(feature_matrix(model, dataset));
  EvalReport r;
  r.n = dataset.size();
  std::vector<int> labels(dataset.size());
  double label_sum = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    labels[i] = dataset[i].label;
    label_sum += labels[i];
    const bool pred = scores[i] >= 0.5;
    if (pred && labels[i]) ++r.tp;
    else if (pred) ++r.fp;
    else if (labels[i]) ++r.fn;
    else ++r.tn;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
  r.label_mean = label_sum / static_cast<double>(r.n);
  const bool both = r.tp + r.fn > 0 && r.tn + r.fp > 0;
  r.auc = both ? roc_auc(scores, labels) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j{{"n", r.n},
                   {"accuracy", r.accuracy},
                   {"label_mean", r.label_mean},
                   {"confusion", {{"tp", r.tp}, {"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}}}};
  j["auc"] = std::isfinite(r.auc) ? nlohmann::json(r.auc) : nlohmann::json(nullptr);
  return j;
}

AffordanceGrid affordance_grid(const AffordanceModel& model, const ElevationMap& map, int heading_bin, int stride) {
  if (stride < 1) throw std::invalid_argument("affordance_grid: stride must be >= 1");
  AffordanceGrid g;
  g.stride = stride;
  g.heading_bin = heading_bin;
  g.width = (map.width_cells() + stride - 1) / stride;
  g.height = (map.height_cells() + stride - 1) / stride;
  g.values.reserve(static_cast<std::size_t>(g.width) * g.height);
  const FeatureLayout& layout = model.layout();
  Eigen::MatrixXf row_features(layout.input_size(), g.width);
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const auto [cx, cy] = map.cell_center(i * stride, j * stride);
      const Observation obs = observe(map, {cx, cy}, heading_bin, layout);
      model.encode(obs.local_map, obs.qx, obs.qy, heading_bin, row_features.col(i).data());
    }
    const auto scores = model.query_batch(row_features);
    g.values.insert(g.values.end(), scores.begin(), scores.end());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Sample and model files

void write_samples(std::ostream& os, std::span<const AffordanceSample> samples) {
  binio::put_magic(os, "AFS1");
  for (const auto& s : samples) {
    if (s.local_map.size() != static_cast<std::size_t>(s.crop_cells) * s.crop_cells) {
      throw std::invalid_argument("write_samples: crop size does not match crop_cells");
    }
    binio::put_u32(os, static_cast<std::uint32_t>(s.crop_cells));
    for (float v : s.local_map) binio::put_f32(os, v);
    binio::put_f32(os, s.qx);
    binio::put_f32(os, s.qy);
    binio::put_u8(os, s.heading_bin);
    binio::put_u8(os, s.label);
    binio::put_f32(os, s.return_value);
  }
  if (!os) throw std::runtime_error("write_samples: stream error");
}

std::vector<AffordanceSample> read_samples(std::istream& is) {
  binio::expect_magic(is, "AFS1");
  std::vector<AffordanceSample> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    AffordanceSample s;
    const std::uint32_t n = binio::get_u32(is);
    if (n == 0 || n > 1024) throw FormatError("AFS1: implausible crop size " + std::to_string(n));
    s.crop_cells = static_cast<int>(n);
    s.local_map.resize(static_cast<std::size_t>(n) * n);
    for (float& v : s.local_map) v = binio::get_f32(is);
    s.qx = binio::get_f32(is);
    s.qy = binio::get_f32(is);
    s.heading_bin = binio::get_u8(is);
    s.label = binio::get_u8(is);
    s.return_value = binio::get_f32(is);
    if (!(s.qx >= 0.0f && s.qx <= 1.0f && s.qy >= 0.0f && s.qy <= 1.0f)) throw FormatError("AFS1: query outside [0,1]");
    if (s.heading_bin >= kHeadingBins) throw FormatError("AFS1: heading bin out of range");
    if (s.label > 1) throw FormatError("AFS1: label must be 0 or 1");
    out.push_back(std::move(s));
  }
  return out;
}

void save_samples(const std::filesystem::path& path, std::span<const AffordanceSample> samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_samples(os, samples);
}

std::vector<AffordanceSample> load_samples(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_samples(is);
}

void write_model(std::ostream& os, const AffordanceModel& model) {
  const auto& layers = model.net().layers();
  binio::put_magic(os, "AFM1");
  binio::put_u32(os, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    binio::put_u32(os, static_cast<std::uint32_t>(l.weight.rows()));
    binio::put_u32(os, static_cast<std::uint32_t>(l.weight.cols()));
  }
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) binio::put_f32(os, l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) binio::put_f32(os, l.bias(r));
  }
  if (!os) throw std::runtime_error("write_model: stream error");
}

nlohmann::json model_sidecar(const AffordanceModel& model) {
  return {{"format", "AFM1"},
          {"layout", layout_json(model.layout())},
          {"mode", std::string(to_string(model.mode()))},
          {"training", model.metadata()}};
}

AffordanceModel read_model(std::istream& is, const nlohmann::json& sidecar) {
  FeatureLayout layout;
  ModelMode mode;
  nlohmann::json meta;
  try {
    const auto& l = sidecar.at("layout");
    layout.crop_cells = l.at("crop_cells").get<int>();
    layout.resolution = l.at("resolution").get<double>();
    layout.forward_offset = l.at("forward_offset").get<double>();
    layout.heading_bins = l.at("heading_bins").get<int>();
    mode = model_mode_from_string(sidecar.at("mode").get<std::string>());
    meta = sidecar.value("training", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("AFM1 sidecar: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("AFM1 sidecar: ") + e.what());
  }
  if (layout.heading_bins != kHeadingBins) throw LayoutError("AFM1 sidecar: unsupported heading encoding");

  binio::expect_magic(is, "AFM1");
  const std::uint32_t count = binio::get_u32(is);
  if (count == 0 || count > 64) throw FormatError("AFM1: implausible layer count");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(count);
  for (auto& [out, in] : shapes) {
    out = binio::get_u32(is);
    in = binio::get_u32(is);
    if (out == 0 || in == 0 || out > (1u << 16) || in > (1u << 16)) throw FormatError("AFM1: implausible layer shape");
  }
  for (std::size_t l = 1; l < shapes.size(); ++l) {
    if (shapes[l].second != shapes[l - 1].first) throw FormatError("AFM1: layer shapes do not chain");
  }
  if (shapes.back().first != 1) throw FormatError("AFM1: network must have one output");
  std::vector<Mlp<float>::Layer> layers;
  for (const auto& [out, in] : shapes) {
    Mlp<float>::Layer layer{Eigen::MatrixXf(out, in), Eigen::VectorXf(out)};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = binio::get_f32(is);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = binio::get_f32(is);
    layers.push_back(std::move(layer));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("AFM1: trailing bytes");
  return AffordanceModel(layout, mode, Mlp<float>(std::move(layers)), std::move(meta));
}

void save_model(const std::filesystem::path& path, const AffordanceModel& model) {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_model(os, model);
  }
  std::ofstream js(path.string() + ".json");
  if (!js) throw IoError("cannot open " + path.string() + ".json for writing");
  js << model_sidecar(model).dump(2) << '\n';
}

AffordanceModel load_model(const std::filesystem::path& path) {
  std::ifstream js(path.string() + ".json");
  if (!js) throw IoError("cannot open model sidecar " + path.string() + ".json");
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model sidecar: ") + e.what());
  }
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_model(is, sidecar);
}

}  // namespace affordnav
