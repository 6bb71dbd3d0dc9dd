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
#include <sstream>

#include "affordnav/affordance.hpp"
#include "affordnav/errors.hpp"
#include "affordnav/pipeline.hpp"
#include "doctest.h"

using namespace affordnav;

namespace {

using Md = Mlp<double>;

/// Central-difference gradient check on every parameter of every layer.
double max_relative_gradient_error(LossKind kind) {
  Rng rng(5);
  Md net({6, 5, 4, 1}, rng);
  for (auto& l : net.layers()) l.bias = Md::Vector::Random(l.bias.size()) * 0.1;
  Md::Matrix x(6, 7);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  Md::Row y(7);
  for (Eigen::Index i = 0; i < 7; ++i) y(i) = kind == LossKind::bce_logits ? double(i % 2) : rng.uniform();

  std::vector<Md::Layer> grads;
  net.loss_and_grad(x, y, kind, &grads);
  const double h = 1e-6;
  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = net.loss_and_grad(x, y, kind, nullptr);
    param = keep - h;
    const double down = net.loss_and_grad(x, y, kind, nullptr);
    param = keep;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(numeric - analytic) / std::max(1e-6, std::abs(numeric) + std::abs(analytic)));
  };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) probe(layer.weight.data()[i], grads[l].weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) probe(layer.bias.data()[i], grads[l].bias.data()[i]);
  }
  return worst;
}

std::vector<ElevationMap> mixed_terrains() {
  std::vector<ElevationMap> maps;
  for (int i = 0; i < 3; ++i) {
    maps.push_back(generate_terrain(i, TerrainParams::defaults(TerrainFamily::simple_stairs)));
    maps.push_back(generate_terrain(i, TerrainParams::defaults(TerrainFamily::procedural)));
  }
  return maps;
}

const std::vector<AffordanceSample>& small_dataset(const EmbodimentSpec& spec) {
  static std::map<int, std::vector<AffordanceSample>> cache;
  auto& v = cache[static_cast<int>(spec.kind)];
  if (v.empty()) {
    CollectConfig cc;
    cc.n_samples = 1200;
    const auto maps = mixed_terrains();
    v = collect_dataset(maps, spec, cc, 3).samples;
  }
  return v;
}

TrainConfig quick_train() {
  TrainConfig tc;
  tc.hidden = {32, 16};
  tc.epochs = 15;
  tc.batch_size = 64;
  return tc;
}

std::string model_bytes(const AffordanceModel& m) {
  std::ostringstream os;
  write_model(os, m);
  return os.str() + model_sidecar(m).dump();
}

/// Pairwise AUC: P(score_pos > score_neg) + 0.5 P(tie).
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences on every layer") {
  CHECK(max_relative_gradient_error(LossKind::bce_logits) < 1e-6);
  CHECK(max_relative_gradient_error(LossKind::squared_sigmoid) < 1e-6);
}

TEST_CASE("Adam fits a separable toy problem") {
  Rng rng(2);
  Mlp<float> net({2, 8, 1}, rng);
  Adam<float> opt(net, 1e-2);
  Eigen::MatrixXf x(2, 64);
  Eigen::RowVectorXf y(64);
  for (int i = 0; i < 64; ++i) {
    x(0, i) = static_cast<float>(rng.uniform(-1, 1));
    x(1, i) = static_cast<float>(rng.uniform(-1, 1));
    y(i) = x(0, i) + x(1, i) > 0 ? 1.0f : 0.0f;
  }
  std::vector<Mlp<float>::Layer> g;
  const float first = net.loss_and_grad(x, y, LossKind::bce_logits, &g);
  for (int it = 0; it < 300; ++it) {
    net.loss_and_grad(x, y, LossKind::bce_logits, &g);
    opt.step(net, g);
  }
  CHECK(net.loss_and_grad(x, y, LossKind::bce_logits, nullptr) < 0.25f * first);
}

TEST_CASE("Mlp rejects malformed shapes") {
  Rng rng(1);
  CHECK_THROWS_AS(Mlp<float>({3, 2}, rng), std::invalid_argument);
  CHECK_THROWS_AS(Mlp<float>({3}, rng), std::invalid_argument);
}

TEST_CASE("heading bins") {
  CHECK(heading_bin_angle(2) == doctest::Approx(std::numbers::pi / 2));
  CHECK_THROWS_AS(heading_bin_angle(8), std::out_of_range);
  CHECK(snap_heading(0.1) == 0);
  CHECK(snap_heading(-0.1) == 0);
  CHECK(snap_heading(std::numbers::pi) == 4);
  CHECK(snap_heading(-std::numbers::pi / 2) == 6);
  CHECK(snap_heading(0.4) == 1);
  for (int b = 0; b < 8; ++b) CHECK(snap_heading(heading_bin_angle(b) + 2 * std::numbers::pi) == b);
}

TEST_CASE("observations are relative to the query point") {
  const FeatureLayout layout;
  CHECK(layout.input_size() == 25 * 25 + 2 + 8);
  ElevationMap flat(100, 100, 0.1);
  for (double& h : flat.heights()) h = 1.7;
  const auto o = observe(flat, {5, 5}, 3, layout);
  for (float v : o.local_map) CHECK(v == 0.0f);
  CHECK(o.qx == doctest::Approx(0.5 - 0.75 / 2.5));
  CHECK(o.qy == doctest::Approx(0.5));

  // a 0.3 m rise one metre ahead shows up in the far half of the crop only
  ElevationMap step(100, 100, 0.1);
  for (int r = 0; r < 100; ++r)
    for (int c = 60; c < 100; ++c) step.at(c, r) = 0.3;
  const auto s = observe(step, {5.0, 5.0}, 0, layout);
  CHECK(s.local_map[12 * 25 + 0] == 0.0f);
  CHECK(s.local_map[12 * 25 + 24] == doctest::Approx(0.3f));
  // heading bin 4 looks the other way
  const auto back = observe(step, {5.0, 5.0}, 4, layout);
  for (float v : back.local_map) CHECK(v == 0.0f);
}

TEST_CASE("dataset collection is balanced and deterministic") {
  const auto maps = mixed_terrains();
  CollectConfig cc;
  cc.n_samples = 200;
  const auto a = collect_dataset(maps, EmbodimentSpec::wheeled(), cc, 9);
  const auto b = collect_dataset(maps, EmbodimentSpec::wheeled(), cc, 9);
  CHECK(a.balanced);
  CHECK(a.warning.empty());
  REQUIRE(a.samples.size() == 200u);
  CHECK(a.samples == b.samples);
  int pos = 0;
  for (const auto& s : a.samples) pos += s.label;
  CHECK(pos == 100);
  for (const auto& s : a.samples) {
    CHECK((s.label == 1) == (s.return_value == 0.0f));
    CHECK(s.local_map.size() == 625u);
  }
}

TEST_CASE("collection reports an unbalanced budget") {
  std::vector<ElevationMap> flat{ElevationMap(100, 100, 0.1)};
  CollectConfig cc;
  cc.n_samples = 20;
  cc.max_attempts = 50;
  const auto r = collect_dataset(flat, EmbodimentSpec::legged(), cc, 1);
  CHECK_FALSE(r.balanced);
  CHECK(r.samples.empty());
  CHECK(r.raw_failure == 0u);
  CHECK_FALSE(r.warning.empty());
  std::vector<ElevationMap> tiny{ElevationMap(20, 20, 0.1)};
  CHECK_THROWS_AS(collect_dataset(tiny, EmbodimentSpec::legged(), cc, 1), std::invalid_argument);
}

TEST_CASE("AFS round trip and validation") {
  const auto& data = small_dataset(EmbodimentSpec::wheeled());
  std::stringstream ss;
  write_samples(ss, data);
  CHECK(read_samples(ss) == data);
  std::string bytes;
  {
    std::ostringstream os;
    write_samples(os, data);
    bytes = os.str();
  }
  std::string bad = bytes;
  bad[1] = 'Z';
  std::istringstream b1(bad);
  CHECK_THROWS_AS(read_samples(b1), FormatError);
  std::istringstream b2(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_samples(b2), FormatError);
}

TEST_CASE("training is deterministic and outputs stay in [0,1]") {
  const auto& data = small_dataset(EmbodimentSpec::wheeled());
  const FeatureLayout layout;
  TrainReport rep;
  const auto m1 = train(data, layout, quick_train(), 4, &rep);
  const auto m2 = train(data, layout, quick_train(), 4);
  CHECK(model_bytes(m1) == model_bytes(m2));
  CHECK(rep.final_loss < rep.initial_loss);
  CHECK(rep.epoch_loss.size() == 15u);
  CHECK(m1.metadata()["seed"] == 4);

  Rng rng(8);
  std::vector<float> crop(625);
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = trial < 100 ? 0.5 : 1e3;
    for (float& v : crop) v = static_cast<float>(rng.uniform(-scale, scale));
    const double q = m1.query(crop, rng.uniform(), rng.uniform(), static_cast<int>(rng.below(8)));
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
  CHECK_THROWS_AS(m1.query(std::vector<float>(10), 0.5, 0.5, 0), LayoutError);
  CHECK_THROWS_AS(m1.query(crop, 0.5, 0.5, 8), LayoutError);
}

TEST_CASE("regression mode targets the shifted return") {
  AffordanceSample s;
  s.label = 0;
  s.return_value = -0.9f;
  CHECK(training_target(s, ModelMode::classification) == 0.0f);
  CHECK(training_target(s, ModelMode::regression) == doctest::Approx(0.1f));
  CHECK(model_mode_from_string("regression") == ModelMode::regression);
  CHECK_THROWS_AS(model_mode_from_string("ranking"), std::invalid_argument);
}

TEST_CASE("AFM round trip with sidecar") {
  const auto& data = small_dataset(EmbodimentSpec::wheeled());
  const auto m = train(data, FeatureLayout{}, quick_train(), 1);
  std::stringstream ss;
  write_model(ss, m);
  const auto back = read_model(ss, model_sidecar(m));
  CHECK(model_bytes(back) == model_bytes(m));
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& s = data[i];
    CHECK(back.query(s.local_map, s.qx, s.qy, s.heading_bin) == m.query(s.local_map, s.qx, s.qy, s.heading_bin));
  }
  auto sidecar = model_sidecar(m);
  sidecar["layout"]["crop_cells"] = 21;
  std::stringstream ss2;
  write_model(ss2, m);
  CHECK_THROWS_AS(read_model(ss2, sidecar), LayoutError);
  std::stringstream ss3("AFM0xxxxxxxx");
  CHECK_THROWS_AS(read_model(ss3, model_sidecar(m)), FormatError);
}

TEST_CASE("evaluation metrics agree with a pairwise AUC oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      y.push_back(i % 3 == 0);
      // coarse scores force ties
      s.push_back(std::round(rng.uniform() * 5.0) / 5.0 + 0.2 * y.back());
    }
    CHECK(roc_auc(s, y) == doctest::Approx(pairwise_auc(s, y)).epsilon(1e-12));
  }
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{1, 1};
  CHECK_THROWS_AS(roc_auc(s, y), std::invalid_argument);
}

TEST_CASE("evaluate confusion counts") {
  const auto& data = small_dataset(EmbodimentSpec::wheeled());
  const auto m = train(data, FeatureLayout{}, quick_train(), 1);
  const auto r = evaluate(m, data);
  CHECK(r.n == data.size());
  CHECK(r.tp + r.tn + r.fp + r.fn == r.n);
  CHECK(r.accuracy == doctest::Approx(double(r.tp + r.tn) / r.n));
  CHECK(r.label_mean == doctest::Approx(0.5));
  CHECK(r.accuracy > 0.8);
  CHECK(to_json(r).contains("auc"));
}

TEST_CASE("flat map gives a near-constant affordance field") {
  Rng rng(12);
  const FeatureLayout layout;
  Mlp<float> net({layout.input_size(), 16, 1}, rng);
  const AffordanceModel m(layout, ModelMode::classification, net);
  ElevationMap flat(60, 40, 0.1);
  for (double& h : flat.heights()) h = 0.4;
  for (int bin = 0; bin < 8; ++bin) {
    const auto g = affordance_grid(m, flat, bin, 3);
    CHECK(g.width == 20);
    CHECK(g.height == 14);
    const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
    CHECK(*hi - *lo < 0.2);
  }
  CHECK_THROWS(affordance_grid(m, flat, 0, 0));
}

TEST_CASE("legged and wheeled models separate on staircase crops") {
  const FeatureLayout layout;
  const auto legged = train(small_dataset(EmbodimentSpec::legged()), layout, quick_train(), 2);
  const auto wheeled = train(small_dataset(EmbodimentSpec::wheeled()), layout, quick_train(), 2);
  TerrainParams p = TerrainParams::defaults(TerrainFamily::simple_stairs);
  p.step_rise = {0.1, 0.1};
  const auto stairs = generate_simple_stairs(77, p);
  double gap = 0.0;
  int n = 0;
  for (double x = 2.5; x <= 7.0; x += 0.5) {
    for (double y = 2.0; y <= 8.0; y += 1.0) {
      const auto o = observe(stairs, {x, y}, 0, layout);
      gap += legged.query(o) - wheeled.query(o);
      ++n;
    }
  }
  CHECK(gap / n > 0.3);
}
