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

#include "affordnav/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "affordnav/errors.hpp"

namespace affordnav {

namespace {

using nlohmann::json;

/// Reads fields of one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  void range(const char* key, Range& out) {
    std::vector<double> v{out.lo, out.hi};
    get(key, v);
    if (v.size() != 2) throw ConfigError(where(key) + ": expected [lo, hi]");
    out = {v[0], v[1]};
  }

  bool has(const char* key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  const json& at(const char* key) const { return obj_.at(key); }
  std::string where(std::string_view key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key: " + where(k));
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

void read_terrain(Reader& r, RunConfig& cfg) {
  if (r.has("families")) {
    std::vector<std::string> names;
    r.get("families", names);
    cfg.families.clear();
    for (const auto& n : names) {
      if (n == "all") {
        cfg.families.assign(std::begin(kGeneratedFamilies), std::end(kGeneratedFamilies));
        continue;
      }
      try {
        cfg.families.push_back(family_from_string(n));
      } catch (const std::invalid_argument&) {
        throw ConfigError(r.where("families") + ": unknown family '" + n + "'");
      }
    }
  }
  r.get("per_family", cfg.terrains_per_family);
  TerrainParams& p = cfg.terrain_overrides;
  r.get("resolution", p.resolution);
  r.range("step_rise", p.step_rise);
  r.range("ramp_gradient", p.ramp_gradient);
  r.get("tiles_per_side", p.tiles_per_side);
  r.range("level_gap", p.level_gap);
  r.range("box_height", p.box_height);
  r.range("box_footprint", p.box_footprint);
  r.get("seed_count", p.seed_count);
  r.range("mound_height", p.mound_height);
  r.get("smoothing_threshold", p.smoothing_threshold);
  r.get("smoothing_iterations", p.smoothing_iterations);
  r.get("terrace_step", p.terrace_step);
  r.finish();
}

void read_embodiment(Reader& r, EmbodimentSpec& s) {
  std::string kind(to_string(s.kind));
  r.get("kind", kind);
  try {
    s.kind = embodiment_kind_from_string(kind);
  } catch (const std::invalid_argument&) {
    throw ConfigError(r.where("kind") + ": unknown embodiment kind '" + kind + "'");
  }
  r.get("max_step_up", s.max_step_up);
  r.get("max_step_down", s.max_step_down);
  r.get("max_slope", s.max_slope);
  r.get("speed", s.speed);
  r.get("ride_height", s.ride_height);
  r.get("body_length", s.body_length);
  r.get("body_width", s.body_width);
  r.get("slope_baseline", s.slope_baseline);
  r.get("turn_rate", s.turn_rate);
  r.get("wheelbase", s.wheelbase);
  r.get("max_steering", s.max_steering);
  r.get("lookahead", s.lookahead);
  r.finish();
}

void read_selection(Reader& r, SelectionConfig& s) {
  std::string mode(to_string(s.mode));
  r.get("mode", mode);
  try {
    s.mode = selection_mode_from_string(mode);
  } catch (const std::invalid_argument&) {
    throw ConfigError(r.where("mode") + ": unknown selection mode '" + mode + "'");
  }
  r.get("beta", s.beta);
  r.get("reject_threshold", s.reject_threshold);
  r.finish();
}

void read_mission(Reader& r, MissionConfig& m) {
  r.get("k", m.k);
  r.get("m", m.m);
  r.get("waypoint_tolerance", m.waypoint_tolerance);
  r.get("plan_timeout", m.plan_timeout);
  r.get("episode_cap", m.episode_cap);
  r.get("dt", m.dt);
  double rotate_deg = m.rotate_increment * 180.0 / std::numbers::pi;
  r.get("rotate_increment_deg", rotate_deg);
  m.rotate_increment = deg2rad(rotate_deg);
  r.get("waypoint_spacing", m.waypoint_spacing);
  r.get("query_spacing", m.query_spacing);
  r.get("planner_spread", m.planner_spread);
  r.get("tau", m.tau);
  r.get("grace", m.grace);
  if (r.has("selection")) {
    Reader sr(r.at("selection"), r.where("selection"));
    read_selection(sr, m.selection);
  }
  r.finish();
}

}  // namespace

const EmbodimentSpec& RunConfig::embodiment(const std::string& name) const {
  const auto it = embodiments.find(name);
  if (it == embodiments.end()) throw ConfigError("unknown embodiment: " + name);
  return it->second;
}

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  Reader top(doc, "");
  top.get("master_seed", cfg.master_seed);
  top.get("output_dir", cfg.output_dir);
  if (top.has("terrain")) {
    Reader r(doc.at("terrain"), "terrain");
    read_terrain(r, cfg);
  }
  if (top.has("embodiments")) {
    const json& e = doc.at("embodiments");
    if (!e.is_object()) throw ConfigError("embodiments must be an object");
    for (const auto& [name, body] : e.items()) {
      EmbodimentSpec spec;
      const auto known = cfg.embodiments.find(name);
      if (known != cfg.embodiments.end()) {
        spec = known->second;
      } else if (body.is_object() && body.contains("kind") && body["kind"].is_string()) {
        try {
          spec = EmbodimentSpec::by_name(body["kind"].get<std::string>());
        } catch (const std::invalid_argument&) {
          // reported by read_embodiment with the key path
        }
      } else {
        throw ConfigError("embodiments." + name + ": new embodiments need a 'kind'");
      }
      Reader r(body, "embodiments." + name);
      read_embodiment(r, spec);
      cfg.embodiments[name] = spec;
    }
  }
  if (top.has("collect")) {
    Reader r(doc.at("collect"), "collect");
    r.get("samples", cfg.collect.n_samples);
    r.get("max_attempts", cfg.collect.max_attempts);
    r.get("horizon", cfg.collect.rollout.horizon);
    r.get("dt", cfg.collect.rollout.dt);
    r.get("time_cap", cfg.collect.rollout.time_cap);
    r.get("gamma", cfg.collect.rollout.gamma);
    r.get("jitter", cfg.collect.jitter);
    r.get("edge_margin", cfg.collect.edge_margin);
    r.get("holdout_fraction", cfg.holdout_fraction);
    r.finish();
  }
  if (top.has("affordance")) {
    Reader r(doc.at("affordance"), "affordance");
    r.get("hidden", cfg.train.hidden);
    r.get("learning_rate", cfg.train.learning_rate);
    r.get("batch_size", cfg.train.batch_size);
    r.get("epochs", cfg.train.epochs);
    std::string mode(to_string(cfg.train.mode));
    r.get("mode", mode);
    try {
      cfg.train.mode = model_mode_from_string(mode);
    } catch (const std::invalid_argument&) {
      throw ConfigError("affordance.mode: unknown mode '" + mode + "'");
    }
    r.finish();
  }
  if (top.has("mission")) {
    Reader r(doc.at("mission"), "mission");
    read_mission(r, cfg.mission);
  }
  if (top.has("benchmark")) {
    Reader r(doc.at("benchmark"), "benchmark");
    r.get("episodes", cfg.episodes);
    if (r.has("scenarios")) {
      const json& list = r.at("scenarios");
      if (!list.is_array()) throw ConfigError("benchmark.scenarios must be an array");
      cfg.benchmark.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        Reader e(list[i], "benchmark.scenarios[" + std::to_string(i) + "]");
        BenchmarkEntry entry;
        e.get("scenario", entry.scenario);
        e.get("embodiments", entry.embodiments);
        e.finish();
        cfg.benchmark.push_back(std::move(entry));
      }
    }
    r.finish();
  }
  top.finish();

  // Semantic checks, reported with the key that carries the value.
  if (cfg.families.empty()) throw ConfigError("terrain.families: at least one family is required");
  if (cfg.terrains_per_family < 1) throw ConfigError("terrain.per_family must be >= 1");
  if (cfg.collect.n_samples < 2) throw ConfigError("collect.samples must be >= 2");
  if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
    throw ConfigError("collect.holdout_fraction must be in [0, 1)");
  }
  if (cfg.episodes < 1) throw ConfigError("benchmark.episodes must be >= 1");
  auto rethrow = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
  };
  rethrow("terrain", [&] { cfg.terrain_overrides.validate(); });
  rethrow("mission", [&] { cfg.mission.validate(); });
  for (const auto& [name, spec] : cfg.embodiments) {
    rethrow(("embodiments." + name).c_str(), [&] { spec.validate(); });
  }
  for (const auto& entry : cfg.benchmark) {
    rethrow("benchmark.scenarios", [&] { find_scenario(entry.scenario); });
    for (const auto& e : entry.embodiments) cfg.embodiment(e);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
  json families = json::array();
  for (auto f : cfg.families) families.push_back(std::string(to_string(f)));
  const TerrainParams& p = cfg.terrain_overrides;
  json emb = json::object();
  for (const auto& [name, s] : cfg.embodiments) {
    emb[name] = {{"kind", std::string(to_string(s.kind))},
                 {"max_step_up", s.max_step_up},
                 {"max_step_down", s.max_step_down},
                 {"max_slope", s.max_slope},
                 {"speed", s.speed},
                 {"ride_height", s.ride_height},
                 {"body_length", s.body_length},
                 {"body_width", s.body_width},
                 {"slope_baseline", s.slope_baseline},
                 {"turn_rate", s.turn_rate},
                 {"wheelbase", s.wheelbase},
                 {"max_steering", s.max_steering},
                 {"lookahead", s.lookahead}};
  }
  json scenarios = json::array();
  for (const auto& b : cfg.benchmark) scenarios.push_back({{"scenario", b.scenario}, {"embodiments", b.embodiments}});
  const MissionConfig& m = cfg.mission;
  return {
      {"master_seed", cfg.master_seed},
      {"output_dir", cfg.output_dir},
      {"terrain",
       {{"families", families},
        {"per_family", cfg.terrains_per_family},
        {"resolution", p.resolution},
        {"step_rise", {p.step_rise.lo, p.step_rise.hi}},
        {"ramp_gradient", {p.ramp_gradient.lo, p.ramp_gradient.hi}},
        {"tiles_per_side", p.tiles_per_side},
        {"level_gap", {p.level_gap.lo, p.level_gap.hi}},
        {"box_height", {p.box_height.lo, p.box_height.hi}},
        {"box_footprint", {p.box_footprint.lo, p.box_footprint.hi}},
        {"seed_count", p.seed_count},
        {"mound_height", {p.mound_height.lo, p.mound_height.hi}},
        {"smoothing_threshold", p.smoothing_threshold},
        {"smoothing_iterations", p.smoothing_iterations},
        {"terrace_step", p.terrace_step}}},
      {"embodiments", emb},
      {"collect",
       {{"samples", cfg.collect.n_samples},
        {"max_attempts", cfg.collect.max_attempts},
        {"horizon", cfg.collect.rollout.horizon},
        {"dt", cfg.collect.rollout.dt},
        {"time_cap", cfg.collect.rollout.time_cap},
        {"gamma", cfg.collect.rollout.gamma},
        {"jitter", cfg.collect.jitter},
        {"edge_margin", cfg.collect.edge_margin},
        {"holdout_fraction", cfg.holdout_fraction}}},
      {"affordance",
       {{"hidden", cfg.train.hidden},
        {"learning_rate", cfg.train.learning_rate},
        {"batch_size", cfg.train.batch_size},
        {"epochs", cfg.train.epochs},
        {"mode", std::string(to_string(cfg.train.mode))}}},
      {"mission",
       {{"k", m.k},
        {"m", m.m},
        {"waypoint_tolerance", m.waypoint_tolerance},
        {"plan_timeout", m.plan_timeout},
        {"episode_cap", m.episode_cap},
        {"dt", m.dt},
        {"rotate_increment_deg", m.rotate_increment * 180.0 / std::numbers::pi},
        {"waypoint_spacing", m.waypoint_spacing},
        {"query_spacing", m.query_spacing},
        {"planner_spread", m.planner_spread},
        {"tau", m.tau},
        {"grace", m.grace},
        {"selection",
         {{"mode", std::string(to_string(m.selection.mode))},
          {"beta", m.selection.beta},
          {"reject_threshold", m.selection.reject_threshold}}}}},
      {"benchmark", {{"episodes", cfg.episodes}, {"scenarios", scenarios}}},
  };
}

std::uint64_t terrain_seed(std::uint64_t master, TerrainFamily family, int index) {
  const std::string stream = "terrain/" + std::string(to_string(family));
  return derive_seed(derive_seed(master, stream), static_cast<std::uint64_t>(index));
}

std::vector<ElevationMap> generate_terrain_set(const RunConfig& cfg) {
  std::vector<ElevationMap> out;
  out.reserve(cfg.families.size() * static_cast<std::size_t>(cfg.terrains_per_family));
  for (TerrainFamily f : cfg.families) {
    TerrainParams p = cfg.terrain_overrides;
    p.family = f;
    for (int i = 0; i < cfg.terrains_per_family; ++i) out.push_back(generate_terrain(terrain_seed(cfg.master_seed, f, i), p));
  }
  return out;
}

std::pair<std::vector<AffordanceSample>, std::vector<AffordanceSample>> split_holdout(
    std::vector<AffordanceSample> samples, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("split_holdout: fraction must be in [0, 1)");
  std::size_t n_hold = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples.size())));
  n_hold -= n_hold % 2;
  std::vector<AffordanceSample> hold(std::make_move_iterator(samples.end() - static_cast<std::ptrdiff_t>(n_hold)),
                                     std::make_move_iterator(samples.end()));
  samples.resize(samples.size() - n_hold);
  return {std::move(samples), std::move(hold)};
}

TrainedEmbodiment train_embodiment(const RunConfig& cfg, const std::string& name,
                                   const std::vector<ElevationMap>& terrains) {
  TrainedEmbodiment t;
  t.name = name;
  const EmbodimentSpec& spec = cfg.embodiment(name);
  t.collected = collect_dataset(terrains, spec, cfg.collect, cfg.stream("collect/" + name));
  if (t.collected.samples.empty()) throw std::runtime_error("no balanced samples collected for " + name);
  auto [train_set, hold] = split_holdout(t.collected.samples, cfg.holdout_fraction);
  t.train_set = std::move(train_set);
  t.holdout_set = std::move(hold);
  t.model = train(t.train_set, cfg.collect.layout, cfg.train, cfg.stream("train/" + name), &t.report);
  t.model.metadata()["embodiment"] = name;
  if (!t.holdout_set.empty()) t.holdout = evaluate(t.model, t.holdout_set);
  return t;
}

PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  PipelineResult res;
  const std::vector<ElevationMap> terrains = generate_terrain_set(cfg);
  if (!out.empty()) {
    fs::create_directories(out / "terrains");
    for (std::size_t i = 0; i < terrains.size(); ++i) {
      const std::string stem = std::string(to_string(terrains[i].family())) + "_" + std::to_string(i);
      save_emap(out / "terrains" / (stem + ".emap"), terrains[i]);
    }
    std::ofstream(out / "config.json") << to_json(cfg).dump(2) << '\n';
  }

  std::set<std::string> needed;
  for (const auto& b : cfg.benchmark) needed.insert(b.embodiments.begin(), b.embodiments.end());
  for (const auto& name : needed) {
    res.models.push_back(train_embodiment(cfg, name, terrains));
    if (!out.empty()) {
      const auto& t = res.models.back();
      save_samples(out / (name + ".afs"), t.collected.samples);
      save_model(out / (name + ".afm"), t.model);
      std::ofstream(out / (name + ".holdout.json")) << to_json(t.holdout).dump(2) << '\n';
    }
  }
  auto model_for = [&](const std::string& name) -> const AffordanceModel& {
    for (const auto& t : res.models) {
      if (t.name == name) return t.model;
    }
    throw std::logic_error("model missing for " + name);
  };

  for (const auto& b : cfg.benchmark) {
    for (const auto& name : b.embodiments) {
      const EmbodimentSpec& spec = cfg.embodiment(name);
      const std::uint64_t seed = cfg.stream("mission/" + b.scenario + "/" + name);
      for (bool ablate : {false, true}) {
        MissionConfig mc = cfg.mission;
        mc.ablate_modulation = ablate;
        mc.selection.seed = seed;
        BenchmarkRow row = run_scenario_benchmark(b.scenario, spec, ablate ? nullptr : &model_for(name), mc,
                                                  cfg.episodes, seed);
        row.embodiment = name;
        res.rows.push_back(std::move(row));
      }
    }
  }
  res.markdown = benchmark_markdown(res.rows);
  res.csv = benchmark_csv(res.rows);
  if (!out.empty()) {
    std::ofstream(out / "benchmark.md") << res.markdown;
    std::ofstream(out / "benchmark.csv") << res.csv;
  }
  return res;
}

}  // namespace affordnav
