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

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
// format error, 3 internal error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "affordnav/affordance.hpp"
#include "affordnav/datapipe.hpp"
#include "affordnav/errors.hpp"
#include "affordnav/metrics.hpp"
#include "affordnav/mission.hpp"
#include "affordnav/pipeline.hpp"
#include "affordnav/planner.hpp"
#include "affordnav/terrain.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace affordnav;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kInternal = 3;

fs::path output_root() {
  const char* env = std::getenv("AFFORDNAV_OUT");
  return env && *env ? fs::path(env) : fs::path("affordnav_out");
}

fs::path resolve_out(const std::string& given, const std::string& fallback) {
  return given.empty() ? output_root() / fallback : fs::path(given);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream os(p);
  if (!os) throw IoError("cannot open for writing: " + p.string());
  os << text;
}

json read_json_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot open: " + p.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

/// Builtin worlds are addressed by name; anything else is an EMAP path.
ElevationMap load_world(const std::string& spec) {
  if (spec == "heatmap") return build_heatmap_world();
  for (const auto& id : scenario_ids()) {
    if (spec == id) return build_scenario_world(id);
  }
  return load_emap(spec);
}

std::vector<ElevationMap> load_terrain_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".emap") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FormatError("no .emap files in " + dir.string());
  std::vector<ElevationMap> maps;
  for (const auto& f : files) maps.push_back(load_emap(f));
  return maps;
}

Vec2 parse_xy(const std::string& s) {
  double x, y;
  char comma;
  std::istringstream is(s);
  if (!(is >> x >> comma >> y) || comma != ',' || !is.eof()) {
    throw std::invalid_argument("expected x,y but got '" + s + "'");
  }
  return {x, y};
}

std::vector<Vec2> path_from_json(const json& j) {
  const json* pts = &j;
  if (j.is_object()) {
    if (j.contains("pixel_path")) pts = &j.at("pixel_path");
    else if (j.contains("world_points")) pts = &j.at("world_points");
    else if (j.contains("path")) pts = &j.at("path");
    else throw FormatError("path object needs pixel_path, world_points or path");
  }
  if (!pts->is_array()) throw FormatError("a path must be an array of [x, y] points");
  std::vector<Vec2> out;
  for (const auto& p : *pts) {
    if (!p.is_array() || p.size() != 2) throw FormatError("path points must be [x, y] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (out.empty()) throw FormatError("empty path");
  return out;
}

/// A JSON array of paths, or JSON-lines with one path (or example) per line.
std::vector<std::vector<Vec2>> load_paths(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot open: " + p.string());
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  std::vector<std::vector<Vec2>> out;
  try {
    const json doc = json::parse(text);
    if (doc.is_array() && !doc.empty() && doc[0].is_array() && !doc[0].empty() && doc[0][0].is_number()) {
      out.push_back(path_from_json(doc));  // a single bare path
    } else if (doc.is_array()) {
      for (const auto& e : doc) out.push_back(path_from_json(e));
    } else {
      out.push_back(path_from_json(doc));
    }
    return out;
  } catch (const json::parse_error&) {
    // fall through to JSON-lines
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(path_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw FormatError(p.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_terrain_gen(const std::string& family, int count, std::uint64_t seed, const std::string& out_arg, bool pgm) {
  if (count < 1) throw std::invalid_argument("--count must be >= 1");
  std::vector<TerrainFamily> families;
  if (family == "all") {
    families.assign(std::begin(kGeneratedFamilies), std::end(kGeneratedFamilies));
  } else {
    families.push_back(family_from_string(family));
  }
  const fs::path out = resolve_out(out_arg, "terrains");
  fs::create_directories(out);
  json manifest{{"seed", seed}, {"count_per_family", count}, {"maps", json::array()}};
  for (TerrainFamily f : families) {
    const TerrainParams params = TerrainParams::defaults(f);
    for (int i = 0; i < count; ++i) {
      const std::uint64_t s = terrain_seed(seed, f, i);
      const ElevationMap map = generate_terrain(s, params);
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04d", std::string(to_string(f)).c_str(), i);
      save_emap(out / (std::string(name) + ".emap"), map);
      if (pgm) save_pgm(out / (std::string(name) + ".pgm"), map.heights(), map.width_cells(), map.height_cells());
      manifest["maps"].push_back({{"file", std::string(name) + ".emap"},
                                  {"family", std::string(to_string(f))},
                                  {"seed", s},
                                  {"min_height", map.min_height()},
                                  {"max_height", map.max_height()}});
    }
  }
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << manifest["maps"].size() << " terrains to " << out.string() << "\n";
  return 0;
}

int cmd_collect(const std::string& terrains, const std::string& embodiment, int samples, std::uint64_t seed,
                const std::string& out_arg) {
  if (samples < 2) throw std::invalid_argument("--samples must be >= 2");
  const auto maps = load_terrain_dir(terrains);
  const EmbodimentSpec spec = EmbodimentSpec::by_name(embodiment);
  CollectConfig cc;
  cc.n_samples = samples;
  const CollectResult r = collect_dataset(maps, spec, cc, seed);
  const fs::path out = resolve_out(out_arg, embodiment + ".afs");
  ensure_parent(out);
  save_samples(out, r.samples);
  double label_sum = 0.0;
  for (const auto& s : r.samples) label_sum += s.label;
  const json report{{"samples", r.samples.size()},
                    {"label_mean", r.samples.empty() ? 0.0 : label_sum / static_cast<double>(r.samples.size())},
                    {"raw_success", r.raw_success},
                    {"raw_failure", r.raw_failure},
                    {"attempts", r.attempts},
                    {"balanced", r.balanced},
                    {"warning", r.warning}};
  write_text(out.string() + ".report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  if (!r.warning.empty()) std::cerr << "warning: " << r.warning << "\n";
  return 0;
}

int cmd_train(const std::string& data, int epochs, std::uint64_t seed, const std::string& out_arg,
              const std::string& mode) {
  const auto samples = load_samples(data);
  if (samples.empty()) throw FormatError("no samples in " + data);
  FeatureLayout layout;
  layout.crop_cells = samples.front().crop_cells;
  TrainConfig tc;
  tc.epochs = epochs;
  tc.mode = model_mode_from_string(mode);
  TrainReport rep;
  const AffordanceModel model = train(samples, layout, tc, seed, &rep);
  const fs::path out = resolve_out(out_arg, "model.afm");
  ensure_parent(out);
  save_model(out, model);
  const json report{{"initial_loss", rep.initial_loss}, {"final_loss", rep.final_loss}, {"epoch_loss", rep.epoch_loss}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& out) {
  const AffordanceModel model = load_model(model_path);
  const auto samples = load_samples(data);
  if (samples.empty()) throw FormatError("no samples in " + data);
  const json report = to_json(evaluate(model, samples));
  if (!out.empty()) write_text(out, report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct MissionArgs {
  std::string world, embodiment = "legged", model, scenario, goal, start, out;
  bool ablate = false;
  int episodes = 1;
  std::uint64_t seed = 1;
  std::string config;
};

int cmd_mission(const MissionArgs& a) {
  if (a.scenario.empty() == a.goal.empty()) throw std::invalid_argument("give exactly one of --scenario or --goal");
  if (a.episodes < 1) throw std::invalid_argument("--episodes must be >= 1");
  MissionConfig mc = a.config.empty() ? MissionConfig{} : load_run_config(a.config).mission;
  mc.ablate_modulation = a.ablate;
  const EmbodimentSpec spec = EmbodimentSpec::by_name(a.embodiment);
  std::optional<AffordanceModel> model;
  if (!a.ablate) {
    if (a.model.empty()) throw std::invalid_argument("--model is required unless --ablate-modulation is set");
    model = load_model(a.model);
  }
  const fs::path out = resolve_out(a.out, "mission");
  fs::create_directories(out);
  std::vector<EpisodeResult> results;
  BenchmarkRow row;
  if (!a.scenario.empty()) {
    if (!a.world.empty()) throw std::invalid_argument("--world cannot be combined with --scenario");
    row = run_scenario_benchmark(a.scenario, spec, model ? &*model : nullptr, mc, a.episodes, a.seed, &results);
  } else {
    if (a.world.empty()) throw std::invalid_argument("--goal needs --world");
    const ElevationMap world = load_world(a.world);
    const Vec2 goal = parse_xy(a.goal);
    Pose2 start{{world.origin_x() + 1.0, world.origin_y() + 0.5 * world.extent_y()}, 0.0};
    if (!a.start.empty()) start.position = parse_xy(a.start);
    start.heading = std::atan2(goal.y - start.position.y, goal.x - start.position.x);
    row.scenario = "goal";
    row.embodiment = a.embodiment;
    row.modulation = !a.ablate;
    double time_sum = 0.0;
    for (int e = 0; e < a.episodes; ++e) {
      SamplingPlanner planner;
      const std::vector<Vec2> goals{goal};
      EpisodeResult r = run_mission(world, spec, planner, model ? &*model : nullptr, start, goals, mc,
                                    derive_seed(a.seed, static_cast<std::uint64_t>(e)));
      ++row.episodes;
      row.successes += r.success ? 1 : 0;
      time_sum += r.sim_time;
      if (const auto tag = r.first_choice_tag(); !tag.empty()) ++row.first_choice_tags[tag];
      results.push_back(std::move(r));
    }
    row.mean_time = time_sum / a.episodes;
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "episode_%03zu.json", i);
    write_text(out / name, to_json(results[i]).dump(1) + "\n");
  }
  if (!results.empty() && !results.front().replans.empty() && !a.scenario.empty()) {
    const auto& rp = results.front().replans.front();
    std::ofstream ppm(out / "episode_000_overlay.ppm", std::ios::binary);
    write_overlay_ppm(ppm, build_scenario_world(a.scenario), rp.candidates, rp.chosen, results.front().trace);
  }
  const std::vector<BenchmarkRow> rows{row};
  write_text(out / "summary.md", benchmark_markdown(rows));
  write_text(out / "summary.csv", benchmark_csv(rows));
  std::cout << benchmark_markdown(rows);
  return 0;
}

int cmd_metrics(const std::string& pred, const std::string& ref, const std::string& out_arg) {
  const auto p = load_paths(pred);
  const auto r = load_paths(ref);
  if (p.size() != r.size()) {
    throw FormatError("prediction and reference hold " + std::to_string(p.size()) + " and " +
                      std::to_string(r.size()) + " paths");
  }
  if (p.empty()) throw FormatError("no paths to compare");
  std::vector<std::string> names;
  std::vector<double> sums;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto rows = metric_suite(p[i], r[i]);
    if (names.empty()) {
      for (const auto& m : rows) names.push_back(m.metric);
      sums.assign(rows.size(), 0.0);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) sums[k] += rows[k].value;
  }
  std::ostringstream csv;
  csv.precision(17);
  csv << "model,dataset,metric,value,pairs\n";
  const std::string model = fs::path(pred).stem().string(), dataset = fs::path(ref).stem().string();
  for (std::size_t k = 0; k < names.size(); ++k) {
    csv << model << ',' << dataset << ',' << names[k] << ',' << sums[k] / static_cast<double>(p.size()) << ','
        << p.size() << '\n';
  }
  const fs::path out = resolve_out(out_arg, "metrics.csv");
  write_text(out, csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_heatmap(const std::string& model_path, const std::string& world_spec, int heading, int stride,
                const std::string& out_arg) {
  const AffordanceModel model = load_model(model_path);
  const ElevationMap world = load_world(world_spec);
  const AffordanceGrid g = affordance_grid(model, world, heading, stride);
  const fs::path out = resolve_out(out_arg, "heatmap.pgm");
  ensure_parent(out);
  save_pgm(out, g.values, g.width, g.height, Range{0.0, 1.0});
  const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
  double mean = 0.0;
  for (double v : g.values) mean += v;
  mean /= static_cast<double>(g.values.size());
  std::cout << json{{"width", g.width}, {"height", g.height}, {"min", *lo}, {"max", *hi}, {"mean", mean}}.dump()
            << "\n";
  return 0;
}

int cmd_scenarios(const std::string& dump) {
  for (const auto& s : scenario_registry()) {
    std::cout << s.id << "  (" << s.routes.size() << " candidates)  " << s.description << "\n";
    if (!dump.empty()) {
      write_text(fs::path(dump) / (s.id + ".json"), scenario_to_json(s).dump(2) + "\n");
    }
  }
  return 0;
}

int cmd_benchmark(const std::string& config, const std::optional<std::uint64_t>& seed, std::optional<int> episodes,
                  const std::string& out_arg) {
  RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
  if (seed) cfg.master_seed = *seed;
  if (episodes) {
    if (*episodes < 1) throw std::invalid_argument("--episodes must be >= 1");
    cfg.episodes = *episodes;
  }
  const fs::path out = out_arg.empty() ? (config.empty() ? output_root() / "benchmark" : fs::path(cfg.output_dir))
                                       : fs::path(out_arg);
  const PipelineResult res = run_pipeline(cfg, out);
  for (const auto& t : res.models) {
    std::cerr << t.name << ": holdout accuracy " << t.holdout.accuracy << ", AUC " << t.holdout.auc << "\n";
  }
  std::cout << res.markdown;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affordnav: embodiment-aware path re-ranking with learned affordances"};
  app.require_subcommand(1);

  std::string family = "all", out;
  int count = 0;
  std::uint64_t seed = 1;
  bool pgm = false;
  auto* tg = app.add_subcommand("terrain-gen", "Generate procedural elevation maps");
  tg->add_option("--family", family, "simple_stairs|simple_ramp|procedural|smooth_mounds|irregular_stairs|all");
  tg->add_option("--count", count, "Maps per family")->required();
  tg->add_option("--seed", seed, "Master seed");
  tg->add_option("--out", out, "Output directory");
  tg->add_flag("--pgm", pgm, "Also write PGM previews");

  std::string terrains, embodiment = "legged";
  int samples = 10000;
  auto* co = app.add_subcommand("collect", "Roll out an embodiment and write a balanced AFS dataset");
  co->add_option("--terrains", terrains, "Directory of .emap files")->required();
  co->add_option("--embodiment", embodiment, "legged|wheeled");
  co->add_option("--samples", samples, "Balanced dataset size");
  co->add_option("--seed", seed, "Seed");
  co->add_option("--out", out, "Output .afs file");

  std::string data, mode = "classification";
  int epochs = 20;
  auto* tr = app.add_subcommand("train", "Train an affordance model on an AFS dataset");
  tr->add_option("--data", data, "Input .afs file")->required();
  tr->add_option("--epochs", epochs, "Epochs");
  tr->add_option("--seed", seed, "Seed");
  tr->add_option("--mode", mode, "classification|regression");
  tr->add_option("--out", out, "Output .afm file");

  std::string model;
  auto* ev = app.add_subcommand("eval-affordance", "Accuracy, AUC and confusion counts of a model on a dataset");
  ev->add_option("--model", model, "Model .afm file")->required();
  ev->add_option("--data", data, "Dataset .afs file")->required();
  ev->add_option("--out", out, "Optional JSON report path");

  MissionArgs ma;
  auto* mi = app.add_subcommand("mission", "Run seeded navigation episodes");
  mi->add_option("--world", ma.world, "EMAP file or builtin world name (free-goal missions)");
  mi->add_option("--embodiment", ma.embodiment, "legged|wheeled");
  mi->add_option("--model", ma.model, "Affordance model .afm");
  mi->add_option("--scenario", ma.scenario, "Scripted scenario id");
  mi->add_option("--goal", ma.goal, "Goal as x,y metres");
  mi->add_option("--start", ma.start, "Start as x,y metres (free-goal missions)");
  mi->add_flag("--ablate-modulation", ma.ablate, "Pick candidates uniformly without affordance scoring");
  mi->add_option("--episodes", ma.episodes, "Episodes");
  mi->add_option("--seed", ma.seed, "Seed");
  mi->add_option("--config", ma.config, "Run config JSON (mission section is used)");
  mi->add_option("--out", ma.out, "Output directory");

  std::string pred, ref;
  auto* me = app.add_subcommand("metrics", "Trajectory metrics between predicted and reference paths");
  me->add_option("--pred", pred, "Predicted paths (JSON or JSON-lines)")->required();
  me->add_option("--ref", ref, "Reference paths (JSON or JSON-lines)")->required();
  me->add_option("--out", out, "Output CSV");

  std::string world;
  int heading = 0, stride = 1;
  auto* hm = app.add_subcommand("heatmap", "Affordance heatmap of a world for one heading");
  hm->add_option("--model", model, "Model .afm file")->required();
  hm->add_option("--world", world, "EMAP file or builtin world name")->required();
  hm->add_option("--heading", heading, "Heading bin 0..7")->check(CLI::Range(0, 7));
  hm->add_option("--stride", stride, "Cells between samples")->check(CLI::PositiveNumber);
  hm->add_option("--out", out, "Output PGM");

  std::string dump;
  auto* sc = app.add_subcommand("scenarios", "List scripted scenarios");
  sc->add_option("--dump", dump, "Write fixture JSON documents to this directory");

  std::string config;
  std::optional<std::uint64_t> bseed;
  std::optional<int> bepisodes;
  auto* bm = app.add_subcommand("benchmark", "Full pipeline: terrains, datasets, models, scenario tables");
  bm->add_option("--config", config, "Run config JSON");
  bm->add_option("--seed", bseed, "Override the master seed");
  bm->add_option("--episodes", bepisodes, "Override episodes per condition");
  bm->add_option("--out", out, "Output directory");

  auto* cf = app.add_subcommand("config", "Print the default run config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*tg) return cmd_terrain_gen(family, count, seed, out, pgm);
    if (*co) return cmd_collect(terrains, embodiment, samples, seed, out);
    if (*tr) return cmd_train(data, epochs, seed, out, mode);
    if (*ev) return cmd_eval(model, data, out);
    if (*mi) return cmd_mission(ma);
    if (*me) return cmd_metrics(pred, ref, out);
    if (*hm) return cmd_heatmap(model, world, heading, stride, out);
    if (*sc) return cmd_scenarios(dump);
    if (*bm) return cmd_benchmark(config, bseed, bepisodes, out);
    if (*cf) {
      std::cout << to_json(RunConfig{}).dump(2) << "\n";
      return 0;
    }
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
