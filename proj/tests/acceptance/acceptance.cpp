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


// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero unless the failing set matches --expect-fail exactly.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "affordnav/embodiment.hpp"
#include "affordnav/pipeline.hpp"
#include "affordnav/planner.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace affordnav;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const BenchmarkRow& find_row(const PipelineResult& r, const std::string& scenario, const std::string& emb,
                             bool modulation) {
  for (const auto& row : r.rows) {
    if (row.scenario == scenario && row.embodiment == emb && row.modulation == modulation) return row;
  }
  throw std::runtime_error("benchmark row missing: " + scenario + "/" + emb);
}

const TrainedEmbodiment& find_model(const PipelineResult& r, const std::string& name) {
  for (const auto& t : r.models) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("model missing: " + name);
}

// Re-runs one benchmark row exactly as the pipeline schedules it.
BenchmarkRow rerun(const RunConfig& cfg, const PipelineResult& r, const std::string& scenario, const std::string& emb,
                   bool modulation, std::vector<EpisodeResult>* episodes) {
  const std::uint64_t seed = cfg.stream("mission/" + scenario + "/" + emb);
  MissionConfig mc = cfg.mission;
  mc.ablate_modulation = !modulation;
  mc.selection.seed = seed;
  BenchmarkRow row = run_scenario_benchmark(scenario, cfg.embodiment(emb),
                                            modulation ? &find_model(r, emb).model : nullptr, mc, cfg.episodes, seed,
                                            episodes);
  row.embodiment = emb;
  return row;
}

Verdict cross_embodiment(const RunConfig& cfg, const PipelineResult& r) {
  Stopwatch sw;
  const BenchmarkRow wm = rerun(cfg, r, "stairs_vs_ramp", "wheeled", true, nullptr);
  const BenchmarkRow wa = rerun(cfg, r, "stairs_vs_ramp", "wheeled", false, nullptr);
  const BenchmarkRow lm = rerun(cfg, r, "stairs_vs_ramp", "legged", true, nullptr);
  const BenchmarkRow la = rerun(cfg, r, "stairs_vs_ramp", "legged", false, nullptr);
  const double secs = sw.seconds();
  const bool same = wm.successes == find_row(r, "stairs_vs_ramp", "wheeled", true).successes &&
                    wa.successes == find_row(r, "stairs_vs_ramp", "wheeled", false).successes;
  const double ramp = wm.tag_rate("via_ramp");
  std::vector<std::string> misses;
  if (wm.success_rate() < 0.8) misses.push_back("wheeled modulated < 80%");
  if (wa.success_rate() > 0.6) misses.push_back("wheeled ablated > 60%");
  if (wa.success_rate() < 0.5) misses.push_back("wheeled ablated outside 60% +/- 10 pp");
  if (ramp < 0.8) misses.push_back("ramp choice < 80%");
  if (lm.success_rate() < 0.9 || la.success_rate() < 0.9) misses.push_back("legged < 90%");
  if (wm.success_rate() < wa.success_rate() || lm.success_rate() < la.success_rate()) {
    misses.push_back("ablated beats modulated");
  }
  if (wm.episodes != cfg.episodes || !same) misses.push_back("rerun differs from pipeline");
  if (secs > 60.0) misses.push_back("runtime > 60 s");
  std::ostringstream os;
  os << "wheeled " << fmt("%.0f%%", 100 * wm.success_rate()) << " vs " << fmt("%.0f%%", 100 * wa.success_rate())
     << " (ramp " << fmt("%.0f%%", 100 * ramp) << "), legged " << fmt("%.0f%%", 100 * lm.success_rate()) << " vs "
     << fmt("%.0f%%", 100 * la.success_rate()) << ", " << fmt("%.1f s", secs);
  for (const auto& m : misses) os << "; " << m;
  return {misses.empty(), os.str()};
}

// True when the straight segments of `path` pass over raised cells. Tags
// only say which scripted route a candidate came from; once the robot is past
// the wall a "through_wall" route no longer touches it.
bool crosses_wall(const ElevationMap& world, const CandidatePath& path) {
  for (std::size_t i = 1; i < path.world_points.size(); ++i) {
    const Vec2 a = path.world_points[i - 1], b = path.world_points[i];
    const int n = 1 + static_cast<int>(distance(a, b) / 0.02);
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      const double x = a.x + t * (b.x - a.x), y = a.y + t * (b.y - a.y);
      if (world.contains(x, y) && world.cell_height_at(x, y) > 0.5) return true;
    }
  }
  return false;
}

Verdict obstacle_rejection(const RunConfig& cfg, const PipelineResult& r) {
  Stopwatch sw;
  std::vector<EpisodeResult> episodes;
  const BenchmarkRow mod = rerun(cfg, r, "lab_obstacle", "legged", true, &episodes);
  const BenchmarkRow abl = rerun(cfg, r, "lab_obstacle", "legged", false, nullptr);
  const double secs = sw.seconds();
  const ElevationMap world = build_scenario_world("lab_obstacle");
  int through = 0, majority_plans = 0, plans = 0;
  double worst = 0.0;
  for (const auto& ep : episodes) {
    for (const auto& rec : ep.replans) {
      int n_through = 0;
      for (const auto& c : rec.candidates) {
        if (!crosses_wall(world, c)) continue;
        ++n_through;
        ++through;
        worst = std::max(worst, c.cumulative_affordance.value_or(1.0));
      }
      ++plans;
      if (2 * n_through > static_cast<int>(rec.candidates.size())) ++majority_plans;
    }
  }
  std::vector<std::string> misses;
  if (mod.successes == 0 || mod.successes < 2 * abl.successes) misses.push_back("modulated < 2x ablated");
  if (through == 0) misses.push_back("no through-wall candidates scored");
  if (worst >= cfg.mission.selection.reject_threshold) misses.push_back("through-wall score above threshold");
  if (majority_plans == 0) misses.push_back("through-wall candidates never the majority");
  if (secs > 60.0) misses.push_back("runtime > 60 s");
  std::ostringstream os;
  os << "modulated " << mod.successes << "/" << mod.episodes << ", ablated " << abl.successes << "/" << abl.episodes
     << ", " << through << " through-wall candidates, max score " << fmt("%.3f", worst) << ", " << majority_plans
     << "/" << plans << " plans wall-majority, " << fmt("%.1f s", secs);
  for (const auto& m : misses) os << "; " << m;
  return {misses.empty(), os.str()};
}

Verdict heatmaps(const PipelineResult& r) {
  Stopwatch sw;
  const ElevationMap world = build_heatmap_world();
  // Staircase spans columns 30..69; the wall sits on the plateau at 130..133, rows 20..79.
  auto region_mean = [](const AffordanceGrid& g, int c0, int c1, int r0, int r1) {
    double sum = 0.0;
    int n = 0;
    for (int j = r0; j < r1; ++j) {
      for (int i = c0; i < c1; ++i) {
        sum += g.at(i, j);
        ++n;
      }
    }
    return sum / n;
  };
  const AffordanceGrid legged = affordance_grid(find_model(r, "legged").model, world, 0, 1);
  const AffordanceGrid wheeled = affordance_grid(find_model(r, "wheeled").model, world, 0, 1);
  const double secs = sw.seconds();
  const int rows = world.height_cells();
  const double gap = region_mean(legged, 30, 70, 0, rows) - region_mean(wheeled, 30, 70, 0, rows);
  const double wall_l = region_mean(legged, 130, 134, 20, 80);
  const double wall_w = region_mean(wheeled, 130, 134, 20, 80);
  const bool pass = gap > 0.3 && wall_l < 0.2 && wall_w < 0.2 && secs <= 30.0;
  return {pass, "stair gap " + fmt("%.3f", gap) + ", wall legged " + fmt("%.3f", wall_l) + " wheeled " +
                    fmt("%.3f", wall_w) + ", " + fmt("%.1f s", secs)};
}

Verdict classifier_quality(const RunConfig& cfg, const PipelineResult& r, double pipeline_secs) {
  std::ostringstream os;
  bool pass = pipeline_secs <= 300.0;
  const std::size_t terrains = cfg.families.size() * static_cast<std::size_t>(cfg.terrains_per_family);
  pass = pass && terrains >= 100;
  for (const auto& t : r.models) {
    const bool full = t.collected.balanced && t.collected.samples.size() == 10000u;
    pass = pass && full && t.holdout.accuracy >= 0.85;
    os << t.name << " " << fmt("%.4f", t.holdout.accuracy) << " on " << t.holdout.n << " held out"
       << (full ? "" : " (dataset short)") << ", ";
  }
  os << terrains << " terrains, collect+train+bench " << fmt("%.1f s", pipeline_secs);
  return {pass, os.str()};
}

Verdict mode_comparison(const RunConfig& cfg) {
  // Wheeled on the simple-stairs family: the only family/embodiment pair
  // where both rollout outcomes are common and the return carries signal.
  std::vector<ElevationMap> terrains;
  for (int i = 0; i < 100; ++i) {
    const TerrainParams p = TerrainParams::defaults(TerrainFamily::simple_stairs);
    terrains.push_back(generate_terrain(terrain_seed(cfg.master_seed, TerrainFamily::simple_stairs, i), p));
  }
  CollectConfig cc = cfg.collect;
  cc.n_samples = 10000;
  const auto data = collect_dataset(terrains, cfg.embodiment("wheeled"), cc, cfg.stream("mode_compare/collect"));
  const auto [train_set, hold] = split_holdout(data.samples, cfg.holdout_fraction);
  TrainConfig tc = cfg.train;
  tc.mode = ModelMode::classification;
  const auto cls = train(train_set, cc.layout, tc, cfg.stream("mode_compare/train"));
  tc.mode = ModelMode::regression;
  const auto reg = train(train_set, cc.layout, tc, cfg.stream("mode_compare/train"));
  const double a_cls = evaluate(cls, hold).auc, a_reg = evaluate(reg, hold).auc;
  return {!hold.empty() && a_cls >= a_reg,
          "classification AUC " + fmt("%.4f", a_cls) + " vs regression " + fmt("%.4f", a_reg) + " on " +
              std::to_string(hold.size()) + " held out"};
}

Verdict from(const props::Outcome& o, const std::string& what) {
  std::string d = what + ": " + std::to_string(o.checked) + " checked, " + std::to_string(o.failures) + " failed";
  if (o.worst > 0.0) d += ", worst " + fmt("%.3g", o.worst);
  if (!o.first_failure.empty()) d += " (" + o.first_failure + ")";
  return {o.ok(), d};
}

Verdict oracle_equivalence() { return from(props::metric_oracle_sweep(100, 6), "Frechet/DTW pairs"); }

Verdict geometry_roundtrips() {
  const Verdict a = from(props::projection_roundtrip_sweep(1000, 7), "projection");
  const Verdict b = from(props::codec_sweep(10000, 7), "codec");
  const Verdict c = from(props::prompt_fuzz(10000, 7), "prompts");
  return {a.pass && b.pass && c.pass, a.detail + "; " + b.detail + "; " + c.detail};
}

Verdict termination_rules() {
  std::vector<std::string> misses;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) misses.push_back(what);
  };
  expect(wall_terminated({0, 0}, {1, 0}, 0.3, 1.0, 0.5), "stationary agent");
  expect(!wall_terminated({1, 0}, {1, 0}, 0.3, 1.0, 0.5), "moving agent");
  expect(!wall_terminated({0, 0}, {1, 0}, 0.3, 0.2, 0.5), "grace period");

  const double q = std::numbers::pi / 4.0;
  AgentState s;
  s.v_z = -1.0;
  expect(!fall_terminated(s), "v_z = -1 is not a fall");
  s.v_z = std::nextafter(-1.0, -2.0);
  expect(fall_terminated(s), "v_z just below -1 is a fall");
  for (double sign : {1.0, -1.0}) {
    s = {};
    s.roll = sign * q;
    expect(!fall_terminated(s), "roll of 45 deg is not a fall");
    s.roll = sign * std::nextafter(q, 1.0);
    expect(fall_terminated(s), "roll past 45 deg is a fall");
    s = {};
    s.pitch = sign * q;
    expect(!fall_terminated(s), "pitch of 45 deg is not a fall");
    s.pitch = sign * std::nextafter(q, 1.0);
    expect(fall_terminated(s), "pitch past 45 deg is a fall");
  }

  ElevationMap wall(100, 100, 0.1);
  for (int r = 0; r < 100; ++r)
    for (int c = 50; c < 100; ++c) wall.at(c, r) = 1.0;
  const RolloutConfig rc;
  int blocked = 0;
  for (const auto& spec : {EmbodimentSpec::legged(), EmbodimentSpec::wheeled()}) {
    for (double offset : {0.01, 0.025, 0.049}) {
      for (double heading : {-0.3, 0.0, 0.3}) {
        const AgentState s0 = make_agent_state(wall, spec, 5.0 - offset, 5.0, heading);
        const auto out = rollout(wall, spec, s0, heading, rc);
        ++blocked;
        expect(out.termination == Termination::wall, "blocked agent not wall-terminated");
        expect(out.trace.back().t - s0.t <= rc.grace + 2.0 * rc.dt + 1e-9, "wall termination too late");
      }
    }
  }
  std::string d = "3 rule examples, 10 fall boundaries, " + std::to_string(blocked) + " blocked rollouts";
  for (const auto& m : misses) d += "; " + m;
  return {misses.empty(), d};
}

Verdict terrain_properties() {
  Stopwatch sw;
  int checked = 0;
  std::string first;
  for (TerrainFamily f : kGeneratedFamilies) {
    const TerrainParams p = TerrainParams::defaults(f);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const ElevationMap m = generate_terrain(seed, p);
      std::string err;
      if (oracle::emap_bytes(m) != oracle::emap_bytes(generate_terrain(seed, p))) err = "not deterministic";
      switch (f) {
        case TerrainFamily::simple_stairs: err += oracle::check_stair_rises(m, 0.05, 0.15); break;
        case TerrainFamily::simple_ramp: err += oracle::check_ramp_gradient(m, 0.01, 0.3); break;
        case TerrainFamily::procedural: err += oracle::check_tile_adjacency(generate_procedural_terrain(seed, p)); break;
        case TerrainFamily::smooth_mounds: err += oracle::check_height_band(m, 1.0, 3.0); break;
        case TerrainFamily::irregular_stairs:
          err += oracle::check_terraced(m, p.terrace_step);
          err += oracle::check_height_band(m, 1.0, 3.0);
          break;
        case TerrainFamily::custom: break;
      }
      ++checked;
      if (!err.empty() && first.empty()) first = std::string(to_string(f)) + " seed " + std::to_string(seed) + ": " + err;
    }
  }
  const double secs = sw.seconds();
  return {first.empty() && secs <= 120.0,
          std::to_string(checked) + " terrains, " + fmt("%.1f s", secs) + (first.empty() ? "" : "; " + first)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) != "--expect-fail") {
      std::cerr << "usage: affordnav_acceptance [--expect-fail N]...\n";
      return 2;
    }
    expected_failures.insert(std::stoi(argv[i + 1]));
  }

  const RunConfig cfg;  // the shipped benchmark configuration
  Stopwatch sw;
  const PipelineResult first = run_pipeline(cfg);
  const double pipeline_secs = sw.seconds();

  std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, [&] { return cross_embodiment(cfg, first); }},
      {2, [&] { return obstacle_rejection(cfg, first); }},
      {3, [&] { return heatmaps(first); }},
      {4, [&] { return classifier_quality(cfg, first, pipeline_secs); }},
      {5, [&] { return mode_comparison(cfg); }},
      {6, oracle_equivalence},
      {7, geometry_roundtrips},
      {8, termination_rules},
      {9, terrain_properties},
      {10,
       [&] {
         const PipelineResult second = run_pipeline(cfg);
         const bool same = second.markdown == first.markdown && second.csv == first.csv;
         return Verdict{same, same ? "benchmark tables identical across two runs" : "benchmark tables differ"};
       }},
  };

  std::set<int> failed;
  for (auto& [id, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) failed.insert(id);
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
  }
  std::cout << "\n" << first.markdown;
  std::cout << "summary: " << (criteria.size() - failed.size()) << "/" << criteria.size() << " criteria pass";
  if (!expected_failures.empty()) {
    std::cout << " (expected failures:";
    for (int id : expected_failures) std::cout << ' ' << id;
    std::cout << ")";
  }
  std::cout << std::endl;
  return failed == expected_failures ? 0 : 1;
}
