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


// Python bindings. Maps are exchanged as (rows, cols) float64 arrays with row 0
// at the southern edge, paths as lists of (x, y) tuples.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "affordnav/affordance.hpp"
#include "affordnav/embodiment.hpp"
#include "affordnav/errors.hpp"
#include "affordnav/metrics.hpp"
#include "affordnav/mission.hpp"
#include "affordnav/pathspace.hpp"
#include "affordnav/pipeline.hpp"
#include "affordnav/planner.hpp"
#include "affordnav/terrain.hpp"

namespace py = pybind11;
using namespace affordnav;

namespace {

using XY = std::pair<double, double>;

std::vector<Vec2> to_vec2(const std::vector<XY>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& [x, y] : pts) out.push_back({x, y});
  return out;
}

py::array_t<double> heights_array(const ElevationMap& m) {
  py::array_t<double> a({m.height_cells(), m.width_cells()});
  std::copy(m.heights().begin(), m.heights().end(), a.mutable_data());
  return a;
}

ElevationMap map_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a, double resolution) {
  if (a.ndim() != 2) throw std::invalid_argument("height array must be 2-D");
  std::vector<double> h(a.data(), a.data() + a.size());
  return ElevationMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), resolution, std::move(h));
}

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_affordnav, m) {
  m.doc() = "Embodiment-aware affordance scoring for navigation paths";

  static py::exception<FormatError> format_error(m, "FormatError", PyExc_ValueError);
  static py::exception<LayoutError> layout_error(m, "LayoutError", format_error.ptr());
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const LayoutError& e) {
      py::set_error(layout_error, e.what());
    } catch (const FormatError& e) {
      py::set_error(format_error, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    }
  });

  // terrain
  py::class_<ElevationMap>(m, "ElevationMap")
      .def(py::init(&map_from_array), py::arg("heights"), py::arg("resolution") = 0.1)
      .def_property_readonly("heights", &heights_array)
      .def_property_readonly("resolution", &ElevationMap::resolution)
      .def_property_readonly("shape", [](const ElevationMap& e) { return std::pair(e.height_cells(), e.width_cells()); })
      .def_property_readonly("family", [](const ElevationMap& e) { return std::string(to_string(e.family())); })
      .def_property_readonly("seed", &ElevationMap::seed)
      .def("height_at", &ElevationMap::height_at, py::arg("x"), py::arg("y"))
      .def("save", [](const ElevationMap& e, const std::string& path) { save_emap(path, e); })
      .def_static("load", [](const std::string& path) { return load_emap(path); })
      .def("__eq__", [](const ElevationMap& a, const ElevationMap& b) { return a == b; });

  m.def("terrain_families", [] {
    std::vector<std::string> out;
    for (TerrainFamily f : kGeneratedFamilies) out.emplace_back(to_string(f));
    return out;
  });
  m.def(
      "generate_terrain",
      [](const std::string& family, std::uint64_t seed) {
        return generate_terrain(seed, TerrainParams::defaults(family_from_string(family)));
      },
      py::arg("family"), py::arg("seed"));
  m.def("scenario_ids", &scenario_ids);
  m.def("scenario_world", [](const std::string& id) { return build_scenario_world(id); }, py::arg("id"));
  m.def("heatmap_world", &build_heatmap_world);

  // embodiment
  m.def(
      "wall_terminated",
      [](XY v_r, XY v_c, double tau, double t, double grace) {
        return wall_terminated({v_r.first, v_r.second}, {v_c.first, v_c.second}, tau, t, grace);
      },
      py::arg("v_realized"), py::arg("v_commanded"), py::arg("tau") = 0.3, py::arg("t") = 0.0,
      py::arg("grace") = 0.5);
  m.def(
      "fall_terminated",
      [](double v_z, double roll, double pitch) {
        AgentState s;
        s.v_z = v_z;
        s.roll = roll;
        s.pitch = pitch;
        return fall_terminated(s);
      },
      py::arg("v_z"), py::arg("roll") = 0.0, py::arg("pitch") = 0.0);
  m.def(
      "rollout",
      [](const ElevationMap& map, const std::string& embodiment, double x, double y, double direction) {
        const EmbodimentSpec spec = EmbodimentSpec::by_name(embodiment);
        const auto out = rollout(map, spec, make_agent_state(map, spec, x, y, direction), direction, RolloutConfig{});
        py::dict d;
        d["success"] = out.success;
        d["termination"] = std::string(to_string(out.termination));
        d["return_value"] = out.return_value;
        d["steps"] = out.trace.size();
        d["end"] = XY{out.trace.back().x, out.trace.back().y};
        return d;
      },
      py::arg("map"), py::arg("embodiment"), py::arg("x"), py::arg("y"), py::arg("direction"));

  // affordance
  py::class_<AffordanceModel>(m, "AffordanceModel")
      .def_static("load", [](const std::string& path) { return load_model(path); })
      .def("save", [](const AffordanceModel& a, const std::string& path) { save_model(path, a); })
      .def(
          "score",
          [](const AffordanceModel& a, const ElevationMap& map, double x, double y, int heading_bin) {
            return a.query(observe(map, {x, y}, heading_bin, a.layout()));
          },
          py::arg("map"), py::arg("x"), py::arg("y"), py::arg("heading_bin"))
      .def(
          "heatmap",
          [](const AffordanceModel& a, const ElevationMap& map, int heading_bin, int stride) {
            const AffordanceGrid g = affordance_grid(a, map, heading_bin, stride);
            py::array_t<double> out({g.height, g.width});
            std::copy(g.values.begin(), g.values.end(), out.mutable_data());
            return out;
          },
          py::arg("map"), py::arg("heading_bin") = 0, py::arg("stride") = 1)
      .def_property_readonly("metadata", [](const AffordanceModel& a) { return a.metadata().dump(); });

  m.def(
      "train_affordance",
      [](const std::vector<ElevationMap>& terrains, const std::string& embodiment, int samples, int epochs,
         const std::string& mode, std::uint64_t seed) {
        CollectConfig cc;
        cc.n_samples = samples;
        const auto data = collect_dataset(terrains, EmbodimentSpec::by_name(embodiment), cc, derive_seed(seed, "collect"));
        const auto [train_set, hold] = split_holdout(data.samples, 0.2);
        TrainConfig tc;
        tc.epochs = epochs;
        tc.mode = model_mode_from_string(mode);
        AffordanceModel model = train(train_set, cc.layout, tc, derive_seed(seed, "train"));
        const EvalReport r = evaluate(model, hold);
        py::dict report;
        report["samples"] = data.samples.size();
        report["balanced"] = data.balanced;
        report["accuracy"] = r.accuracy;
        report["auc"] = r.auc;
        return std::pair(std::move(model), report);
      },
      py::arg("terrains"), py::arg("embodiment"), py::arg("samples") = 2000, py::arg("epochs") = 10,
      py::arg("mode") = "classification", py::arg("seed") = 1);
  m.def(
      "path_affordance",
      [](const AffordanceModel& a, const ElevationMap& map, const std::vector<XY>& path, double query_spacing) {
        CandidatePath p;
        p.world_points = to_vec2(path);
        const CandidatePath s = score_path(a, map, std::move(p), query_spacing);
        return std::pair(*s.cumulative_affordance, *s.per_point_affordance);
      },
      py::arg("model"), py::arg("map"), py::arg("path"), py::arg("query_spacing") = 1.0);

  // pathspace
  m.def("encode_loc", &encode_loc, py::arg("value"));
  m.def("decode_loc", &decode_loc, py::arg("index"));
  m.def("format_goal_prompt", [](double u, double v) { return format_goal_prompt({u, v}); }, py::arg("u"),
        py::arg("v"));
  m.def("parse_goal_prompt", &parse_goal_prompt, py::arg("prompt"));
  m.def(
      "format_path_string",
      [](const std::vector<XY>& pts) {
        std::vector<Pixel> px;
        for (const auto& [u, v] : pts) px.push_back({u, v});
        return format_path_string(px);
      },
      py::arg("points"));
  m.def(
      "parse_path_string",
      [](const std::string& text) {
        std::vector<XY> out;
        for (const Pixel& p : parse_path_string(text)) out.emplace_back(p.u, p.v);
        return out;
      },
      py::arg("text"));
  m.def(
      "project_to_pixel",
      [](XY robot, double heading, std::tuple<double, double, double> point) -> std::optional<XY> {
        const auto cam = CameraModel::robot_mounted({robot.first, robot.second}, heading);
        const auto px = project_to_pixel(cam, {std::get<0>(point), std::get<1>(point), std::get<2>(point)});
        if (!px) return std::nullopt;
        return XY{px->u, px->v};
      },
      py::arg("robot"), py::arg("heading"), py::arg("point"));
  m.def(
      "backproject_to_ground",
      [](XY robot, double heading, XY pixel) -> std::optional<XY> {
        const auto cam = CameraModel::robot_mounted({robot.first, robot.second}, heading);
        const auto g = backproject_to_ground(cam, {pixel.first, pixel.second});
        if (!g) return std::nullopt;
        return XY{g->x, g->y};
      },
      py::arg("robot"), py::arg("heading"), py::arg("pixel"));
  m.def("curvature", [](const std::vector<XY>& p) { return curvature(to_vec2(p)); }, py::arg("path"));

  // metrics
  m.def("frechet", [](const std::vector<XY>& a, const std::vector<XY>& b) { return frechet(to_vec2(a), to_vec2(b)); });
  m.def("dtw_normalized",
        [](const std::vector<XY>& a, const std::vector<XY>& b) { return dtw_normalized(to_vec2(a), to_vec2(b)); });
  m.def("metric_suite", [](const std::vector<XY>& pred, const std::vector<XY>& ref) {
    std::map<std::string, double> out;
    for (const auto& r : metric_suite(to_vec2(pred), to_vec2(ref))) out[r.metric] = r.value;
    return out;
  });

  // missions and the full pipeline
  m.def(
      "run_scenario",
      [](const std::string& scenario, const std::string& embodiment, const AffordanceModel* model, int episodes,
         std::uint64_t seed) {
        MissionConfig mc;
        mc.ablate_modulation = model == nullptr;
        mc.selection.seed = seed;
        const BenchmarkRow row =
            run_scenario_benchmark(scenario, EmbodimentSpec::by_name(embodiment), model, mc, episodes, seed);
        py::dict d;
        d["episodes"] = row.episodes;
        d["successes"] = row.successes;
        d["success_rate"] = row.success_rate();
        d["first_choice_tags"] = row.first_choice_tags;
        d["mean_time"] = row.mean_time;
        return d;
      },
      py::arg("scenario"), py::arg("embodiment"), py::arg("model") = nullptr, py::arg("episodes") = 5,
      py::arg("seed") = 1);
  m.def("default_config", [] { return to_json(RunConfig{}).dump(2); });
  m.def(
      "validate_config", [](const std::string& text) { return to_json(parse_run_config(parse_json(text))).dump(2); },
      py::arg("config_json"));
  m.def(
      "run_pipeline",
      [](const std::string& config_json, const std::string& out_dir) {
        const RunConfig cfg = parse_run_config(parse_json(config_json));
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(cfg, out_dir);
        }
        py::dict d;
        d["markdown"] = r.markdown;
        d["csv"] = r.csv;
        py::dict acc;
        for (const auto& t : r.models) acc[py::str(t.name)] = t.holdout.accuracy;
        d["holdout_accuracy"] = acc;
        return d;
      },
      py::arg("config_json") = "{}", py::arg("out_dir") = "");
}
