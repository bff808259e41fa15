#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

#include "roi_nbv/analysis.hpp"
#include "roi_nbv/error.hpp"
#include "roi_nbv/gain.hpp"
#include "roi_nbv/planner.hpp"
#include "roi_nbv/sampling.hpp"
#include "roi_nbv/scenario.hpp"
#include "roi_nbv/sensor_sim.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace py = pybind11;
using namespace roi_nbv;

namespace {

using KeyTuple = std::tuple<std::int32_t, std::int32_t, std::int32_t>;

KeyTuple to_tuple(const VoxelKey& k) { return {k.i, k.j, k.k}; }
VoxelKey to_key(const KeyTuple& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t)}; }

const char* state_name(NodeState s) {
  switch (s) {
    case NodeState::Free:
      return "free";
    case NodeState::Occupied:
      return "occupied";
    default:
      return "unknown";
  }
}

py::object optional_float(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict metrics_dict(const MetricReport& m) {
  py::dict d;
  d["detected_rois"] = m.detected_rois;
  d["covered_roi_volume"] = optional_float(m.covered_roi_volume);
  d["volume_accuracy"] = optional_float(m.volume_accuracy);
  d["center_distance"] = optional_float(m.center_distance);
  return d;
}

py::object nan_to_none(double v) { return std::isnan(v) ? py::none() : py::cast(v); }

void insert_points(RoiMap& map, const Vec3& origin, py::array_t<double, py::array::c_style | py::array::forcecast> points,
                   py::array_t<bool, py::array::c_style | py::array::forcecast> roi) {
  if (points.ndim() != 2 || points.shape(1) != 3) throw InvalidInput("points must have shape (N, 3)");
  if (roi.ndim() != 1 || roi.shape(0) != points.shape(0)) throw InvalidInput("roi must have shape (N,)");
  LabeledCloud cloud;
  cloud.origin = origin;
  auto p = points.unchecked<2>();
  auto r = roi.unchecked<1>();
  cloud.points.reserve(static_cast<std::size_t>(points.shape(0)));
  for (py::ssize_t i = 0; i < points.shape(0); ++i) cloud.points.push_back({Vec3(p(i, 0), p(i, 1), p(i, 2)), r(i)});
  map.insert(cloud);
}

struct Scenario {
  ScenarioConfig config;
  GroundTruthScene scene;
};

Scenario load(const std::string& path) {
  ScenarioConfig cfg = load_scenario(path);
  GroundTruthScene scene = generate_scene(cfg.scene, cfg.scene_seed);
  return {std::move(cfg), std::move(scene)};
}

}  // namespace

PYBIND11_MODULE(_roi_nbv, m) {
  m.doc() = "ROI-aware next-best-view planning in a simulated plant scene";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<RoiMap>(m, "RoiMap")
      .def(py::init([](double resolution) { return RoiMap(resolution); }), py::arg("resolution"))
      .def_property_readonly("resolution", &RoiMap::resolution)
      .def("__len__", &RoiMap::size)
      .def("insert", &insert_points, py::arg("origin"), py::arg("points"), py::arg("roi"),
           "Ray-casting update from an (N, 3) point array observed from `origin`.")
      .def(
          "raycast",
          [](const RoiMap& map, const Vec3& origin, const Vec3& direction, double max_range) {
            const RaycastResult r = map.raycast(origin, direction, max_range);
            std::vector<KeyTuple> keys;
            keys.reserve(r.keys.size());
            for (const auto& k : r.keys) keys.push_back(to_tuple(k));
            py::object hit = r.hit ? py::cast(to_tuple(*r.hit)) : py::none();
            return py::make_tuple(keys, hit);
          },
          py::arg("origin"), py::arg("direction"), py::arg("max_range"))
      .def("key_at", [](const RoiMap& map, const Vec3& p) { return to_tuple(map.key_at(p)); })
      .def("center", [](const RoiMap& map, const KeyTuple& k) { return map.center(to_key(k)); })
      .def("state", [](const RoiMap& map, const KeyTuple& k) { return state_name(map.state_of(to_key(k))); })
      .def("is_roi", [](const RoiMap& map, const KeyTuple& k) { return map.is_roi(to_key(k)); })
      .def("logodds",
           [](const RoiMap& map, const KeyTuple& k) -> py::object {
             const VoxelNode* n = map.find(to_key(k));
             if (!n) return py::none();
             return py::make_tuple(n->occ_logodds, n->roi_logodds);
           })
      .def("set_node",
           [](RoiMap& map, const KeyTuple& k, float occ, float roi) { map.set_node(to_key(k), {occ, roi}); })
      .def("count_known", &RoiMap::count_known)
      .def("count_roi", &RoiMap::count_roi)
      .def("roi_keys",
           [](const RoiMap& map) {
             std::vector<KeyTuple> out;
             for (const auto& k : map.roi_keys()) out.push_back(to_tuple(k));
             return out;
           })
      .def("serialize", [](const RoiMap& map) { return py::bytes(serialize(map)); })
      .def_static("deserialize", [](py::bytes data) { return deserialize(std::string(data)); })
      .def("save", [](const RoiMap& map, const std::string& path) { save_map(map, path); })
      .def_static("load", [](const std::string& path) { return load_map(path); })
      .def("__eq__", [](const RoiMap& a, const RoiMap& b) { return a == b; });

  m.def("proximity_weight", &proximity_weight, py::arg("dist"), py::arg("max_dist"));
  m.def("utility", &utility, py::arg("ig"), py::arg("cost"), py::arg("alpha"));
  m.def(
      "information_gain",
      [](const RoiMap& map, const Vec3& position, const Vec3& look_at, const std::string& util_type, int rows,
         int cols, double eval_range, double max_dist) {
        const ViewPose pose{position, orientation_towards(position, look_at)};
        const RayGrid rays(CameraModel{}, rows, cols);
        if (util_type == "unobserved") return ig_unobserved(map, pose, rays, eval_range);
        if (util_type != "proximity") throw InvalidInput("util_type must be 'unobserved' or 'proximity'");
        EvalParams params;
        params.util_type = UtilityType::Proximity;
        params.eval_range = eval_range;
        params.max_dist = max_dist;
        return ig_proximity(map, pose, rays, params);
      },
      py::arg("map"), py::arg("position"), py::arg("look_at"), py::arg("util_type") = "unobserved",
      py::arg("rows") = 15, py::arg("cols") = 20, py::arg("eval_range") = 1.2, py::arg("max_dist") = 0.1,
      "Mean information gain over the default camera's ray grid.");

  m.def(
      "frontiers",
      [](const RoiMap& map) {
        const Region all = Region::everything();
        std::vector<KeyTuple> roi, expl;
        for (const auto& k : find_roi_frontiers(map, all)) roi.push_back(to_tuple(k));
        for (const auto& k : find_exploration_frontiers(map, all)) expl.push_back(to_tuple(k));
        return py::make_tuple(roi, expl);
      },
      py::arg("map"), "(ROI frontiers, exploration frontiers) without a sampling restriction.");

  py::class_<Scenario>(m, "Scenario")
      .def_static("load", &load, py::arg("path"))
      .def_property_readonly("name", [](const Scenario& s) { return s.config.name; })
      .def_property_readonly("resolution", [](const Scenario& s) { return s.scene.resolution(); })
      .def_property_readonly("voxel_count", [](const Scenario& s) { return s.scene.voxels().size(); })
      .def_property_readonly("fruit_centroids",
                             [](const Scenario& s) {
                               std::vector<Vec3> out;
                               for (const auto& f : s.scene.fruits()) out.push_back(f.centroid);
                               return out;
                             })
      .def("ground_truth_map", [](const Scenario& s) { return scene_to_map(s.scene, s.config.map); })
      .def(
          "render",
          [](const Scenario& s, const Vec3& position, const Vec3& look_at) {
            const ViewPose pose{position, orientation_towards(position, look_at)};
            const RenderedImage img = render(s.scene, s.config.camera, pose);
            py::array_t<double> depth({img.height, img.width});
            auto d = depth.mutable_unchecked<2>();
            for (int r = 0; r < img.height; ++r)
              for (int c = 0; c < img.width; ++c) d(r, c) = img.depth[static_cast<std::size_t>(r * img.width + c)];
            const LabeledCloud cloud = cloud_from_render(img, s.config.camera, pose, s.scene.resolution());
            py::array_t<double> pts({static_cast<py::ssize_t>(cloud.points.size()), py::ssize_t{3}});
            py::array_t<bool> roi(static_cast<py::ssize_t>(cloud.points.size()));
            auto p = pts.mutable_unchecked<2>();
            auto f = roi.mutable_unchecked<1>();
            for (std::size_t i = 0; i < cloud.points.size(); ++i) {
              for (int a = 0; a < 3; ++a) p(static_cast<py::ssize_t>(i), a) = cloud.points[i].position[a];
              f(static_cast<py::ssize_t>(i)) = cloud.points[i].is_roi;
            }
            return py::make_tuple(depth, pts, roi);
          },
          py::arg("position"), py::arg("look_at"),
          "Depth image plus the downsampled labeled cloud: (depth[H, W], points[N, 3], roi[N]).")
      .def("metrics", [](const Scenario& s, const RoiMap& map) { return metrics_dict(snapshot_metrics(map, s.scene)); })
      .def(
          "run_trial",
          [](const Scenario& s, std::uint64_t seed, std::optional<std::string> mode,
             std::optional<std::string> util_type, std::optional<double> budget_s) {
            PlannerConfig cfg = s.config.planner;
            if (mode) {
              if (*mode == "combined") cfg.mode = PlannerMode::Combined;
              else if (*mode == "exploration_only") cfg.mode = PlannerMode::ExplorationOnly;
              else throw InvalidInput("mode must be 'combined' or 'exploration_only'");
            }
            if (util_type) {
              if (*util_type == "unobserved") cfg.eval.util_type = UtilityType::Unobserved;
              else if (*util_type == "proximity") cfg.eval.util_type = UtilityType::Proximity;
              else throw InvalidInput("util_type must be 'unobserved' or 'proximity'");
            }
            if (budget_s) cfg.budget_s = *budget_s;
            cfg.validate();
            const Environment env = make_environment(s.config, s.scene);
            TrialLog log;
            {
              py::gil_scoped_release release;
              log = run_trial(env, cfg, seed);
            }
            py::list rows;
            for (const auto& r : log.rows) {
              py::dict d;
              d["time"] = r.time;
              d["kind"] = to_string(r.kind);
              d["utility"] = nan_to_none(r.utility);
              d["max_roi_utility"] = nan_to_none(r.max_roi_utility);
              d["position"] = r.position;
              d["known_voxels"] = r.known_voxels;
              d["roi_voxels"] = r.roi_voxels;
              d["metrics"] = r.metrics ? py::object(metrics_dict(*r.metrics)) : py::none();
              rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["moves"] = log.moves;
            out["iterations"] = log.iterations;
            out["final_map"] = *log.final_map;
            out["contract_issues"] = check_trial_contract(log, s.config.workspace, cfg);
            return out;
          },
          py::arg("seed") = 0, py::arg("mode") = py::none(), py::arg("util_type") = py::none(),
          py::arg("budget_s") = py::none());

  py::class_<FruitCluster>(m, "FruitCluster")
      .def_property_readonly("size", [](const FruitCluster& c) { return c.voxels.size(); })
      .def_readonly("centroid", &FruitCluster::centroid)
      .def_property_readonly("box_min", [](const FruitCluster& c) { return c.box.min; })
      .def_property_readonly("box_max", [](const FruitCluster& c) { return c.box.max; })
      .def_readonly("volume", &FruitCluster::volume);
  m.def("cluster_rois", &cluster_rois, py::arg("map"));

  m.def(
      "mann_whitney_u",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const MannWhitneyResult r = mann_whitney_u_one_sided(a, b);
        return py::make_tuple(r.u, r.p_value, r.exact);
      },
      py::arg("a"), py::arg("b"), "One-sided test of a > b: (U, p, exact).");
}
