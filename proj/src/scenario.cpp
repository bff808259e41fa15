#include "roi_nbv/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "roi_nbv/error.hpp"

namespace roi_nbv {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

// Mapping accessor that remembers which keys were read so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(YAML::Node node, std::string name, int parent_line) : node_(std::move(node)), name_(std::move(name)) {
    if (!node_ || node_.IsNull()) {
      node_ = YAML::Node(YAML::NodeType::Map);
      line_ = parent_line;
    } else if (!node_.IsMap()) {
      throw ConfigError("'" + name_ + "' must be a mapping", line_of(node_));
    } else {
      line_ = line_of(node_);
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  YAML::Node required(const std::string& key) {
    YAML::Node n = raw(key);
    if (!n) throw ConfigError("section '" + name_ + "' is missing required key '" + key + "'", line_);
    return n;
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    YAML::Node n = raw(key);
    return n ? convert<T>(n, key) : fallback;
  }

  template <typename T>
  T need(const std::string& key) {
    return convert<T>(required(key), key);
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    YAML::Node n = raw(key);
    return n ? to_vec3(n, key) : fallback;
  }

  Vec3 need_vec3(const std::string& key) { return to_vec3(required(key), key); }

  Rgb rgb(const std::string& key, const Rgb& fallback) {
    YAML::Node n = raw(key);
    if (!n) return fallback;
    const Vec3 v = to_vec3(n, key);
    if ((v.array() < 0.0).any() || (v.array() > 1.0).any()) {
      throw ConfigError("'" + name_ + "." + key + "' components must lie in [0, 1]", line_of(n));
    }
    return {v.x(), v.y(), v.z()};
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!seen_.contains(key)) {
        throw ConfigError("unknown key '" + key + "' in section '" + name_ + "'", line_of(it->first));
      }
    }
  }

  int line() const { return line_; }
  const std::string& name() const { return name_; }

 private:
  template <typename T>
  T convert(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + name_ + "." + key + "' has the wrong type", line_of(n));
    }
  }

  Vec3 to_vec3(const YAML::Node& n, const std::string& key) const {
    if (!n.IsSequence() || n.size() != 3) {
      throw ConfigError("'" + name_ + "." + key + "' must be a list of 3 numbers", line_of(n));
    }
    return {convert<double>(n[0], key), convert<double>(n[1], key), convert<double>(n[2], key)};
  }

  YAML::Node node_;
  std::string name_;
  int line_ = 0;
  std::set<std::string> seen_;
};

constexpr double kDeg = std::numbers::pi / 180.0;

Region parse_region_list(const YAML::Node& list, const std::string& name) {
  if (!list.IsSequence()) throw ConfigError("'" + name + "' must be a list of box/shell entries", line_of(list));
  Region region;
  for (const auto& entry : list) {
    Section e(entry, name + "[]", line_of(entry));
    if (e.has("box")) {
      Section b(e.raw("box"), name + ".box", e.line());
      Aabb box{b.need_vec3("min_m"), b.need_vec3("max_m")};
      if ((box.max.array() < box.min.array()).any()) throw ConfigError("box max_m below min_m", b.line());
      b.finish();
      region.add_box(box);
    } else if (e.has("shell")) {
      Section s(e.raw("shell"), name + ".shell", e.line());
      SphericalShell shell{s.need_vec3("center_m"), s.get<double>("r_min_m", 0.0), s.need<double>("r_max_m")};
      if (!(shell.r_min >= 0.0 && shell.r_min <= shell.r_max)) throw ConfigError("need 0 <= r_min_m <= r_max_m", s.line());
      s.finish();
      region.add_shell(shell);
    } else {
      throw ConfigError("region entry needs a 'box' or 'shell'", e.line());
    }
    e.finish();
  }
  if (region.boxes().empty() && region.shells().empty()) throw ConfigError("'" + name + "' is empty", line_of(list));
  return region;
}

PlannerMode parse_mode(const std::string& s, int line) {
  if (s == "combined") return PlannerMode::Combined;
  if (s == "exploration_only") return PlannerMode::ExplorationOnly;
  throw ConfigError("planner.mode must be 'combined' or 'exploration_only'", line);
}

UtilityType parse_util(const std::string& s, int line) {
  if (s == "unobserved") return UtilityType::Unobserved;
  if (s == "proximity") return UtilityType::Proximity;
  throw ConfigError("planner.util_type must be 'unobserved' or 'proximity'", line);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  ScenarioConfig cfg;
  Section top(root, "<root>", 1);
  cfg.name = top.get<std::string>("name", cfg.name);

  {
    Section s(top.required("scene"), "scene", top.line());
    SceneConfig& sc = cfg.scene;
    cfg.scene_seed = s.get<std::uint64_t>("seed", 0);
    sc.resolution = s.need<double>("resolution_m");
    sc.room = {s.need_vec3("room_min_m"), s.need_vec3("room_max_m")};
    sc.floor = s.get<bool>("floor", sc.floor);
    sc.fruit_semi_axes_min = s.vec3("fruit_semi_axes_min_m", sc.fruit_semi_axes_min);
    sc.fruit_semi_axes_max = s.vec3("fruit_semi_axes_max_m", sc.fruit_semi_axes_max);
    sc.leaf_color = s.rgb("leaf_rgb", sc.leaf_color);
    sc.stem_color = s.rgb("stem_rgb", sc.stem_color);
    sc.fruit_color = s.rgb("fruit_rgb", sc.fruit_color);
    sc.floor_color = s.rgb("floor_rgb", sc.floor_color);
    sc.color_jitter = s.get<double>("color_jitter", sc.color_jitter);
    const YAML::Node plants = s.required("plants");
    if (!plants.IsSequence()) throw ConfigError("scene.plants must be a list", line_of(plants));
    std::uint64_t stream = 0;
    for (const auto& p : plants) {
      Section ps(p, "scene.plants[]", line_of(p));
      PlantSpec spec;
      spec.base = ps.need_vec3("base_m");
      spec.height = ps.need<double>("height_m");
      spec.leaf_count = ps.get<int>("leaf_count", spec.leaf_count);
      spec.fruit_count = ps.get<int>("fruit_count", spec.fruit_count);
      spec.rng_stream = ps.get<std::uint64_t>("rng_stream", stream);
      ps.finish();
      sc.plants.push_back(spec);
      ++stream;
    }
    s.finish();
    try {
      sc.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), s.line());
    }
  }

  {
    Section s(top.raw("camera"), "camera", top.line());
    CameraModel& c = cfg.camera;
    c.width = s.get<int>("width_px", c.width);
    c.height = s.get<int>("height_px", c.height);
    c.fov_horizontal = s.get<double>("fov_horizontal_deg", c.fov_horizontal / kDeg) * kDeg;
    c.fov_vertical = s.get<double>("fov_vertical_deg", c.fov_vertical / kDeg) * kDeg;
    c.min_range = s.get<double>("min_range_m", c.min_range);
    c.max_range = s.get<double>("max_range_m", c.max_range);
    s.finish();
    try {
      c.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), s.line());
    }
  }

  cfg.workspace = parse_region_list(top.required("workspace"), "workspace");
  {
    Section s(top.raw("sampling"), "sampling", top.line());
    const double inflate = s.get<double>("inflate_m", 0.0);
    Region base = s.has("regions") ? parse_region_list(s.raw("regions"), "sampling.regions") : cfg.workspace;
    cfg.sampling = inflate != 0.0 ? base.inflated(inflate) : base;
    s.finish();
  }

  {
    Section s(top.raw("map"), "map", top.line());
    MapParams& m = cfg.map;
    m.hit = s.get<float>("hit_logodds", m.hit);
    m.miss = s.get<float>("miss_logodds", m.miss);
    m.roi_hit = s.get<float>("roi_hit_logodds", m.roi_hit);
    m.roi_miss = s.get<float>("roi_miss_logodds", m.roi_miss);
    m.clamp_min = s.get<float>("clamp_min_logodds", m.clamp_min);
    m.clamp_max = s.get<float>("clamp_max_logodds", m.clamp_max);
    m.roi_threshold = s.get<float>("roi_threshold_logodds", m.roi_threshold);
    s.finish();
    try {
      m.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), s.line());
    }
  }

  PlannerConfig& pc = cfg.planner;
  {
    Section s(top.raw("planner"), "planner", top.line());
    if (s.has("mode")) pc.mode = parse_mode(s.get<std::string>("mode", ""), line_of(s.raw("mode")));
    if (s.has("util_type")) {
      pc.eval.util_type = parse_util(s.get<std::string>("util_type", ""), line_of(s.raw("util_type")));
    }
    pc.n_vps = s.get<std::size_t>("n_vps", pc.n_vps);
    pc.budget_s = s.get<double>("budget_s", pc.budget_s);
    pc.move_speed = s.get<double>("move_speed_m_per_s", pc.move_speed);
    pc.per_view_overhead_s = s.get<double>("per_view_overhead_s", pc.per_view_overhead_s);
    pc.failed_move_penalty_s = s.get<double>("failed_move_penalty_s", pc.failed_move_penalty_s);
    pc.idle_iteration_s = s.get<double>("idle_iteration_s", pc.idle_iteration_s);
    pc.snapshot_interval_s = s.get<double>("snapshot_interval_s", pc.snapshot_interval_s);
    pc.ray_rows = s.get<int>("ray_rows", pc.ray_rows);
    pc.ray_cols = s.get<int>("ray_cols", pc.ray_cols);
    if (s.has("sample_range_m")) {
      const YAML::Node r = s.raw("sample_range_m");
      if (!r.IsSequence() || r.size() != 2) throw ConfigError("planner.sample_range_m must be [d_min, d_max]", line_of(r));
      pc.sample_range = {r[0].as<double>(), r[1].as<double>()};
    }
    cfg.start_position = s.need_vec3("start_position_m");
    cfg.start_look_at = s.need_vec3("start_look_at_m");
    s.finish();
  }
  {
    Section s(top.raw("gain"), "gain", top.line());
    pc.eval.max_dist = s.get<double>("max_dist_m", pc.eval.max_dist);
    pc.eval.alpha = s.get<double>("alpha_per_m", pc.eval.alpha);
    pc.eval.eval_range = s.get<double>("eval_range_m", pc.eval.eval_range);
    pc.eval.utility_threshold = s.get<double>("utility_threshold", pc.eval.utility_threshold);
    s.finish();
  }
  {
    Section s(top.raw("noise"), "noise", top.line());
    pc.fp_rate = s.get<double>("fp_rate", pc.fp_rate);
    pc.fn_rate = s.get<double>("fn_rate", pc.fn_rate);
    s.finish();
  }
  {
    Section s(top.raw("output"), "output", top.line());
    cfg.output_dir = s.get<std::string>("dir", cfg.output_dir);
    s.finish();
  }
  top.finish();

  try {
    pc.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), top.line());
  }
  if (cfg.start_position == cfg.start_look_at) throw ConfigError("planner: start_look_at_m equals start_position_m");
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ViewPose start_pose(const ScenarioConfig& config) {
  ViewPose pose;
  pose.position = config.start_position;
  pose.orientation = orientation_towards(config.start_position, config.start_look_at);
  return pose;
}

Environment make_environment(const ScenarioConfig& config, const GroundTruthScene& scene) {
  Environment env;
  env.scene = &scene;
  env.camera = config.camera;
  env.workspace = config.workspace;
  env.sampling = config.sampling;
  env.map_params = config.map;
  env.start = start_pose(config);
  return env;
}

}  // namespace roi_nbv
