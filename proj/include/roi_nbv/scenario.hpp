#pragma once

#include <cstdint>
#include <string>

#include "roi_nbv/planner.hpp"
#include "roi_nbv/sampling.hpp"
#include "roi_nbv/sensor_sim.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace roi_nbv {

/// Parsed scenario file. Units are part of every key name (_m, _s, _deg, ...).
struct ScenarioConfig {
  std::string name = "scenario";
  SceneConfig scene;
  std::uint64_t scene_seed = 0;
  CameraModel camera;
  Region workspace;
  Region sampling;
  MapParams map;
  PlannerConfig planner;
  Vec3 start_position = Vec3::Zero();
  Vec3 start_look_at = Vec3::Zero();
  std::string output_dir = "out";
};

/// Parses YAML text. Unknown keys and missing required keys raise ConfigError
/// with the offending line.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

/// Start pose looking from start_position at start_look_at.
ViewPose start_pose(const ScenarioConfig& config);

Environment make_environment(const ScenarioConfig& config, const GroundTruthScene& scene);

}  // namespace roi_nbv
