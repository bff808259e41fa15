#pragma once

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <optional>
#include <vector>

#include "roi_nbv/geometry.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace roi_nbv {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  bool operator==(const Rgb&) const = default;
};

struct Hsi {
  double hue_deg = 0.0;  ///< (-180, 180], red at 0
  double saturation = 0.0;
  double intensity = 0.0;
};

Hsi rgb_to_hsi(const Rgb& color);

/// Fruit color window. The hue window is evaluated on the circle, so windows
/// crossing the +-180 seam are allowed.
struct HsiThresholds {
  double hue_min_deg = -30.0;
  double hue_max_deg = 50.0;
  double min_saturation = 0.12;
  double min_intensity = 0.12;
};

bool hsi_is_fruit(const Rgb& color, const HsiThresholds& thresholds = {});

/// Pinhole camera looking along +x of its frame (y left, z up).
struct CameraModel {
  int width = 160;
  int height = 120;
  double fov_horizontal = 1.2042771838760873;  // 69 deg
  double fov_vertical = 0.9075712110370514;    // 52 deg
  double min_range = 0.2;
  double max_range = 2.0;

  void validate() const;

  /// Unit direction through the center of pixel (col, row), camera frame.
  Vec3 pixel_direction(int col, int row) const;
};

enum class Material : std::uint8_t { Plant, Fruit };

struct SceneVoxel {
  Material material = Material::Plant;
  std::int32_t fruit_id = -1;
  Rgb color;
};

/// Ground-truth description of one fruit. The box spans the fruit's voxel
/// centers inflated by half a voxel, i.e. the voxel boundaries.
struct FruitTruth {
  std::int32_t id = 0;
  std::vector<VoxelKey> voxels;
  Vec3 centroid = Vec3::Zero();
  Aabb box;
};

/// Immutable labeled voxel world.
class GroundTruthScene {
 public:
  using VoxelMap = absl::flat_hash_map<VoxelKey, SceneVoxel>;

  /// Builds the scene and derives per-fruit ground truth from the labels.
  static GroundTruthScene from_voxels(double resolution, VoxelMap voxels);

  double resolution() const { return resolution_; }
  const VoxelMap& voxels() const { return voxels_; }
  const std::vector<FruitTruth>& fruits() const { return fruits_; }

  const SceneVoxel* find(const VoxelKey& key) const {
    auto it = voxels_.find(key);
    return it == voxels_.end() ? nullptr : &it->second;
  }

  bool occupied(const VoxelKey& key) const {
    const long di = static_cast<long>(key.i) - lo_.i;
    const long dj = static_cast<long>(key.j) - lo_.j;
    const long dk = static_cast<long>(key.k) - lo_.k;
    if (di < 0 || dj < 0 || dk < 0 || di >= dims_.i || dj >= dims_.j || dk >= dims_.k) return false;
    return dense_[static_cast<std::size_t>((dk * dims_.j + dj) * dims_.i + di)] != 0;
  }

  /// Bounds of all voxels in meters; nullopt for an empty scene.
  std::optional<Aabb> bounds() const;

 private:
  explicit GroundTruthScene(double resolution) : resolution_(resolution) {}

  double resolution_;
  VoxelMap voxels_;
  std::vector<FruitTruth> fruits_;
  VoxelKey lo_;
  VoxelKey dims_;
  std::vector<std::uint8_t> dense_;
};

struct PlantSpec {
  Vec3 base = Vec3::Zero();  ///< stem foot, meters
  double height = 0.8;
  int leaf_count = 12;
  int fruit_count = 0;
  std::uint64_t rng_stream = 0;
};

struct SceneConfig {
  double resolution = 0.01;
  Aabb room;
  bool floor = true;
  std::vector<PlantSpec> plants;
  Vec3 fruit_semi_axes_min{0.030, 0.030, 0.035};
  Vec3 fruit_semi_axes_max{0.040, 0.040, 0.045};
  Rgb leaf_color{0.20, 0.55, 0.15};
  Rgb stem_color{0.30, 0.45, 0.15};
  Rgb fruit_color{0.75, 0.08, 0.05};
  Rgb floor_color{0.40, 0.40, 0.40};
  double color_jitter = 0.04;

  void validate() const;
};

/// Procedural plant scene: stems (cylinders), drooping leaves (thin
/// ellipsoids) and fruits (ellipsoids) hanging beneath leaves. Deterministic
/// for fixed (config, seed).
GroundTruthScene generate_scene(const SceneConfig& config, std::uint64_t seed);

struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  ///< range along the pixel ray in meters, NaN when invalid
  std::vector<Rgb> color;
  std::vector<VoxelKey> hit;  ///< ground-truth voxel seen by each valid pixel

  bool valid(std::size_t pixel) const { return depth[pixel] == depth[pixel]; }
};

/// Per-pixel ray cast against the ground truth. Depth is the range to the
/// middle of the ray's chord through the first voxel hit, so back-projected
/// points fall strictly inside the voxel they came from.
RenderedImage render(const GroundTruthScene& scene, const CameraModel& camera, const ViewPose& pose);

/// Back-projection, voxel-grid downsampling to `map_resolution` (centroid per
/// voxel) and HSI labeling (a voxel is ROI if any of its pixels passes).
LabeledCloud cloud_from_render(const RenderedImage& image, const CameraModel& camera, const ViewPose& pose,
                               double map_resolution, const HsiThresholds& thresholds = {});

/// Flips ROI flags: true->false with fn_rate, false->true with fp_rate.
LabeledCloud apply_detection_noise(const LabeledCloud& cloud, double fp_rate, double fn_rate, std::uint64_t seed);

/// Scene encoded in the map format: every voxel occupied at the clamp bound,
/// fruit voxels ROI.
RoiMap scene_to_map(const GroundTruthScene& scene, MapParams params = {});

}  // namespace roi_nbv
