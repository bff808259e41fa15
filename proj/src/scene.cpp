#include <algorithm>
#include <cmath>
#include <numbers>

#include "roi_nbv/error.hpp"
#include "roi_nbv/rng.hpp"
#include "roi_nbv/sensor_sim.hpp"

namespace roi_nbv {

void CameraModel::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("camera: image size must be positive");
  if (!(fov_horizontal > 0.0 && fov_horizontal < std::numbers::pi) ||
      !(fov_vertical > 0.0 && fov_vertical < std::numbers::pi)) {
    throw ConfigError("camera: field of view must lie in (0, 180) degrees");
  }
  if (!(min_range >= 0.0 && min_range < max_range)) throw ConfigError("camera: need 0 <= min_range < max_range");
}

Vec3 CameraModel::pixel_direction(int col, int row) const {
  const double sx = std::tan(0.5 * fov_horizontal);
  const double sy = std::tan(0.5 * fov_vertical);
  const double u = 2.0 * (col + 0.5) / width - 1.0;
  const double v = 2.0 * (row + 0.5) / height - 1.0;
  return Vec3(1.0, -sx * u, -sy * v).normalized();
}

void SceneConfig::validate() const {
  if (!(resolution > 0.0)) throw ConfigError("scene: resolution must be positive");
  if (!(room.volume() > 0.0)) throw ConfigError("scene: room has zero volume");
  if ((fruit_semi_axes_min.array() <= 0.0).any() ||
      (fruit_semi_axes_max.array() < fruit_semi_axes_min.array()).any()) {
    throw ConfigError("scene: invalid fruit semi-axis range");
  }
  for (const auto& p : plants) {
    if (!room.contains(p.base) || !room.contains(p.base + Vec3(0, 0, p.height))) {
      throw ConfigError("scene: plant outside room");
    }
    if (p.fruit_count < 0 || p.leaf_count < 0) throw ConfigError("scene: negative leaf or fruit count");
    if (!(p.height > 0.0)) throw ConfigError("scene: plant height must be positive");
  }
}

GroundTruthScene GroundTruthScene::from_voxels(double resolution, VoxelMap voxels) {
  GroundTruthScene scene(resolution);
  scene.voxels_ = std::move(voxels);

  // Ground truth per fruit id, built in sorted key order for determinism.
  std::vector<VoxelKey> keys;
  keys.reserve(scene.voxels_.size());
  for (const auto& kv : scene.voxels_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());

  absl::flat_hash_map<std::int32_t, std::size_t> index;
  for (const auto& key : keys) {
    const SceneVoxel& v = scene.voxels_.at(key);
    if (v.material != Material::Fruit) continue;
    auto [it, inserted] = index.try_emplace(v.fruit_id, scene.fruits_.size());
    if (inserted) {
      FruitTruth f;
      f.id = v.fruit_id;
      scene.fruits_.push_back(std::move(f));
    }
    scene.fruits_[it->second].voxels.push_back(key);
  }
  std::sort(scene.fruits_.begin(), scene.fruits_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto& f : scene.fruits_) {
    Vec3 sum = Vec3::Zero();
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& key : f.voxels) {
      const Vec3 c = center_of(key, resolution);
      sum += c;
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    f.centroid = sum / static_cast<double>(f.voxels.size());
    f.box = {lo - Vec3::Constant(0.5 * resolution), hi + Vec3::Constant(0.5 * resolution)};
  }

  if (!keys.empty()) {
    VoxelKey lo = keys.front();
    VoxelKey hi = keys.front();
    for (const auto& key : keys) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], key[a]);
        hi[a] = std::max(hi[a], key[a]);
      }
    }
    scene.lo_ = lo;
    scene.dims_ = {hi.i - lo.i + 1, hi.j - lo.j + 1, hi.k - lo.k + 1};
    scene.dense_.assign(static_cast<std::size_t>(scene.dims_.i) * scene.dims_.j * scene.dims_.k, 0);
    for (const auto& key : keys) {
      const VoxelKey d = key - lo;
      scene.dense_[(static_cast<std::size_t>(d.k) * scene.dims_.j + d.j) * scene.dims_.i + d.i] = 1;
    }
  }
  return scene;
}

std::optional<Aabb> GroundTruthScene::bounds() const {
  if (dense_.empty()) return std::nullopt;
  const Vec3 lo = Vec3(lo_.i, lo_.j, lo_.k) * resolution_;
  const Vec3 hi = Vec3(lo_.i + dims_.i, lo_.j + dims_.j, lo_.k + dims_.k) * resolution_;
  return Aabb{lo, hi};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rgb jittered(const Rgb& base, double jitter, Rng& rng) {
  auto j = [&](double c) { return std::clamp(c + rng.uniform(-jitter, jitter), 0.0, 1.0); };
  return {j(base.r), j(base.g), j(base.b)};
}

class Voxelizer {
 public:
  Voxelizer(double resolution, GroundTruthScene::VoxelMap& out) : res_(resolution), out_(out) {}

  template <typename Inside, typename Write>
  void fill(const Vec3& lo, const Vec3& hi, Inside&& inside, Write&& write) {
    const VoxelKey a = key_of(lo, res_);
    const VoxelKey b = key_of(hi, res_);
    for (std::int32_t k = a.k; k <= b.k; ++k)
      for (std::int32_t j = a.j; j <= b.j; ++j)
        for (std::int32_t i = a.i; i <= b.i; ++i) {
          const VoxelKey key{i, j, k};
          if (inside(center_of(key, res_))) write(key);
        }
  }

  /// Solid ellipsoid with semi-axes `axes` along the columns of `rot`.
  template <typename Write>
  void ellipsoid(const Vec3& center, const Mat3& rot, const Vec3& axes, Write&& write) {
    const double r = axes.maxCoeff();
    fill(center - Vec3::Constant(r), center + Vec3::Constant(r),
         [&](const Vec3& p) {
           const Vec3 local = rot.transpose() * (p - center);
           return local.cwiseQuotient(axes).squaredNorm() <= 1.0;
         },
         write);
  }

  GroundTruthScene::VoxelMap& out() { return out_; }

 private:
  double res_;
  GroundTruthScene::VoxelMap& out_;
};

struct Leaf {
  Vec3 attach;
  double azimuth;
};

}  // namespace

GroundTruthScene generate_scene(const SceneConfig& config, std::uint64_t seed) {
  config.validate();
  const double res = config.resolution;
  GroundTruthScene::VoxelMap voxels;
  Voxelizer vox(res, voxels);
  Rng color_rng(splitmix64(seed ^ 0xC0102ull));

  if (config.floor) {
    // One voxel layer whose top face is the room floor.
    const Vec3 lo(config.room.min.x(), config.room.min.y(), config.room.min.z() - 0.5 * res);
    const Vec3 hi(config.room.max.x(), config.room.max.y(), config.room.min.z() - 0.5 * res);
    vox.fill(lo, hi, [](const Vec3&) { return true; },
             [&](const VoxelKey& key) {
               voxels[key] = {Material::Plant, -1, jittered(config.floor_color, config.color_jitter, color_rng)};
             });
  }

  const double stem_radius = std::max(0.008, 0.6 * res);
  // Thick enough that no ray can slip between voxels of a tilted leaf.
  const double leaf_half_thickness = 0.9 * res;

  std::int32_t next_fruit_id = 0;
  struct PlacedFruit {
    Vec3 center;
    double radius;
  };
  std::vector<PlacedFruit> placed;

  for (const auto& plant : config.plants) {
    Rng rng(splitmix64(seed ^ splitmix64(plant.rng_stream + 1)));
    auto write_plant = [&](const VoxelKey& key) {
      auto it = voxels.find(key);
      if (it != voxels.end() && it->second.material == Material::Fruit) return;
      voxels[key] = {Material::Plant, -1, jittered(config.stem_color, config.color_jitter, color_rng)};
    };

    const Vec3 top = plant.base + Vec3(0, 0, plant.height);
    vox.fill(plant.base - Vec3(stem_radius, stem_radius, 0), top + Vec3(stem_radius, stem_radius, 0),
             [&](const Vec3& p) {
               const double dx = p.x() - plant.base.x();
               const double dy = p.y() - plant.base.y();
               return dx * dx + dy * dy <= stem_radius * stem_radius && p.z() >= plant.base.z() && p.z() <= top.z();
             },
             write_plant);

    std::vector<Leaf> leaves;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int l = 0; l < plant.leaf_count; ++l) {
      const double frac = plant.leaf_count == 1 ? 0.6 : 0.3 + 0.65 * l / (plant.leaf_count - 1);
      const double z = plant.base.z() + plant.height * std::min(0.97, frac + rng.uniform(-0.03, 0.03));
      const double az = phase + golden * l + rng.uniform(-0.2, 0.2);
      const double length = rng.uniform(0.10, 0.16);
      const double width = rng.uniform(0.06, 0.09);
      const double droop = rng.uniform(0.15, 0.6);

      const Vec3 radial(std::cos(az), std::sin(az), 0.0);
      const Vec3 tangent(-std::sin(az), std::cos(az), 0.0);
      const Vec3 axis = std::cos(droop) * radial - std::sin(droop) * Vec3::UnitZ();
      const Vec3 normal = axis.cross(tangent);
      Mat3 rot;
      rot << axis, tangent, normal;
      const Vec3 attach(plant.base.x(), plant.base.y(), z);
      const Vec3 center = attach + axis * (0.5 * length + 0.5 * stem_radius);
      const Rgb color = jittered(config.leaf_color, config.color_jitter, rng);
      vox.ellipsoid(center, rot, Vec3(0.5 * length, 0.5 * width, leaf_half_thickness), [&](const VoxelKey& key) {
        auto it = voxels.find(key);
        if (it != voxels.end() && it->second.material == Material::Fruit) return;
        voxels[key] = {Material::Plant, -1, jittered(color, 0.5 * config.color_jitter, color_rng)};
      });
      leaves.push_back({attach, az});
    }

    for (int f = 0; f < plant.fruit_count; ++f) {
      const Vec3 axes(rng.uniform(config.fruit_semi_axes_min.x(), config.fruit_semi_axes_max.x()),
                      rng.uniform(config.fruit_semi_axes_min.y(), config.fruit_semi_axes_max.y()),
                      rng.uniform(config.fruit_semi_axes_min.z(), config.fruit_semi_axes_max.z()));
      const double radius = axes.maxCoeff();
      const double yaw = rng.uniform(0.0, std::numbers::pi);
      Mat3 rot = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();

      Vec3 center = Vec3::Zero();
      bool ok = false;
      for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        double az;
        double z;
        if (!leaves.empty() && attempt < 100) {
          // Hang beneath a leaf, spread over the lower two thirds of the foliage.
          const std::size_t n = leaves.size();
          const std::size_t idx = (static_cast<std::size_t>(f) * n / std::max(1, plant.fruit_count) +
                                   static_cast<std::size_t>(attempt)) % n;
          az = leaves[idx].azimuth + rng.uniform(-0.35, 0.35);
          z = leaves[idx].attach.z() - axes.z() - rng.uniform(0.015, 0.035);
        } else {
          az = rng.uniform(0.0, 2.0 * std::numbers::pi);
          z = plant.base.z() + rng.uniform(0.3, 0.85) * plant.height;
        }
        const double rho = stem_radius + axes.head<2>().maxCoeff() + rng.uniform(0.005, 0.02);
        center = Vec3(plant.base.x() + rho * std::cos(az), plant.base.y() + rho * std::sin(az), z);
        ok = center.z() - axes.z() > plant.base.z() + res;
        for (const auto& other : placed) {
          if ((other.center - center).norm() < other.radius + radius + 2.0 * res) ok = false;
        }
      }
      if (!ok) throw ConfigError("scene: could not place fruit without overlap; reduce fruit count or size");
      placed.push_back({center, radius});

      const std::int32_t id = next_fruit_id++;
      const Rgb color = jittered(config.fruit_color, config.color_jitter, rng);
      vox.ellipsoid(center, rot, axes, [&](const VoxelKey& key) {
        voxels[key] = {Material::Fruit, id, jittered(color, 0.5 * config.color_jitter, color_rng)};
      });
    }
  }

  return GroundTruthScene::from_voxels(res, std::move(voxels));
}

RoiMap scene_to_map(const GroundTruthScene& scene, MapParams params) {
  RoiMap map(scene.resolution(), params);
  for (const auto& [key, v] : scene.voxels()) {
    map.set_node(key, {params.clamp_max, v.material == Material::Fruit ? params.clamp_max : params.clamp_min});
  }
  return map;
}

}  // namespace roi_nbv
