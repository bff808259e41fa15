#include <algorithm>
#include <cmath>
#include <limits>

#include "roi_nbv/error.hpp"
#include "roi_nbv/grid_traversal.hpp"
#include "roi_nbv/rng.hpp"
#include "roi_nbv/sensor_sim.hpp"

namespace roi_nbv {

namespace {

// Slab test; returns the parametric interval of origin + t*dir inside the box.
bool clip_to_box(const Vec3& origin, const Vec3& dir, const Aabb& box, double& t0, double& t1) {
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return false;
      continue;
    }
    double ta = (box.min[a] - origin[a]) / dir[a];
    double tb = (box.max[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 <= t1;
}

}  // namespace

RenderedImage render(const GroundTruthScene& scene, const CameraModel& camera, const ViewPose& pose) {
  if (!is_rotation(pose.orientation, 1e-6)) throw InvalidInput("render: pose orientation is not a rotation");
  const std::size_t n = static_cast<std::size_t>(camera.width) * camera.height;
  RenderedImage img;
  img.width = camera.width;
  img.height = camera.height;
  img.depth.assign(n, std::numeric_limits<double>::quiet_NaN());
  img.color.assign(n, Rgb{});
  img.hit.assign(n, VoxelKey{});

  const auto bounds = scene.bounds();
  if (!bounds) return img;
  const double res = scene.resolution();

  for (int row = 0; row < camera.height; ++row) {
    for (int col = 0; col < camera.width; ++col) {
      const std::size_t px = static_cast<std::size_t>(row) * camera.width + col;
      const Vec3 dir = pose.orientation * camera.pixel_direction(col, row);
      double t0 = 0.0;
      double t1 = camera.max_range;
      if (!clip_to_box(pose.position, dir, *bounds, t0, t1)) continue;

      const Vec3 a = pose.position + dir * t0;
      const Vec3 b = pose.position + dir * t1;
      const double span = t1 - t0;
      traverse_segment(a, b, res, [&](const VoxelKey& key, double s_in, double s_out) {
        if (!scene.occupied(key)) return true;
        const double range = t0 + 0.5 * (s_in + s_out) * span;
        if (range >= camera.min_range && range <= camera.max_range) {
          img.depth[px] = range;
          img.color[px] = scene.find(key)->color;
          img.hit[px] = key;
        }
        return false;
      });
    }
  }
  return img;
}

LabeledCloud cloud_from_render(const RenderedImage& image, const CameraModel& camera, const ViewPose& pose,
                               double map_resolution, const HsiThresholds& thresholds) {
  if (image.width != camera.width || image.height != camera.height) {
    throw InvalidInput("cloud_from_render: image size does not match camera");
  }
  struct Bin {
    Vec3 sum = Vec3::Zero();
    int count = 0;
    bool roi = false;
  };
  absl::flat_hash_map<VoxelKey, Bin> bins;
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const std::size_t px = static_cast<std::size_t>(row) * image.width + col;
      if (!image.valid(px)) continue;
      const Vec3 p = pose.position + image.depth[px] * (pose.orientation * camera.pixel_direction(col, row));
      Bin& bin = bins[key_of(p, map_resolution)];
      bin.sum += p;
      ++bin.count;
      bin.roi = bin.roi || hsi_is_fruit(image.color[px], thresholds);
    }
  }

  std::vector<VoxelKey> keys;
  keys.reserve(bins.size());
  for (const auto& kv : bins) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());

  LabeledCloud cloud;
  cloud.origin = pose.position;
  cloud.points.reserve(keys.size());
  for (const auto& key : keys) {
    const Bin& bin = bins.at(key);
    cloud.points.push_back({bin.sum / bin.count, bin.roi});
  }
  return cloud;
}

LabeledCloud apply_detection_noise(const LabeledCloud& cloud, double fp_rate, double fn_rate, std::uint64_t seed) {
  if (!(fp_rate >= 0.0 && fp_rate <= 1.0 && fn_rate >= 0.0 && fn_rate <= 1.0)) {
    throw InvalidInput("apply_detection_noise: rates must lie in [0, 1]");
  }
  LabeledCloud out = cloud;
  if (fp_rate == 0.0 && fn_rate == 0.0) return out;
  Rng rng(seed);
  for (auto& p : out.points) {
    const double u = rng.uniform();
    if (p.is_roi) {
      if (u < fn_rate) p.is_roi = false;
    } else if (u < fp_rate) {
      p.is_roi = true;
    }
  }
  return out;
}

}  // namespace roi_nbv
