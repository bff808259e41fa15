#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <compare>
#include <cstdint>
#include <utility>

namespace roi_nbv {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Integer voxel index at map resolution. Voxel (i, j, k) covers
/// [i*res, (i+1)*res) x [j*res, (j+1)*res) x [k*res, (k+1)*res).
struct VoxelKey {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;

  constexpr auto operator<=>(const VoxelKey&) const = default;

  constexpr VoxelKey operator+(const VoxelKey& o) const { return {i + o.i, j + o.j, k + o.k}; }
  constexpr VoxelKey operator-(const VoxelKey& o) const { return {i - o.i, j - o.j, k - o.k}; }

  constexpr std::int32_t operator[](int axis) const { return axis == 0 ? i : axis == 1 ? j : k; }
  constexpr std::int32_t& operator[](int axis) { return axis == 0 ? i : axis == 1 ? j : k; }

  template <typename H>
  friend H AbslHashValue(H h, const VoxelKey& key) {
    return H::combine(std::move(h), key.i, key.j, key.k);
  }
};

inline VoxelKey key_of(const Vec3& p, double resolution) {
  return {static_cast<std::int32_t>(std::floor(p.x() / resolution)),
          static_cast<std::int32_t>(std::floor(p.y() / resolution)),
          static_cast<std::int32_t>(std::floor(p.z() / resolution))};
}

inline Vec3 center_of(const VoxelKey& key, double resolution) {
  return {(key.i + 0.5) * resolution, (key.j + 0.5) * resolution, (key.k + 0.5) * resolution};
}

/// Axis-aligned box in meters. Empty when any max < min.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  double volume() const {
    const Vec3 e = (max - min).cwiseMax(0.0);
    return e.x() * e.y() * e.z();
  }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Camera pose. Orientation columns are the camera axes in the world frame:
/// col(0) forward (optical axis), col(1) left, col(2) up.
struct ViewPose {
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();

  Vec3 forward() const { return orientation.col(0); }
  Vec3 left() const { return orientation.col(1); }
  Vec3 up() const { return orientation.col(2); }
};

bool is_rotation(const Mat3& r, double tol = 1e-9);

}  // namespace roi_nbv
