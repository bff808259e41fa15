#pragma once

#include <cmath>
#include <limits>

#include "roi_nbv/geometry.hpp"

namespace roi_nbv {

/// Incremental grid stepping (Amanatides & Woo) over the voxels a segment
/// intersects, in order from `from` to `to`. Both end voxels are included;
/// the end voxel is key_of(to). `visit(key, t_in, t_out)` receives the
/// segment parameters (in [0, 1]) where the segment enters and leaves the
/// voxel, and returns false to stop early.
template <typename Visitor>
void traverse_segment(const Vec3& from, const Vec3& to, double resolution, Visitor&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Vec3 a = from / resolution;
  const Vec3 d = to / resolution - a;

  VoxelKey cur{static_cast<std::int32_t>(std::floor(a.x())),
               static_cast<std::int32_t>(std::floor(a.y())),
               static_cast<std::int32_t>(std::floor(a.z()))};
  const VoxelKey last = key_of(to, resolution);

  int step[3];
  double t_max[3];
  double t_delta[3];
  for (int axis = 0; axis < 3; ++axis) {
    const double da = d[axis];
    if (da > 0.0) {
      step[axis] = 1;
      t_delta[axis] = 1.0 / da;
      t_max[axis] = (std::floor(a[axis]) + 1.0 - a[axis]) / da;
    } else if (da < 0.0) {
      step[axis] = -1;
      t_delta[axis] = -1.0 / da;
      t_max[axis] = (a[axis] - std::floor(a[axis])) / -da;
    } else {
      step[axis] = 0;
      t_delta[axis] = kInf;
      t_max[axis] = kInf;
    }
  }

  double t_in = 0.0;
  // Bounded by the Manhattan voxel distance; guards against rounding that
  // would otherwise never land on `last`.
  long budget = std::abs(static_cast<long>(last.i) - cur.i) + std::abs(static_cast<long>(last.j) - cur.j) +
                std::abs(static_cast<long>(last.k) - cur.k);
  while (true) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    const double t_out = std::min(t_max[axis], 1.0);
    if (!visit(static_cast<const VoxelKey&>(cur), t_in, t_out)) return;
    if (cur == last || budget-- <= 0 || t_max[axis] > 1.0) return;
    cur[axis] += step[axis];
    t_in = t_max[axis];
    t_max[axis] += t_delta[axis];
  }
}

}  // namespace roi_nbv
