#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <deque>
#include <limits>

#include "roi_nbv/analysis.hpp"

namespace roi_nbv {

std::vector<FruitCluster> cluster_voxels(std::span<const VoxelKey> voxels, double resolution) {
  std::vector<VoxelKey> order(voxels.begin(), voxels.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  absl::flat_hash_set<VoxelKey> remaining(order.begin(), order.end());

  std::vector<FruitCluster> clusters;
  std::deque<VoxelKey> open;
  for (const auto& seed : order) {
    if (!remaining.erase(seed)) continue;
    FruitCluster cluster;
    open.push_back(seed);
    while (!open.empty()) {
      const VoxelKey cur = open.front();
      open.pop_front();
      cluster.voxels.push_back(cur);
      for (const auto& off : neighbor_offsets(26)) {
        const VoxelKey n = cur + off;
        if (remaining.erase(n)) open.push_back(n);
      }
    }
    std::sort(cluster.voxels.begin(), cluster.voxels.end());

    Vec3 sum = Vec3::Zero();
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& key : cluster.voxels) {
      const Vec3 c = center_of(key, resolution);
      sum += c;
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    cluster.centroid = sum / static_cast<double>(cluster.voxels.size());
    cluster.box = {lo - Vec3::Constant(0.5 * resolution), hi + Vec3::Constant(0.5 * resolution)};
    cluster.volume = cluster.box.volume();
    clusters.push_back(std::move(cluster));
  }

  std::sort(clusters.begin(), clusters.end(), [](const FruitCluster& a, const FruitCluster& b) {
    const auto& ca = a.centroid;
    const auto& cb = b.centroid;
    if (ca.x() != cb.x()) return ca.x() < cb.x();
    if (ca.y() != cb.y()) return ca.y() < cb.y();
    if (ca.z() != cb.z()) return ca.z() < cb.z();
    return a.voxels.front() < b.voxels.front();
  });
  return clusters;
}

std::vector<FruitCluster> cluster_rois(const RoiMap& map) {
  const auto keys = map.roi_keys();
  return cluster_voxels(keys, map.resolution());
}

}  // namespace roi_nbv
