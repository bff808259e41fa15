#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>
#include <tuple>

#include "roi_nbv/analysis.hpp"

namespace roi_nbv {

std::vector<ClusterMatch> match_clusters(std::span<const FruitCluster> detected, std::span<const FruitTruth> truth,
                                         double max_distance) {
  std::vector<ClusterMatch> pairs;
  for (std::size_t d = 0; d < detected.size(); ++d) {
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double dist = (detected[d].centroid - truth[t].centroid).norm();
      if (dist < max_distance) pairs.push_back({d, truth[t].id, t, dist});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const ClusterMatch& a, const ClusterMatch& b) {
    return std::tie(a.distance, a.detected_index, a.truth_index) <
           std::tie(b.distance, b.detected_index, b.truth_index);
  });

  std::vector<bool> det_used(detected.size(), false);
  std::vector<bool> gt_used(truth.size(), false);
  std::vector<ClusterMatch> out;
  for (const auto& p : pairs) {
    if (det_used[p.detected_index] || gt_used[p.truth_index]) continue;
    det_used[p.detected_index] = true;
    gt_used[p.truth_index] = true;
    out.push_back(p);
  }
  return out;
}

double volume_accuracy(double detected_volume, double truth_volume) {
  return std::max(0.0, 1.0 - std::abs(detected_volume - truth_volume) / truth_volume);
}

namespace {

void box_voxels(const Aabb& box, double res, absl::flat_hash_set<VoxelKey>& out) {
  // Voxels whose centers lie in the box: (i + 0.5) * res in [min, max].
  auto first = [res](double lo) { return static_cast<std::int32_t>(std::ceil(lo / res - 0.5)); };
  auto last = [res](double hi) { return static_cast<std::int32_t>(std::floor(hi / res - 0.5)); };
  for (std::int32_t k = first(box.min.z()); k <= last(box.max.z()); ++k)
    for (std::int32_t j = first(box.min.y()); j <= last(box.max.y()); ++j)
      for (std::int32_t i = first(box.min.x()); i <= last(box.max.x()); ++i) out.insert({i, j, k});
}

}  // namespace

MetricReport compute_metrics(std::span<const FruitCluster> detected, std::span<const FruitTruth> truth,
                             double resolution) {
  MetricReport report;
  const auto matches = match_clusters(detected, truth);
  report.detected_rois = matches.size();
  if (!matches.empty()) {
    double dist_sum = 0.0;
    double acc_sum = 0.0;
    for (const auto& m : matches) {
      dist_sum += m.distance;
      acc_sum += volume_accuracy(detected[m.detected_index].volume, truth[m.truth_index].box.volume());
    }
    report.center_distance = dist_sum / static_cast<double>(matches.size());
    report.volume_accuracy = acc_sum / static_cast<double>(matches.size());
  }

  if (!truth.empty()) {
    absl::flat_hash_set<VoxelKey> gt_union;
    for (const auto& t : truth) box_voxels(t.box, resolution, gt_union);
    absl::flat_hash_set<VoxelKey> det_union;
    for (const auto& d : detected) box_voxels(d.box, resolution, det_union);
    std::size_t covered = 0;
    for (const auto& key : gt_union) covered += det_union.contains(key) ? 1 : 0;
    report.covered_roi_volume =
        gt_union.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(gt_union.size());
  }
  return report;
}

}  // namespace roi_nbv
