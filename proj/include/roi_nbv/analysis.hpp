#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "roi_nbv/geometry.hpp"
#include "roi_nbv/sensor_sim.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace roi_nbv {

/// 26-connected set of ROI voxels with its position and size estimate.
struct FruitCluster {
  std::vector<VoxelKey> voxels;  ///< sorted
  Vec3 centroid = Vec3::Zero();  ///< mean voxel center
  Aabb box;                      ///< voxel centers inflated by half a voxel
  double volume = 0.0;           ///< box volume, m^3
};

/// Splits the ROI voxels of `map` into maximal 26-connected components.
/// Sorted by centroid (x, then y, then z).
std::vector<FruitCluster> cluster_rois(const RoiMap& map);

/// Same, for an explicit voxel set.
std::vector<FruitCluster> cluster_voxels(std::span<const VoxelKey> voxels, double resolution);

struct ClusterMatch {
  std::size_t detected_index = 0;
  std::int32_t fruit_id = 0;
  std::size_t truth_index = 0;
  double distance = 0.0;
};

inline constexpr double kMatchDistance = 0.2;

/// Greedy one-to-one matching on centroid distance below `max_distance`,
/// closest pairs first (ties by detected index, then truth index).
std::vector<ClusterMatch> match_clusters(std::span<const FruitCluster> detected, std::span<const FruitTruth> truth,
                                         double max_distance = kMatchDistance);

struct MetricReport {
  std::size_t detected_rois = 0;
  std::optional<double> center_distance;     ///< mean over matches, meters
  std::optional<double> volume_accuracy;     ///< mean over matches, [0, 1]
  std::optional<double> covered_roi_volume;  ///< [0, 1], absent without ground truth

  bool operator==(const MetricReport&) const = default;
};

/// Detection metrics against ground truth. Covered volume is measured on the
/// voxel lattice at `resolution`: a voxel belongs to a box when its center does.
MetricReport compute_metrics(std::span<const FruitCluster> detected, std::span<const FruitTruth> truth,
                             double resolution);

/// max(0, 1 - |detected - truth| / truth)
double volume_accuracy(double detected_volume, double truth_volume);

struct MannWhitneyResult {
  double u = 0.0;        ///< U statistic of sample a
  double p_value = 0.5;  ///< one-sided, alternative: a stochastically greater than b
  bool exact = false;
};

/// One-sided Mann-Whitney U test with midranks. Exact enumeration when
/// |a| + |b| <= 12, otherwise the tie-corrected normal approximation with
/// continuity correction. When U equals its null mean (including all-equal
/// samples) p is 0.5.
MannWhitneyResult mann_whitney_u_one_sided(std::span<const double> a, std::span<const double> b);

/// P(U >= observed) by enumerating every assignment of the pooled ranks.
MannWhitneyResult mann_whitney_exact(std::span<const double> a, std::span<const double> b);
MannWhitneyResult mann_whitney_normal(std::span<const double> a, std::span<const double> b);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (n - 1)
};

SampleStats sample_stats(std::span<const double> values);

}  // namespace roi_nbv
