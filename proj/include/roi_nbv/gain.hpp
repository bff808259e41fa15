#pragma once

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include <optional>
#include <span>
#include <vector>

#include "roi_nbv/geometry.hpp"
#include "roi_nbv/sampling.hpp"
#include "roi_nbv/sensor_sim.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace roi_nbv {

enum class UtilityType : std::uint8_t { Unobserved, Proximity };

const char* to_string(UtilityType type);

struct EvalParams {
  UtilityType util_type = UtilityType::Unobserved;
  double max_dist = 0.1;          ///< proximity radius, meters
  double alpha = 0.05;            ///< cost weight, 1/meters
  double eval_range = 1.2;        ///< ray length, meters
  double utility_threshold = 0.2;

  void validate() const;
};

/// Evaluation rays in the camera frame, spanning the field of view.
class RayGrid {
 public:
  RayGrid(const CameraModel& camera, int rows, int cols);
  explicit RayGrid(std::vector<Vec3> directions);

  std::span<const Vec3> directions() const { return directions_; }
  std::size_t size() const { return directions_.size(); }

 private:
  std::vector<Vec3> directions_;
};

/// Truncated distance to the nearest ROI voxel, evaluated lazily and memoized
/// per map snapshot. ROI voxels are bucketed into cells at least `max_dist`
/// wide, so a query only scans the 27 surrounding cells. Not thread-safe
/// (the memo is mutable); use one instance per thread.
class RoiDistanceField {
 public:
  RoiDistanceField(const RoiMap& map, double max_dist);

  /// Distance between voxel centers to the nearest ROI voxel, or nullopt when
  /// none lies within max_dist.
  std::optional<double> distance(const VoxelKey& key) const;

  double max_dist() const { return max_dist_; }

 private:
  VoxelKey cell_of(const VoxelKey& key) const;

  double resolution_;
  double max_dist_;
  std::int32_t cell_size_;
  absl::flat_hash_map<VoxelKey, std::vector<VoxelKey>> buckets_;
  absl::flat_hash_set<VoxelKey> near_cells_;
  mutable absl::flat_hash_map<VoxelKey, std::int32_t> memo_;  // squared voxel distance, -1 if none
};

/// One-shot nearest ROI distance within max_dist.
std::optional<double> nearest_roi_distance(const RoiMap& map, const VoxelKey& key, double max_dist);

/// 0.5 at max_dist rising linearly to 1 at the ROI.
double proximity_weight(double dist, double max_dist);

/// Mean over rays of (unknown voxels / voxels walked). A ray stops after the
/// first Occupied voxel or at eval_range.
double ig_unobserved(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, double eval_range);

/// As ig_unobserved, but Unknown voxels weigh proximity_weight() near ROIs and
/// 0.5 elsewhere; Known voxels weigh 0.
double ig_proximity(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, const EvalParams& params,
                    const RoiDistanceField& field);
double ig_proximity(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, const EvalParams& params);

double move_cost(const ViewPose& current, const ViewPose& candidate);

inline double utility(double ig, double cost, double alpha) { return ig - alpha * cost; }

/// Fills gain and utility of every candidate in place (order preserved).
/// `field` (proximity utility) and `grid` (a StateGrid of `map`) are built on
/// demand when null; pass them to share the work across calls on one map.
void evaluate(std::span<Candidate> candidates, const RoiMap& map, const ViewPose& current, const RayGrid& rays,
              const EvalParams& params, const RoiDistanceField* field = nullptr, const StateGrid* grid = nullptr);

}  // namespace roi_nbv
