#pragma once

#include <cstdint>
#include <vector>

#include "roi_nbv/geometry.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace roi_nbv {

struct SphericalShell {
  Vec3 center = Vec3::Zero();
  double r_min = 0.0;
  double r_max = 0.0;
};

/// Union of boxes and spherical shells. Stands in for the reachable-pose
/// (workspace) and target (sampling) volumes.
class Region {
 public:
  Region() = default;

  /// Region containing every point.
  static Region everything();

  Region& add_box(const Aabb& box);
  Region& add_shell(const SphericalShell& shell);

  bool contains(const Vec3& p) const;

  /// Grows every primitive by `margin` meters (shell inner radius shrinks).
  Region inflated(double margin) const;

  /// Bounding box of the union; infinite for everything().
  Aabb bounds() const;

  bool unbounded() const { return unbounded_; }
  const std::vector<Aabb>& boxes() const { return boxes_; }
  const std::vector<SphericalShell>& shells() const { return shells_; }

 private:
  bool unbounded_ = false;
  std::vector<Aabb> boxes_;
  std::vector<SphericalShell> shells_;
};

enum class CandidateKind : std::uint8_t { RoiTargeted, Exploration };

const char* to_string(CandidateKind kind);

struct Candidate {
  ViewPose pose;
  VoxelKey target;
  CandidateKind kind = CandidateKind::Exploration;
  double gain = 0.0;
  double utility = 0.0;
};

/// Free voxels in `sampling` that touch a ROI voxel (6-neighborhood) and have
/// an Unknown 6-neighbor. Sorted, unique.
std::vector<VoxelKey> find_roi_frontiers(const RoiMap& map, const Region& sampling);

/// Free voxels in `sampling` whose 6-neighborhood holds both an Occupied and an
/// Unknown voxel. Sorted, unique.
std::vector<VoxelKey> find_exploration_frontiers(const RoiMap& map, const Region& sampling);

/// Camera rotation looking from `viewpoint` at `target`, with the up axis as
/// close to world +z as possible (world +x when looking straight up/down).
Mat3 orientation_towards(const Vec3& viewpoint, const Vec3& target);

struct SampleRange {
  double d_min = 0.3;
  double d_max = 1.0;
};

/// Random viewpoints around random targets: uniform direction, uniform
/// distance in [d_min, d_max]. Viewpoints outside `workspace` or with an
/// Occupied voxel between them and the target are discarded. At most 50*n
/// attempts are made.
std::vector<Candidate> sample_candidates(const std::vector<VoxelKey>& targets, const RoiMap& map,
                                         const Region& workspace, std::size_t n, SampleRange range,
                                         CandidateKind kind, std::uint64_t seed);

/// True when the straight segment from `viewpoint` to the center of `target`
/// crosses no Occupied voxel.
bool line_of_sight(const RoiMap& map, const Vec3& viewpoint, const VoxelKey& target);

}  // namespace roi_nbv
