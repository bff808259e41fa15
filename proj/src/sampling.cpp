#include "roi_nbv/sampling.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>

#include "roi_nbv/error.hpp"
#include "roi_nbv/rng.hpp"

namespace roi_nbv {

const char* to_string(CandidateKind kind) {
  return kind == CandidateKind::RoiTargeted ? "roi" : "exploration";
}

namespace {

bool has_unknown_neighbor(const RoiMap& map, const VoxelKey& key) {
  for (const auto& off : neighbor_offsets(6)) {
    if (map.state_of(key + off) == NodeState::Unknown) return true;
  }
  return false;
}

std::vector<VoxelKey> sorted(absl::flat_hash_set<VoxelKey>& set) {
  std::vector<VoxelKey> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<VoxelKey> find_roi_frontiers(const RoiMap& map, const Region& sampling) {
  absl::flat_hash_set<VoxelKey> seen;
  absl::flat_hash_set<VoxelKey> out;
  const float thr = map.params().roi_threshold;
  for (const auto& [key, node] : map.nodes()) {
    if (!(node.roi_logodds > thr)) continue;
    for (const auto& off : neighbor_offsets(6)) {
      const VoxelKey n = key + off;
      if (!seen.insert(n).second) continue;
      if (map.state_of(n) != NodeState::Free) continue;
      if (!sampling.contains(map.center(n))) continue;
      if (has_unknown_neighbor(map, n)) out.insert(n);
    }
  }
  return sorted(out);
}

std::vector<VoxelKey> find_exploration_frontiers(const RoiMap& map, const Region& sampling) {
  // A Free voxel with an Occupied 6-neighbor is itself a 6-neighbor of an
  // Occupied voxel, so scanning around Occupied nodes finds every frontier.
  absl::flat_hash_set<VoxelKey> seen;
  absl::flat_hash_set<VoxelKey> out;
  for (const auto& [key, node] : map.nodes()) {
    if (!(node.occ_logodds > 0.0f)) continue;
    for (const auto& off : neighbor_offsets(6)) {
      const VoxelKey n = key + off;
      if (!seen.insert(n).second) continue;
      if (map.state_of(n) != NodeState::Free) continue;
      if (!sampling.contains(map.center(n))) continue;
      if (has_unknown_neighbor(map, n)) out.insert(n);
    }
  }
  return sorted(out);
}

Mat3 orientation_towards(const Vec3& viewpoint, const Vec3& target) {
  const Vec3 delta = target - viewpoint;
  const double len = delta.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw InvalidInput("orientation_towards: viewpoint equals target");
  const Vec3 forward = delta / len;
  Vec3 up = Vec3::UnitZ() - Vec3::UnitZ().dot(forward) * forward;
  if (up.norm() < 1e-9) up = Vec3::UnitX() - Vec3::UnitX().dot(forward) * forward;
  up.normalize();
  Mat3 r;
  r.col(0) = forward;
  r.col(1) = up.cross(forward);
  r.col(2) = up;
  return r;
}

bool line_of_sight(const RoiMap& map, const Vec3& viewpoint, const VoxelKey& target) {
  const Vec3 goal = map.center(target);
  const double dist = (goal - viewpoint).norm();
  if (dist == 0.0) return map.state_of(target) != NodeState::Occupied;
  bool clear = true;
  map.walk_ray(viewpoint, (goal - viewpoint) / dist, dist, [&](const VoxelKey&, NodeState s) {
    if (s == NodeState::Occupied) clear = false;
    return clear;
  });
  return clear;
}

std::vector<Candidate> sample_candidates(const std::vector<VoxelKey>& targets, const RoiMap& map,
                                         const Region& workspace, std::size_t n, SampleRange range,
                                         CandidateKind kind, std::uint64_t seed) {
  if (!(range.d_min < range.d_max) || range.d_min < 0.0) throw InvalidInput("sample_candidates: need 0 <= d_min < d_max");
  std::vector<Candidate> out;
  if (targets.empty() || n == 0) return out;
  out.reserve(n);

  Rng rng(seed);
  const std::size_t budget = 50 * n;
  for (std::size_t attempt = 0; attempt < budget && out.size() < n; ++attempt) {
    const VoxelKey target = targets[rng.index(targets.size())];
    const Vec3 goal = map.center(target);
    const Vec3 dir = rng.unit_vector();
    const double dist = rng.uniform(range.d_min, range.d_max);
    const Vec3 viewpoint = goal + dist * dir;
    if (!workspace.contains(viewpoint)) continue;
    if (dist == 0.0) continue;
    if (!line_of_sight(map, viewpoint, target)) continue;

    Candidate c;
    c.pose.position = viewpoint;
    c.pose.orientation = orientation_towards(viewpoint, goal);
    c.target = target;
    c.kind = kind;
    out.push_back(c);
  }
  return out;
}

}  // namespace roi_nbv
