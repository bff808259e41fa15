#pragma once

#include <absl/container/flat_hash_map.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roi_nbv/geometry.hpp"
#include "roi_nbv/grid_traversal.hpp"

namespace roi_nbv {

/// Log-odds update parameters. Increments are applied additively and
/// clamped to [clamp_min, clamp_max].
struct MapParams {
  float hit = 0.85f;
  float miss = -0.4f;
  float roi_hit = 0.85f;
  float roi_miss = -0.4f;
  float clamp_min = -3.5f;
  float clamp_max = 3.5f;
  /// A node is ROI when roi_logodds > roi_threshold (strict).
  float roi_threshold = 0.0f;

  void validate() const;
};

struct VoxelNode {
  float occ_logodds = 0.0f;
  float roi_logodds = 0.0f;

  bool operator==(const VoxelNode&) const = default;
};

enum class NodeState : std::uint8_t { Unknown, Free, Occupied };

struct LabeledPoint {
  Vec3 position;
  bool is_roi = false;
};

/// Point cloud with per-point ROI flags, observed from `origin`.
struct LabeledCloud {
  Vec3 origin = Vec3::Zero();
  std::vector<LabeledPoint> points;
};

struct RaycastResult {
  std::vector<VoxelKey> keys;
  std::optional<VoxelKey> hit;
};

/// Sparse voxel store carrying occupancy and ROI log-odds per node.
/// Absent keys are Unknown. Single writer; concurrent readers are fine
/// between insertions.
class RoiMap {
 public:
  using NodeMap = absl::flat_hash_map<VoxelKey, VoxelNode>;

  explicit RoiMap(double resolution, MapParams params = {});

  double resolution() const { return resolution_; }
  const MapParams& params() const { return params_; }
  std::size_t size() const { return nodes_.size(); }
  const NodeMap& nodes() const { return nodes_; }

  VoxelKey key_at(const Vec3& p) const { return key_of(p, resolution_); }
  Vec3 center(const VoxelKey& key) const { return center_of(key, resolution_); }

  /// Ray-casting update from a labeled cloud. Every voxel receives at most one
  /// occupancy and one ROI update per call; endpoints win over traversals.
  void insert(const LabeledCloud& cloud);

  const VoxelNode* find(const VoxelKey& key) const {
    auto it = nodes_.find(key);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  NodeState state_of(const VoxelKey& key) const {
    const VoxelNode* node = find(key);
    if (node == nullptr || node->occ_logodds == 0.0f) return NodeState::Unknown;
    return node->occ_logodds > 0.0f ? NodeState::Occupied : NodeState::Free;
  }

  bool is_roi(const VoxelKey& key) const {
    const VoxelNode* node = find(key);
    return node != nullptr && node->roi_logodds > params_.roi_threshold;
  }

  /// Raw node write, clamped. Used by tests and offline tools to build maps by hand.
  void set_node(const VoxelKey& key, VoxelNode node);

  /// Walks voxels from `origin` along unit `direction` up to `max_range`,
  /// stopping after the first Occupied voxel. `visit(key, state)` returns
  /// false to stop early.
  template <typename Visitor>
  void walk_ray(const Vec3& origin, const Vec3& direction, double max_range, Visitor&& visit) const {
    traverse_segment(origin, origin + direction * max_range, resolution_,
                     [&](const VoxelKey& key, double, double) {
                       const NodeState s = state_of(key);
                       if (!visit(key, s)) return false;
                       return s != NodeState::Occupied;
                     });
  }

  RaycastResult raycast(const Vec3& origin, const Vec3& direction, double max_range) const;

  std::size_t count_known() const { return known_count_; }
  std::size_t count_roi() const { return roi_count_; }

  /// Inclusive key bounds of all stored nodes; nullopt for an empty map.
  std::optional<std::pair<VoxelKey, VoxelKey>> key_bounds() const;

  /// Keys sorted lexicographically.
  std::vector<VoxelKey> sorted_keys() const;
  std::vector<VoxelKey> roi_keys() const;

  bool operator==(const RoiMap& other) const;

 private:
  void apply(const VoxelKey& key, float occ_delta, float roi_delta);
  void store(const VoxelKey& key, VoxelNode& slot, VoxelNode value);

  double resolution_;
  MapParams params_;
  NodeMap nodes_;
  std::size_t known_count_ = 0;
  std::size_t roi_count_ = 0;
  VoxelKey lo_{0, 0, 0};
  VoxelKey hi_{-1, -1, -1};
};

/// Dense copy of node states over the map's key bounds. Lookups are array
/// reads instead of hash probes, which matters for the many short ray walks
/// of gain evaluation. The copy does not follow later insertions.
class StateGrid {
 public:
  /// nullopt when the map is empty or its bounds exceed `max_cells`.
  static std::optional<StateGrid> build(const RoiMap& map, std::size_t max_cells = std::size_t{1} << 28);

  double resolution() const { return resolution_; }

  NodeState state_of(const VoxelKey& key) const {
    const std::int64_t i = static_cast<std::int64_t>(key.i) - lo_.i;
    const std::int64_t j = static_cast<std::int64_t>(key.j) - lo_.j;
    const std::int64_t k = static_cast<std::int64_t>(key.k) - lo_.k;
    if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1] || k >= dims_[2]) return NodeState::Unknown;
    return static_cast<NodeState>(cells_[static_cast<std::size_t>((k * dims_[1] + j) * dims_[0] + i)]);
  }

  /// Same contract as RoiMap::walk_ray.
  template <typename Visitor>
  void walk_ray(const Vec3& origin, const Vec3& direction, double max_range, Visitor&& visit) const {
    traverse_segment(origin, origin + direction * max_range, resolution_,
                     [&](const VoxelKey& key, double, double) {
                       const NodeState s = state_of(key);
                       if (!visit(key, s)) return false;
                       return s != NodeState::Occupied;
                     });
  }

 private:
  StateGrid() = default;

  double resolution_ = 0.0;
  VoxelKey lo_{0, 0, 0};
  std::int64_t dims_[3] = {0, 0, 0};
  std::vector<std::uint8_t> cells_;
};

/// Face (6) or face+edge+corner (26) neighbors of `key`.
std::vector<VoxelKey> neighbors(const VoxelKey& key, int connectivity);

/// Offsets used by neighbors(); fixed order.
std::span<const VoxelKey> neighbor_offsets(int connectivity);

/// Little-endian binary format: "ROIMAP1\0", f64 resolution, u64 count, then
/// per node (sorted by key) three i32 key components and two f32 log-odds.
std::string serialize(const RoiMap& map);
RoiMap deserialize(std::string_view bytes, MapParams params = {});

void save_map(const RoiMap& map, const std::string& path);
RoiMap load_map(const std::string& path, MapParams params = {});

}  // namespace roi_nbv
