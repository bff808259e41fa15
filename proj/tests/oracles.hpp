#pragma once

// Reference implementations used only by the tests. They favour obviousness
// over speed and share no code with the library beyond key_of/center_of.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "roi_nbv/geometry.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace oracle {

using roi_nbv::Vec3;
using roi_nbv::VoxelKey;

inline int key_l1(const VoxelKey& a, const VoxelKey& b) {
  return std::abs(a.i - b.i) + std::abs(a.j - b.j) + std::abs(a.k - b.k);
}

namespace detail {

// Appends the voxels between parameters t0 and t1 (exclusive of key(t0),
// inclusive of key(t1)). Two samples in face-adjacent voxels need no
// refinement because the union of two adjacent cubes is convex.
inline void refine(const Vec3& a, const Vec3& b, double t0, const VoxelKey& k0, double t1, const VoxelKey& k1,
                   double res, std::vector<VoxelKey>& out, int depth) {
  if (k0 == k1) return;
  if (key_l1(k0, k1) == 1 || depth > 60) {
    out.push_back(k1);
    return;
  }
  const double tm = 0.5 * (t0 + t1);
  const VoxelKey km = roi_nbv::key_of(a + tm * (b - a), res);
  refine(a, b, t0, k0, tm, km, res, out, depth + 1);
  refine(a, b, tm, km, t1, k1, res, out, depth + 1);
}

}  // namespace detail

/// Ordered voxels crossed by the segment a -> b: fixed steps of res/20, with
/// bisection wherever two consecutive samples are not face neighbors.
inline std::vector<VoxelKey> segment_voxels(const Vec3& a, const Vec3& b, double res) {
  const double len = (b - a).norm();
  const double eps = res / 20.0;
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(len / eps)));
  std::vector<VoxelKey> out;
  VoxelKey prev = roi_nbv::key_of(a, res);
  double t_prev = 0.0;
  out.push_back(prev);
  for (long s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps);
    const VoxelKey k = s == steps ? roi_nbv::key_of(b, res) : roi_nbv::key_of(a + t * (b - a), res);
    detail::refine(a, b, t_prev, prev, t, k, res, out, 0);
    prev = k;
    t_prev = t;
  }
  return out;
}

/// Dense log-odds grid applying the insertion rules voxel by voxel.
struct DenseMap {
  double res;
  roi_nbv::MapParams params;
  std::map<VoxelKey, roi_nbv::VoxelNode> nodes;

  void insert(const roi_nbv::LabeledCloud& cloud) {
    const VoxelKey origin = roi_nbv::key_of(cloud.origin, res);
    std::set<VoxelKey> free_set;
    std::set<VoxelKey> occ;
    std::set<VoxelKey> roi;
    std::set<VoxelKey> non_roi;
    for (const auto& p : cloud.points) {
      const VoxelKey end = roi_nbv::key_of(p.position, res);
      occ.insert(end);
      (p.is_roi ? roi : non_roi).insert(end);
      for (const auto& k : segment_voxels(cloud.origin, p.position, res)) {
        if (k != origin && k != end) free_set.insert(k);
      }
    }
    for (const auto& k : occ) free_set.erase(k);
    auto bump = [&](const VoxelKey& k, float d_occ, float d_roi) {
      auto& n = nodes[k];
      n.occ_logodds = std::clamp(n.occ_logodds + d_occ, params.clamp_min, params.clamp_max);
      n.roi_logodds = std::clamp(n.roi_logodds + d_roi, params.clamp_min, params.clamp_max);
    };
    for (const auto& k : free_set) bump(k, params.miss, 0.0f);
    for (const auto& k : occ) {
      const float d_roi = roi.count(k) ? params.roi_hit : non_roi.count(k) ? params.roi_miss : 0.0f;
      bump(k, params.hit, d_roi);
    }
  }

  roi_nbv::NodeState state(const VoxelKey& k) const {
    auto it = nodes.find(k);
    if (it == nodes.end() || it->second.occ_logodds == 0.0f) return roi_nbv::NodeState::Unknown;
    return it->second.occ_logodds > 0.0f ? roi_nbv::NodeState::Occupied : roi_nbv::NodeState::Free;
  }

  /// Voxels along the ray up to max_range, cut after the first Occupied one.
  std::vector<VoxelKey> raycast(const Vec3& origin, const Vec3& dir, double max_range) const {
    std::vector<VoxelKey> out;
    for (const auto& k : segment_voxels(origin, origin + dir * max_range, res)) {
      out.push_back(k);
      if (state(k) == roi_nbv::NodeState::Occupied) break;
    }
    return out;
  }
};

inline std::set<VoxelKey> keys_in_state(const roi_nbv::RoiMap& map, roi_nbv::NodeState s) {
  std::set<VoxelKey> out;
  for (const auto& [k, n] : map.nodes()) {
    if (map.state_of(k) == s) out.insert(k);
  }
  return out;
}

inline std::set<VoxelKey> keys_in_state(const DenseMap& map, roi_nbv::NodeState s) {
  std::set<VoxelKey> out;
  for (const auto& [k, n] : map.nodes) {
    if (map.state(k) == s) out.insert(k);
  }
  return out;
}

inline const VoxelKey kFaces[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};

/// Applies the frontier definitions to every voxel in the padded key bounds.
template <typename InSampling>
std::pair<std::vector<VoxelKey>, std::vector<VoxelKey>> brute_force_frontiers(const roi_nbv::RoiMap& map,
                                                                              InSampling&& in_sampling) {
  std::vector<VoxelKey> roi_out;
  std::vector<VoxelKey> expl_out;
  if (map.size() == 0) return {roi_out, expl_out};
  VoxelKey lo = map.nodes().begin()->first;
  VoxelKey hi = lo;
  for (const auto& [k, n] : map.nodes()) {
    lo = {std::min(lo.i, k.i), std::min(lo.j, k.j), std::min(lo.k, k.k)};
    hi = {std::max(hi.i, k.i), std::max(hi.j, k.j), std::max(hi.k, k.k)};
  }
  for (int i = lo.i - 1; i <= hi.i + 1; ++i)
    for (int j = lo.j - 1; j <= hi.j + 1; ++j)
      for (int k = lo.k - 1; k <= hi.k + 1; ++k) {
        const VoxelKey v{i, j, k};
        if (map.state_of(v) != roi_nbv::NodeState::Free) continue;
        if (!in_sampling(roi_nbv::center_of(v, map.resolution()))) continue;
        bool unknown = false;
        bool occupied = false;
        bool roi = false;
        for (const auto& f : kFaces) {
          const VoxelKey n = v + f;
          unknown |= map.state_of(n) == roi_nbv::NodeState::Unknown;
          occupied |= map.state_of(n) == roi_nbv::NodeState::Occupied;
          roi |= map.is_roi(n);
        }
        if (unknown && roi) roi_out.push_back(v);
        if (unknown && occupied) expl_out.push_back(v);
      }
  std::sort(roi_out.begin(), roi_out.end());
  std::sort(expl_out.begin(), expl_out.end());
  return {roi_out, expl_out};
}

/// Union-find over 26-adjacent voxel pairs; returns components as sorted
/// voxel lists, the list of components itself sorted.
inline std::vector<std::vector<VoxelKey>> union_find_components(const std::vector<VoxelKey>& voxels) {
  const std::size_t n = voxels.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const VoxelKey d = voxels[a] - voxels[b];
      if (std::abs(d.i) <= 1 && std::abs(d.j) <= 1 && std::abs(d.k) <= 1) parent[find(a)] = find(b);
    }
  std::map<std::size_t, std::vector<VoxelKey>> groups;
  for (std::size_t a = 0; a < n; ++a) groups[find(a)].push_back(voxels[a]);
  std::vector<std::vector<VoxelKey>> out;
  for (auto& [root, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Exact one-sided Mann-Whitney p for tie-free samples: the null
/// distribution of U counted by the recurrence
/// N(u; m, n) = N(u - n; m - 1, n) + N(u; m, n - 1).
inline double mann_whitney_exact_no_ties(std::size_t m, std::size_t n, long u_observed) {
  std::vector<std::vector<std::vector<double>>> count(
      m + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(m * n + 1, 0.0)));
  for (std::size_t a = 0; a <= m; ++a)
    for (std::size_t b = 0; b <= n; ++b) {
      if (a == 0 || b == 0) {
        count[a][b][0] = 1.0;
        continue;
      }
      for (std::size_t u = 0; u <= a * b; ++u) {
        double c = count[a][b - 1][u];
        if (u >= b) c += count[a - 1][b][u - b];
        count[a][b][u] = c;
      }
    }
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t u = 0; u <= m * n; ++u) {
    total += count[m][n][u];
    if (static_cast<long>(u) >= u_observed) tail += count[m][n][u];
  }
  return tail / total;
}

/// U of sample a counted pairwise: wins plus half ties.
inline double mann_whitney_u_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
  return u;
}

}  // namespace oracle
