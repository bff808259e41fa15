#include "roi_nbv/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "roi_nbv/error.hpp"

namespace roi_nbv {

const char* to_string(UtilityType type) { return type == UtilityType::Unobserved ? "unobserved" : "proximity"; }

void EvalParams::validate() const {
  if (!(max_dist > 0.0)) throw ConfigError("gain: max_dist must be > 0");
  if (!(alpha >= 0.0)) throw ConfigError("gain: alpha must be >= 0");
  if (!(eval_range > 0.0)) throw ConfigError("gain: eval_range must be > 0");
}

RayGrid::RayGrid(const CameraModel& camera, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw InvalidInput("RayGrid: rows and cols must be positive");
  // Same pixel-center rule as the camera, on a coarser lattice.
  CameraModel coarse = camera;
  coarse.width = cols;
  coarse.height = rows;
  directions_.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) directions_.push_back(coarse.pixel_direction(c, r));
}

RayGrid::RayGrid(std::vector<Vec3> directions) : directions_(std::move(directions)) {
  for (auto& d : directions_) {
    if (!(d.norm() > 0.0)) throw InvalidInput("RayGrid: zero direction");
    d.normalize();
  }
}

namespace {

std::int32_t floor_div(std::int32_t a, std::int32_t b) {
  std::int32_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

RoiDistanceField::RoiDistanceField(const RoiMap& map, double max_dist)
    : resolution_(map.resolution()), max_dist_(max_dist) {
  if (!(max_dist > 0.0)) throw InvalidInput("RoiDistanceField: max_dist must be > 0");
  cell_size_ = std::max<std::int32_t>(1, static_cast<std::int32_t>(std::ceil(max_dist / resolution_)));
  for (const auto& key : map.roi_keys()) buckets_[cell_of(key)].push_back(key);
  for (const auto& [cell, keys] : buckets_) {
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) near_cells_.insert(cell + VoxelKey{di, dj, dk});
  }
}

VoxelKey RoiDistanceField::cell_of(const VoxelKey& key) const {
  return {floor_div(key.i, cell_size_), floor_div(key.j, cell_size_), floor_div(key.k, cell_size_)};
}

std::optional<double> RoiDistanceField::distance(const VoxelKey& key) const {
  const VoxelKey cell = cell_of(key);
  if (!near_cells_.contains(cell)) return std::nullopt;

  long best = -1;
  if (auto it = memo_.find(key); it != memo_.end()) {
    best = it->second;
  } else {
    long min_sq = std::numeric_limits<long>::max();
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          auto b = buckets_.find(cell + VoxelKey{di, dj, dk});
          if (b == buckets_.end()) continue;
          for (const auto& roi : b->second) {
            const long dx = static_cast<long>(roi.i) - key.i;
            const long dy = static_cast<long>(roi.j) - key.j;
            const long dz = static_cast<long>(roi.k) - key.k;
            min_sq = std::min(min_sq, dx * dx + dy * dy + dz * dz);
          }
        }
    if (min_sq != std::numeric_limits<long>::max() && std::sqrt(static_cast<double>(min_sq)) * resolution_ <= max_dist_) {
      best = min_sq;
    }
    memo_.emplace(key, static_cast<std::int32_t>(best));
  }
  if (best < 0) return std::nullopt;
  return std::sqrt(static_cast<double>(best)) * resolution_;
}

std::optional<double> nearest_roi_distance(const RoiMap& map, const VoxelKey& key, double max_dist) {
  return RoiDistanceField(map, max_dist).distance(key);
}

double proximity_weight(double dist, double max_dist) {
  if (!(max_dist > 0.0)) throw InvalidInput("proximity_weight: max_dist must be > 0");
  if (!(dist >= 0.0 && dist <= max_dist)) throw InvalidInput("proximity_weight: dist outside [0, max_dist]");
  return 0.5 + 0.5 * (max_dist - dist) / max_dist;
}

namespace {

template <typename States, typename Weight>
double mean_ray_gain(const States& map, const ViewPose& pose, const RayGrid& rays, double eval_range,
                     Weight&& weight) {
  if (rays.size() == 0) return 0.0;
  double total = 0.0;
  for (const Vec3& d : rays.directions()) {
    const Vec3 dir = pose.orientation * d;
    double w = 0.0;
    long n = 0;
    map.walk_ray(pose.position, dir, eval_range, [&](const VoxelKey& key, NodeState s) {
      ++n;
      if (s == NodeState::Unknown) w += weight(key);
      return true;
    });
    if (n > 0) total += w / static_cast<double>(n);
  }
  return total / static_cast<double>(rays.size());
}

}  // namespace

double ig_unobserved(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, double eval_range) {
  return mean_ray_gain(map, pose, rays, eval_range, [](const VoxelKey&) { return 1.0; });
}

double ig_proximity(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, const EvalParams& params,
                    const RoiDistanceField& field) {
  return mean_ray_gain(map, pose, rays, params.eval_range, [&](const VoxelKey& key) {
    const auto dist = field.distance(key);
    return dist ? proximity_weight(*dist, params.max_dist) : 0.5;
  });
}

double ig_proximity(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, const EvalParams& params) {
  const RoiDistanceField field(map, params.max_dist);
  return ig_proximity(map, pose, rays, params, field);
}

double move_cost(const ViewPose& current, const ViewPose& candidate) {
  return (current.position - candidate.position).norm();
}

namespace {

template <typename States>
void evaluate_with(std::span<Candidate> candidates, const States& states, const ViewPose& current,
                   const RayGrid& rays, const EvalParams& params, const RoiDistanceField* field) {
  for (auto& c : candidates) {
    if (params.util_type == UtilityType::Unobserved) {
      c.gain = mean_ray_gain(states, c.pose, rays, params.eval_range, [](const VoxelKey&) { return 1.0; });
    } else {
      c.gain = mean_ray_gain(states, c.pose, rays, params.eval_range, [&](const VoxelKey& key) {
        const auto dist = field->distance(key);
        return dist ? proximity_weight(*dist, params.max_dist) : 0.5;
      });
    }
    c.utility = utility(c.gain, move_cost(current, c.pose), params.alpha);
  }
}

}  // namespace

void evaluate(std::span<Candidate> candidates, const RoiMap& map, const ViewPose& current, const RayGrid& rays,
              const EvalParams& params, const RoiDistanceField* field, const StateGrid* grid) {
  if (candidates.empty()) return;
  std::unique_ptr<RoiDistanceField> owned;
  if (params.util_type == UtilityType::Proximity && field == nullptr) {
    owned = std::make_unique<RoiDistanceField>(map, params.max_dist);
    field = owned.get();
  }
  std::optional<StateGrid> local;
  if (grid == nullptr) {
    local = StateGrid::build(map);
    if (local) grid = &*local;
  }
  if (grid != nullptr) {
    evaluate_with(candidates, *grid, current, rays, params, field);
  } else {
    evaluate_with(candidates, map, current, rays, params, field);
  }
}

}  // namespace roi_nbv
