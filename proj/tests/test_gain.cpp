#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "roi_nbv/error.hpp"
#include "roi_nbv/gain.hpp"
#include "roi_nbv/rng.hpp"

using namespace roi_nbv;

namespace {

constexpr VoxelNode kFree{-0.4f, 0.0f};
constexpr VoxelNode kOcc{0.85f, 0.0f};

ViewPose at(const Vec3& p) { return {p, Mat3::Identity()}; }

RoiMap random_map(std::uint64_t seed, bool with_roi) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> pick(0, 19);
  RoiMap map(0.05);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      for (int k = 0; k < 24; ++k) {
        const int r = pick(gen);
        if (r < 8) continue;
        if (r < 18) map.set_node({i, j, k}, kFree);
        else if (r < 19 || !with_roi) map.set_node({i, j, k}, kOcc);
        else map.set_node({i, j, k}, {0.85f, 0.85f});
      }
  return map;
}

// Gain recomputed voxel by voxel from raycast() and brute-force distances.
double brute_gain(const RoiMap& map, const ViewPose& pose, const RayGrid& rays, const EvalParams& p) {
  const auto roi = map.roi_keys();
  double total = 0.0;
  for (const Vec3& d : rays.directions()) {
    const auto r = map.raycast(pose.position, pose.orientation * d, p.eval_range);
    double w = 0.0;
    for (const auto& k : r.keys) {
      if (map.state_of(k) != NodeState::Unknown) continue;
      if (p.util_type == UtilityType::Unobserved) {
        w += 1.0;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : roi) best = std::min(best, (map.center(q) - map.center(k)).norm());
      w += best <= p.max_dist ? 0.5 + 0.5 * (p.max_dist - best) / p.max_dist : 0.5;
    }
    if (!r.keys.empty()) total += w / static_cast<double>(r.keys.size());
  }
  return total / static_cast<double>(rays.size());
}

}  // namespace

TEST_CASE("unobserved gain by hand") {
  RoiMap map(0.1);
  for (int i = 0; i < 6; ++i) map.set_node({i, 0, 0}, kFree);
  const RayGrid ray({Vec3::UnitX()});
  // Ten voxels: six Free, four Unknown, no hit.
  CHECK(ig_unobserved(map, at(Vec3(0.05, 0.05, 0.05)), ray, 0.94) == doctest::Approx(0.4).epsilon(1e-15));

  const RoiMap empty(0.1);
  const RayGrid grid(CameraModel{}, 15, 20);
  CHECK(ig_unobserved(empty, at(Vec3(0.05, 0.05, 0.05)), grid, 1.2) == 1.0);

  RoiMap known(0.1);
  for (int i = -15; i <= 15; ++i)
    for (int j = -15; j <= 15; ++j)
      for (int k = -15; k <= 15; ++k) known.set_node({i, j, k}, kFree);
  CHECK(ig_unobserved(known, at(Vec3(0.05, 0.05, 0.05)), grid, 1.2) == 0.0);
  EvalParams p;
  CHECK(ig_proximity(known, at(Vec3(0.05, 0.05, 0.05)), grid, p) == 0.0);
}

TEST_CASE("a hit ends the ray and counts as known") {
  RoiMap map(0.1);
  map.set_node({3, 0, 0}, kOcc);
  const RayGrid ray({Vec3::UnitX()});
  // Voxels 0..3 walked, 0..2 Unknown.
  CHECK(ig_unobserved(map, at(Vec3(0.05, 0.05, 0.05)), ray, 0.94) == doctest::Approx(0.75));
}

TEST_CASE("proximity gain by hand") {
  RoiMap map(0.1);
  map.set_node({0, 0, 0}, kFree);
  map.set_node({1, 0, 0}, {0.0f, 0.85f});  // ROI-labeled but occupancy Unknown
  map.set_node({2, 0, 0}, kFree);
  EvalParams p;
  p.util_type = UtilityType::Proximity;
  p.max_dist = 0.2;
  p.eval_range = 0.34;
  const RayGrid ray({Vec3::UnitX()});
  // Unknown voxels 1 (distance 0) and 3 (distance max_dist) among four walked.
  CHECK(ig_proximity(map, at(Vec3(0.05, 0.05, 0.05)), ray, p) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("proximity gain without ROIs is half the unobserved gain") {
  const RayGrid grid(CameraModel{}, 15, 20);
  EvalParams p;
  p.util_type = UtilityType::Proximity;
  const RoiMap empty(0.05);
  CHECK(ig_proximity(empty, at(Vec3::Zero()), grid, p) == 0.5);
  Rng rng(1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RoiMap map = random_map(seed, false);
    for (int n = 0; n < 20; ++n) {
      const ViewPose pose{Vec3(rng.uniform(0, 1.2), rng.uniform(0, 1.2), rng.uniform(0, 1.2)),
                          orientation_towards(Vec3::Zero(), rng.unit_vector())};
      const double u = ig_unobserved(map, pose, grid, p.eval_range);
      CHECK(std::abs(ig_proximity(map, pose, grid, p) - 0.5 * u) <= 1e-12);
    }
  }
}

TEST_CASE("gains match a voxel-by-voxel recomputation") {
  const RayGrid grid(CameraModel{}, 6, 8);
  Rng rng(2);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const RoiMap map = random_map(seed, true);
    for (auto type : {UtilityType::Unobserved, UtilityType::Proximity}) {
      EvalParams p;
      p.util_type = type;
      for (int n = 0; n < 10; ++n) {
        const ViewPose pose{Vec3(rng.uniform(0, 1.2), rng.uniform(0, 1.2), rng.uniform(0, 1.2)),
                            orientation_towards(Vec3::Zero(), rng.unit_vector())};
        const double got = type == UtilityType::Unobserved ? ig_unobserved(map, pose, grid, p.eval_range)
                                                           : ig_proximity(map, pose, grid, p);
        CHECK(got == doctest::Approx(brute_gain(map, pose, grid, p)).epsilon(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
      }
    }
  }
}

TEST_CASE("nearest ROI distance") {
  RoiMap map(0.01);
  map.set_node({3, 0, 0}, {0.85f, 0.85f});
  CHECK(*nearest_roi_distance(map, {3, 0, 0}, 0.1) == 0.0);
  CHECK(*nearest_roi_distance(map, {0, 0, 0}, 0.1) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK_FALSE(nearest_roi_distance(map, {30, 0, 0}, 0.1).has_value());
  CHECK(nearest_roi_distance(map, {13, 0, 0}, 0.1).has_value());
  CHECK_FALSE(nearest_roi_distance(map, {14, 0, 0}, 0.1).has_value());

  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> key(-40, 40);
  for (int trial = 0; trial < 5; ++trial) {
    RoiMap m(0.01);
    std::vector<VoxelKey> roi;
    for (int n = 0; n < 60; ++n) {
      const VoxelKey k{key(gen), key(gen), key(gen)};
      m.set_node(k, {0.85f, 0.85f});
      roi.push_back(k);
    }
    const RoiDistanceField field(m, 0.1);
    for (int n = 0; n < 2000; ++n) {
      const VoxelKey q{key(gen), key(gen), key(gen)};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : roi) best = std::min(best, (m.center(r) - m.center(q)).norm());
      const auto got = field.distance(q);
      if (std::abs(best - 0.1) < 1e-9) continue;  // exactly on the radius
      if (best <= 0.1) {
        REQUIRE(got.has_value());
        CHECK(*got == doctest::Approx(best).epsilon(1e-12));
      } else {
        CHECK_FALSE(got.has_value());
      }
      CHECK(field.distance(q) == got);
    }
  }
}

TEST_CASE("proximity weight") {
  CHECK(proximity_weight(0.0, 0.1) == 1.0);
  CHECK(proximity_weight(0.1, 0.1) == 0.5);
  CHECK(proximity_weight(0.05, 0.1) == doctest::Approx(0.75));
  CHECK_THROWS_AS(proximity_weight(0.11, 0.1), InvalidInput);
  CHECK_THROWS_AS(proximity_weight(-0.01, 0.1), InvalidInput);
  CHECK_THROWS_AS(proximity_weight(0.0, 0.0), InvalidInput);
}

TEST_CASE("movement cost and utility") {
  CHECK(move_cost(at(Vec3::Zero()), at(Vec3::Zero())) == 0.0);
  CHECK(move_cost(at(Vec3::Zero()), at(Vec3(3, 4, 0))) == 5.0);
  Rng rng(3);
  for (int n = 0; n < 100; ++n) {
    const auto a = at(rng.unit_vector() * 3.0);
    const auto b = at(rng.unit_vector() * 2.0);
    CHECK(move_cost(a, b) == move_cost(b, a));
  }
  CHECK(utility(0.6, 0.4, 0.5) == doctest::Approx(0.4));
  CHECK(utility(0.6, 7.0, 0.0) == 0.6);
  CHECK(utility(0.6, 1.0, 0.1) > utility(0.6, 1.1, 0.1));
}

TEST_CASE("evaluate fills utilities in order") {
  const RoiMap map = random_map(4, true);
  const RayGrid grid(CameraModel{}, 15, 20);
  EvalParams p;
  std::vector<Candidate> none;
  evaluate(none, map, at(Vec3::Zero()), grid, p);
  CHECK(none.empty());

  Rng rng(5);
  std::vector<Candidate> cands(30);
  for (auto& c : cands) {
    c.pose.position = Vec3(rng.uniform(0, 1.2), rng.uniform(0, 1.2), rng.uniform(0, 1.2));
    c.pose.orientation = orientation_towards(c.pose.position, Vec3(0.6, 0.6, 0.6));
  }
  const ViewPose current = at(Vec3(0.6, 0.6, 1.5));
  for (auto type : {UtilityType::Unobserved, UtilityType::Proximity}) {
    p.util_type = type;
    p.alpha = 0.0;
    evaluate(cands, map, current, grid, p);
    std::size_t best = 0;
    std::size_t best_alone = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const double alone = type == UtilityType::Unobserved ? ig_unobserved(map, cands[i].pose, grid, p.eval_range)
                                                           : ig_proximity(map, cands[i].pose, grid, p);
      CHECK(cands[i].gain == alone);
      CHECK(cands[i].utility == alone);
      if (cands[i].utility > cands[best].utility) best = i;
      if (alone > (type == UtilityType::Unobserved ? ig_unobserved(map, cands[best_alone].pose, grid, p.eval_range)
                                                   : ig_proximity(map, cands[best_alone].pose, grid, p))) {
        best_alone = i;
      }
    }
    CHECK(best == best_alone);
  }

  // Equal gain, different distance: the nearer candidate wins.
  p.util_type = UtilityType::Unobserved;
  p.alpha = 0.05;
  const RoiMap empty(0.05);
  std::vector<Candidate> pair(2);
  pair[0].pose = at(Vec3(1, 0, 0));
  pair[1].pose = at(Vec3(2, 0, 0));
  evaluate(pair, empty, at(Vec3::Zero()), grid, p);
  CHECK(pair[0].gain == pair[1].gain);
  CHECK(pair[0].utility > pair[1].utility);
}

TEST_CASE("ray grid") {
  const CameraModel cam;
  const RayGrid grid(cam, 15, 20);
  CHECK(grid.size() == 300);
  const double cos_limit = std::cos(0.5 * std::hypot(cam.fov_horizontal, cam.fov_vertical));
  for (const auto& d : grid.directions()) {
    CHECK(std::abs(d.norm() - 1.0) < 1e-12);
    CHECK(d.x() >= cos_limit);
    CHECK(std::abs(d.y() / d.x()) <= std::tan(0.5 * cam.fov_horizontal));
    CHECK(std::abs(d.z() / d.x()) <= std::tan(0.5 * cam.fov_vertical));
  }
  CHECK_THROWS_AS(RayGrid(cam, 0, 3), InvalidInput);
}
