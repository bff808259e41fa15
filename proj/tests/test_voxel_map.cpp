#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "roi_nbv/error.hpp"
#include "roi_nbv/grid_traversal.hpp"
#include "roi_nbv/rng.hpp"
#include "roi_nbv/voxel_map.hpp"

using namespace roi_nbv;

namespace {

LabeledCloud cloud_of(const Vec3& origin, std::initializer_list<std::pair<Vec3, bool>> pts) {
  LabeledCloud c;
  c.origin = origin;
  for (const auto& [p, roi] : pts) c.points.push_back({p, roi});
  return c;
}

}  // namespace

TEST_CASE("key and center mapping are inverse") {
  Rng rng(3);
  for (int n = 0; n < 1000; ++n) {
    const VoxelKey k{static_cast<int>(rng.index(2000)) - 1000, static_cast<int>(rng.index(2000)) - 1000,
                     static_cast<int>(rng.index(2000)) - 1000};
    CHECK(key_of(center_of(k, 0.01), 0.01) == k);
  }
  CHECK(key_of(Vec3(-0.001, 0.0, 0.0099), 0.01) == VoxelKey{-1, 0, 0});
}

TEST_CASE("single point insertion marks intermediate voxels free") {
  RoiMap map(0.01);
  map.insert(cloud_of(Vec3::Zero(), {{Vec3(0.05, 0, 0), false}}));
  CHECK(map.state_of({5, 0, 0}) == NodeState::Occupied);
  for (int i = 1; i <= 4; ++i) CHECK(map.state_of({i, 0, 0}) == NodeState::Free);
  CHECK(map.state_of({0, 0, 0}) == NodeState::Unknown);
  CHECK(map.size() == 5);
  CHECK(map.find({5, 0, 0})->occ_logodds == doctest::Approx(0.85f));
  CHECK(map.find({5, 0, 0})->roi_logodds == doctest::Approx(-0.4f));
  CHECK(map.find({2, 0, 0})->roi_logodds == 0.0f);
}

TEST_CASE("endpoint of one ray traversed by another gets only the hit") {
  RoiMap map(0.1);
  map.insert(cloud_of(Vec3(0.05, 0.05, 0.05), {{Vec3(0.35, 0.05, 0.05), false}, {Vec3(0.75, 0.05, 0.05), false}}));
  CHECK(map.find({3, 0, 0})->occ_logodds == map.params().hit);
  CHECK(map.find({5, 0, 0})->occ_logodds == map.params().miss);
  CHECK(map.find({7, 0, 0})->occ_logodds == map.params().hit);
}

TEST_CASE("ROI channel follows the per-cloud set rule") {
  RoiMap map(0.1);
  // Both points land in voxel (3,0,0); the ROI label wins for the voxel.
  map.insert(cloud_of(Vec3(0.05, 0.05, 0.05), {{Vec3(0.31, 0.05, 0.05), true}, {Vec3(0.39, 0.05, 0.05), false}}));
  CHECK(map.find({3, 0, 0})->roi_logodds == map.params().roi_hit);
  CHECK(map.is_roi({3, 0, 0}));
  map.insert(cloud_of(Vec3(0.05, 0.05, 0.05), {{Vec3(0.35, 0.05, 0.05), false}}));
  CHECK(map.find({3, 0, 0})->roi_logodds == doctest::Approx(0.85f - 0.4f));
  CHECK(map.count_roi() == 1);
}

TEST_CASE("repeated hits clamp exactly") {
  RoiMap map(0.01);
  for (int n = 0; n < 100; ++n) map.insert(cloud_of(Vec3::Zero(), {{Vec3(0.05, 0, 0), true}}));
  CHECK(map.find({5, 0, 0})->occ_logodds == 3.5f);
  CHECK(map.find({5, 0, 0})->roi_logodds == 3.5f);
  CHECK(map.find({2, 0, 0})->occ_logodds == -3.5f);
}

TEST_CASE("n insertions give min(n * hit, clamp)") {
  for (int n = 1; n <= 6; ++n) {
    RoiMap map(0.01);
    float expected = 0.0f;
    for (int r = 0; r < n; ++r) {
      map.insert(cloud_of(Vec3::Zero(), {{Vec3(0.055, 0.002, 0.003), false}}));
      expected = std::min(expected + 0.85f, 3.5f);
    }
    CHECK(map.find({5, 0, 0})->occ_logodds == expected);
  }
}

TEST_CASE("state and ROI classification") {
  RoiMap map(0.1);
  CHECK(map.state_of({1, 2, 3}) == NodeState::Unknown);
  CHECK_FALSE(map.is_roi({1, 2, 3}));
  map.set_node({0, 0, 0}, {0.85f, 0.0f});
  map.set_node({1, 0, 0}, {-0.4f, 0.1f});
  map.set_node({2, 0, 0}, {0.0f, 0.0f});
  CHECK(map.state_of({0, 0, 0}) == NodeState::Occupied);
  CHECK(map.state_of({1, 0, 0}) == NodeState::Free);
  CHECK(map.state_of({2, 0, 0}) == NodeState::Unknown);
  CHECK_FALSE(map.is_roi({0, 0, 0}));
  CHECK(map.is_roi({1, 0, 0}));
  CHECK(map.count_known() == 2);
  CHECK(map.count_roi() == 1);
  map.set_node({1, 0, 0}, {0.0f, 0.0f});
  CHECK(map.count_known() == 1);
  CHECK(map.count_roi() == 0);
}

TEST_CASE("set_node clamps") {
  RoiMap map(0.1);
  map.set_node({0, 0, 0}, {10.0f, -10.0f});
  CHECK(map.find({0, 0, 0})->occ_logodds == 3.5f);
  CHECK(map.find({0, 0, 0})->roi_logodds == -3.5f);
}

TEST_CASE("non-finite input is rejected") {
  RoiMap map(0.1);
  CHECK_THROWS_AS(map.insert(cloud_of(Vec3::Zero(), {{Vec3(std::nan(""), 0, 0), false}})), InvalidInput);
  CHECK_THROWS_AS(map.insert(cloud_of(Vec3(INFINITY, 0, 0), {{Vec3(1, 0, 0), false}})), InvalidInput);
  CHECK_THROWS_AS(RoiMap(0.0), InvalidInput);
  MapParams bad;
  bad.miss = 0.1f;
  CHECK_THROWS_AS(RoiMap(0.1, bad), InvalidInput);
}

TEST_CASE("insertion is independent of point order") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  LabeledCloud cloud;
  cloud.origin = Vec3(0.01, -0.02, 0.03);
  for (int n = 0; n < 300; ++n) cloud.points.push_back({Vec3(u(gen), u(gen), u(gen)), n % 3 == 0});
  RoiMap a(0.05);
  a.insert(cloud);
  std::shuffle(cloud.points.begin(), cloud.points.end(), gen);
  RoiMap b(0.05);
  b.insert(cloud);
  CHECK(a == b);
}

TEST_CASE("axis-aligned ray of ten voxels") {
  const RoiMap map(0.1);
  const auto aligned = map.raycast(Vec3(0.05, 0.05, 0.05), Vec3::UnitX(), 1.0);
  CHECK(aligned.keys.size() == 11);
  CHECK_FALSE(aligned.hit.has_value());
  const auto offset = map.raycast(Vec3(0.02, 0.05, 0.05), Vec3::UnitX(), 1.0);
  CHECK(offset.keys.size() == 11);
  const auto on_face = map.raycast(Vec3(0.0, 0.05, 0.05), Vec3::UnitX(), 0.95);
  CHECK(on_face.keys.size() == 10);
}

TEST_CASE("raycast stops at the first occupied voxel") {
  RoiMap map(0.1);
  map.set_node({2, 0, 0}, {0.85f, 0.0f});
  map.set_node({4, 0, 0}, {0.85f, 0.0f});
  const auto r = map.raycast(Vec3(0.05, 0.05, 0.05), Vec3::UnitX(), 1.0);
  REQUIRE(r.keys.size() == 3);
  REQUIRE(r.hit.has_value());
  CHECK(*r.hit == VoxelKey{2, 0, 0});
}

TEST_CASE("raycast argument checks") {
  const RoiMap map(0.1);
  CHECK_THROWS_AS(map.raycast(Vec3::Zero(), Vec3::Zero(), 1.0), InvalidInput);
  CHECK_THROWS_AS(map.raycast(Vec3::Zero(), Vec3(1.0, 1.0, 0.0), 1.0), InvalidInput);
  CHECK_NOTHROW(map.raycast(Vec3::Zero(), Vec3(1.0 + 5e-10, 0.0, 0.0), 1.0));
}

TEST_CASE("traversal matches the stepping oracle on random rays") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.6);
  const double res = 0.05;
  RoiMap map(res);
  oracle::DenseMap dense{res, {}, {}};
  // Random occupancy on a 32^3 block.
  std::bernoulli_distribution occupied(0.02);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      for (int k = 0; k < 32; ++k)
        if (occupied(gen)) {
          map.set_node({i, j, k}, {0.85f, 0.0f});
          dense.nodes[{i, j, k}] = {0.85f, 0.0f};
        }
  Rng rng(9);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 origin(u(gen), u(gen), u(gen));
    const Vec3 dir = rng.unit_vector();
    const double range = 0.1 + 1.5 * rng.uniform();
    const auto got = map.raycast(origin, dir, range);
    const auto want = dense.raycast(origin, dir, range);
    REQUIRE(got.keys == want);
    const std::set<VoxelKey> unique(got.keys.begin(), got.keys.end());
    CHECK(unique.size() == got.keys.size());
  }
}

TEST_CASE("segment traversal visits consecutive face neighbors") {
  Rng rng(17);
  for (int n = 0; n < 500; ++n) {
    const Vec3 a = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vec3 b = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::vector<VoxelKey> keys;
    double last_t = 0.0;
    bool monotone = true;
    traverse_segment(a, b, 0.07, [&](const VoxelKey& k, double t_in, double t_out) {
      monotone &= t_in >= last_t - 1e-12 && t_out >= t_in;
      last_t = t_out;
      keys.push_back(k);
      return true;
    });
    CHECK(monotone);
    CHECK(keys.front() == key_of(a, 0.07));
    CHECK(keys.back() == key_of(b, 0.07));
    for (std::size_t i = 1; i < keys.size(); ++i) CHECK(oracle::key_l1(keys[i - 1], keys[i]) == 1);
  }
}

TEST_CASE("neighbors") {
  const auto six = neighbors({0, 0, 0}, 6);
  CHECK(six.size() == 6);
  for (const auto& k : six) CHECK(oracle::key_l1(k, {0, 0, 0}) == 1);
  const auto all = neighbors({0, 0, 0}, 26);
  const std::set<VoxelKey> unique(all.begin(), all.end());
  CHECK(unique.size() == 26);
  for (const auto& k : all) {
    CHECK(std::max({std::abs(k.i), std::abs(k.j), std::abs(k.k)}) == 1);
  }
  CHECK_THROWS_AS(neighbors({0, 0, 0}, 18), InvalidInput);

  Rng rng(2);
  for (int n = 0; n < 100; ++n) {
    const VoxelKey a{static_cast<int>(rng.index(10)), static_cast<int>(rng.index(10)), static_cast<int>(rng.index(10))};
    const VoxelKey b{static_cast<int>(rng.index(10)), static_cast<int>(rng.index(10)), static_cast<int>(rng.index(10))};
    for (int conn : {6, 26}) {
      const auto na = neighbors(a, conn);
      const auto nb = neighbors(b, conn);
      const bool ab = std::find(na.begin(), na.end(), b) != na.end();
      const bool ba = std::find(nb.begin(), nb.end(), a) != nb.end();
      CHECK(ab == ba);
    }
  }
}

TEST_CASE("serialization round trip") {
  SUBCASE("empty map") {
    const RoiMap empty(0.02);
    const RoiMap back = deserialize(serialize(empty));
    CHECK(back == empty);
    CHECK(back.resolution() == 0.02);
  }
  SUBCASE("ten thousand random nodes") {
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> key(-500, 500);
    std::uniform_real_distribution<float> lo(-3.5f, 3.5f);
    RoiMap map(0.01);
    while (map.size() < 10000) map.set_node({key(gen), key(gen), key(gen)}, {lo(gen), lo(gen)});
    const std::string bytes = serialize(map);
    CHECK(bytes.size() == 24 + 10000 * 20);
    CHECK(deserialize(bytes) == map);
    CHECK(serialize(deserialize(bytes)) == bytes);
  }
  SUBCASE("header layout") {
    RoiMap map(0.5);
    map.set_node({1, -2, 3}, {0.85f, -0.4f});
    const std::string bytes = serialize(map);
    REQUIRE(bytes.size() == 44);
    CHECK(bytes.substr(0, 8) == std::string("ROIMAP1\0", 8));
    std::int32_t j = 0;
    std::memcpy(&j, bytes.data() + 28, 4);
    CHECK(j == -2);
  }
  SUBCASE("corruption") {
    RoiMap map(0.5);
    map.set_node({1, 2, 3}, {0.85f, -0.4f});
    std::string bytes = serialize(map);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize(bad_magic), FormatError);
    CHECK_THROWS_AS(deserialize(bytes.substr(0, 10)), FormatError);
    CHECK_THROWS_AS(deserialize(bytes.substr(0, bytes.size() - 1)), FormatError);
    std::string twice = bytes + bytes.substr(24);
    const std::uint64_t two = 2;
    std::memcpy(twice.data() + 16, &two, 8);
    CHECK_THROWS_AS(deserialize(twice), FormatError);
  }
}

TEST_CASE("state grid agrees with the sparse map") {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> key(-20, 20);
  std::uniform_real_distribution<float> lo(-1.0f, 1.0f);
  RoiMap map(0.1);
  for (int n = 0; n < 3000; ++n) map.set_node({key(gen), key(gen), key(gen)}, {lo(gen), 0.0f});
  map.set_node({0, 0, 0}, {0.0f, 0.0f});
  const auto grid = StateGrid::build(map);
  REQUIRE(grid.has_value());
  for (int i = -22; i <= 22; ++i)
    for (int j = -22; j <= 22; ++j)
      for (int k = -22; k <= 22; ++k) REQUIRE(grid->state_of({i, j, k}) == map.state_of({i, j, k}));
  CHECK_FALSE(StateGrid::build(RoiMap(0.1)).has_value());
  CHECK_FALSE(StateGrid::build(map, 100).has_value());
}
