#include "roi_nbv/voxel_map.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "roi_nbv/error.hpp"

namespace roi_nbv {

static_assert(std::endian::native == std::endian::little, "map serialization assumes a little-endian host");

void MapParams::validate() const {
  if (!(hit > 0.0f)) throw InvalidInput("MapParams: hit must be > 0");
  if (!(miss < 0.0f)) throw InvalidInput("MapParams: miss must be < 0");
  if (!(roi_hit > 0.0f)) throw InvalidInput("MapParams: roi_hit must be > 0");
  if (!(roi_miss < 0.0f)) throw InvalidInput("MapParams: roi_miss must be < 0");
  if (!(clamp_min < 0.0f && clamp_max > 0.0f)) throw InvalidInput("MapParams: need clamp_min < 0 < clamp_max");
  if (!(roi_threshold >= 0.0f)) throw InvalidInput("MapParams: roi_threshold must be >= 0");
}

RoiMap::RoiMap(double resolution, MapParams params) : resolution_(resolution), params_(params) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw InvalidInput("RoiMap: resolution must be positive");
  params_.validate();
}

void RoiMap::store(const VoxelKey& key, VoxelNode& slot, VoxelNode value) {
  known_count_ -= slot.occ_logodds != 0.0f;
  roi_count_ -= slot.roi_logodds > params_.roi_threshold;
  slot = value;
  known_count_ += slot.occ_logodds != 0.0f;
  roi_count_ += slot.roi_logodds > params_.roi_threshold;
  if (nodes_.size() == 1) {
    lo_ = hi_ = key;
  } else {
    for (int a = 0; a < 3; ++a) {
      lo_[a] = std::min(lo_[a], key[a]);
      hi_[a] = std::max(hi_[a], key[a]);
    }
  }
}

void RoiMap::apply(const VoxelKey& key, float occ_delta, float roi_delta) {
  VoxelNode& node = nodes_[key];
  store(key, node,
        {std::clamp(node.occ_logodds + occ_delta, params_.clamp_min, params_.clamp_max),
         std::clamp(node.roi_logodds + roi_delta, params_.clamp_min, params_.clamp_max)});
}

void RoiMap::set_node(const VoxelKey& key, VoxelNode node) {
  node.occ_logodds = std::clamp(node.occ_logodds, params_.clamp_min, params_.clamp_max);
  node.roi_logodds = std::clamp(node.roi_logodds, params_.clamp_min, params_.clamp_max);
  store(key, nodes_[key], node);
}

std::optional<std::pair<VoxelKey, VoxelKey>> RoiMap::key_bounds() const {
  if (nodes_.empty()) return std::nullopt;
  return std::pair{lo_, hi_};
}

std::optional<StateGrid> StateGrid::build(const RoiMap& map, std::size_t max_cells) {
  const auto bounds = map.key_bounds();
  if (!bounds) return std::nullopt;
  const auto [lo, hi] = *bounds;
  StateGrid grid;
  grid.resolution_ = map.resolution();
  grid.lo_ = lo;
  double cells = 1.0;
  for (int a = 0; a < 3; ++a) {
    grid.dims_[a] = static_cast<std::int64_t>(hi[a]) - lo[a] + 1;
    cells *= static_cast<double>(grid.dims_[a]);
  }
  if (cells > static_cast<double>(max_cells)) return std::nullopt;
  grid.cells_.assign(static_cast<std::size_t>(cells), static_cast<std::uint8_t>(NodeState::Unknown));
  for (const auto& [key, node] : map.nodes()) {
    if (node.occ_logodds == 0.0f) continue;
    const std::int64_t i = static_cast<std::int64_t>(key.i) - lo.i;
    const std::int64_t j = static_cast<std::int64_t>(key.j) - lo.j;
    const std::int64_t k = static_cast<std::int64_t>(key.k) - lo.k;
    grid.cells_[static_cast<std::size_t>((k * grid.dims_[1] + j) * grid.dims_[0] + i)] =
        static_cast<std::uint8_t>(node.occ_logodds > 0.0f ? NodeState::Occupied : NodeState::Free);
  }
  return grid;
}

void RoiMap::insert(const LabeledCloud& cloud) {
  if (!cloud.origin.allFinite()) throw InvalidInput("insert: non-finite sensor origin");
  for (const auto& p : cloud.points) {
    if (!p.position.allFinite()) throw InvalidInput("insert: non-finite point coordinates");
  }

  absl::flat_hash_set<VoxelKey> free_set;
  absl::flat_hash_set<VoxelKey> occupied_set;
  absl::flat_hash_set<VoxelKey> roi_set;
  occupied_set.reserve(cloud.points.size());

  const VoxelKey origin_key = key_at(cloud.origin);
  for (const auto& p : cloud.points) {
    const VoxelKey end = key_at(p.position);
    occupied_set.insert(end);
    if (p.is_roi) roi_set.insert(end);
    traverse_segment(cloud.origin, p.position, resolution_, [&](const VoxelKey& key, double, double) {
      if (key != origin_key && key != end) free_set.insert(key);
      return true;
    });
  }

  absl::flat_hash_set<VoxelKey> non_roi_set;
  for (const auto& p : cloud.points) {
    if (p.is_roi) continue;
    const VoxelKey end = key_at(p.position);
    if (!roi_set.contains(end)) non_roi_set.insert(end);
  }

  for (const auto& key : occupied_set) free_set.erase(key);

  for (const auto& key : free_set) apply(key, params_.miss, 0.0f);
  for (const auto& key : occupied_set) {
    float roi_delta = 0.0f;
    if (roi_set.contains(key)) {
      roi_delta = params_.roi_hit;
    } else if (non_roi_set.contains(key)) {
      roi_delta = params_.roi_miss;
    }
    apply(key, params_.hit, roi_delta);
  }
}

RaycastResult RoiMap::raycast(const Vec3& origin, const Vec3& direction, double max_range) const {
  const double norm = direction.norm();
  if (!(norm > 0.0) || !direction.allFinite()) throw InvalidInput("raycast: zero or non-finite direction");
  if (std::abs(norm - 1.0) > 1e-9) throw InvalidInput("raycast: direction must have unit norm");
  if (!origin.allFinite() || !(max_range >= 0.0)) throw InvalidInput("raycast: invalid origin or range");

  RaycastResult result;
  walk_ray(origin, direction, max_range, [&](const VoxelKey& key, NodeState s) {
    result.keys.push_back(key);
    if (s == NodeState::Occupied) result.hit = key;
    return true;
  });
  return result;
}

std::vector<VoxelKey> RoiMap::sorted_keys() const {
  std::vector<VoxelKey> keys;
  keys.reserve(nodes_.size());
  for (const auto& kv : nodes_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<VoxelKey> RoiMap::roi_keys() const {
  std::vector<VoxelKey> keys;
  for (const auto& [key, node] : nodes_) {
    if (node.roi_logodds > params_.roi_threshold) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

bool RoiMap::operator==(const RoiMap& other) const {
  if (resolution_ != other.resolution_ || nodes_.size() != other.nodes_.size()) return false;
  for (const auto& [key, node] : nodes_) {
    const VoxelNode* o = other.find(key);
    if (o == nullptr) return false;
    // Bit-exact comparison so that -0.0f and NaN payloads are not conflated.
    if (std::bit_cast<std::uint32_t>(o->occ_logodds) != std::bit_cast<std::uint32_t>(node.occ_logodds) ||
        std::bit_cast<std::uint32_t>(o->roi_logodds) != std::bit_cast<std::uint32_t>(node.roi_logodds)) {
      return false;
    }
  }
  return true;
}

namespace {

constexpr auto make_offsets26() {
  std::array<VoxelKey, 26> out{};
  // Face neighbors first so the 6-neighborhood is a prefix.
  out[0] = {1, 0, 0};
  out[1] = {-1, 0, 0};
  out[2] = {0, 1, 0};
  out[3] = {0, -1, 0};
  out[4] = {0, 0, 1};
  out[5] = {0, 0, -1};
  int n = 6;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj)
      for (int dk = -1; dk <= 1; ++dk) {
        const int nonzero = (di != 0) + (dj != 0) + (dk != 0);
        if (nonzero >= 2) out[n++] = {di, dj, dk};
      }
  return out;
}

constexpr std::array<VoxelKey, 26> kOffsets26 = make_offsets26();

constexpr char kMagic[8] = {'R', 'O', 'I', 'M', 'A', 'P', '1', '\0'};
constexpr std::size_t kHeaderSize = 8 + 8 + 8;
constexpr std::size_t kNodeSize = 3 * 4 + 2 * 4;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::span<const VoxelKey> neighbor_offsets(int connectivity) {
  if (connectivity == 6) return {kOffsets26.data(), 6};
  if (connectivity == 26) return {kOffsets26.data(), 26};
  throw InvalidInput("neighbors: connectivity must be 6 or 26");
}

std::vector<VoxelKey> neighbors(const VoxelKey& key, int connectivity) {
  std::vector<VoxelKey> out;
  for (const auto& off : neighbor_offsets(connectivity)) out.push_back(key + off);
  return out;
}

std::string serialize(const RoiMap& map) {
  std::string out;
  out.reserve(kHeaderSize + map.size() * kNodeSize);
  out.append(kMagic, sizeof(kMagic));
  put<double>(out, map.resolution());
  put<std::uint64_t>(out, map.size());
  for (const auto& key : map.sorted_keys()) {
    const VoxelNode& node = *map.find(key);
    put<std::int32_t>(out, key.i);
    put<std::int32_t>(out, key.j);
    put<std::int32_t>(out, key.k);
    put<float>(out, node.occ_logodds);
    put<float>(out, node.roi_logodds);
  }
  return out;
}

RoiMap deserialize(std::string_view bytes, MapParams params) {
  if (bytes.size() < kHeaderSize) throw FormatError("map: truncated header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("map: bad magic bytes");
  const double resolution = get<double>(bytes, 8);
  const std::uint64_t count = get<std::uint64_t>(bytes, 16);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw FormatError("map: invalid resolution");
  if (count > (bytes.size() - kHeaderSize) / kNodeSize || bytes.size() != kHeaderSize + count * kNodeSize) {
    throw FormatError("map: node count does not match payload size");
  }

  RoiMap map(resolution, params);
  std::size_t off = kHeaderSize;
  for (std::uint64_t n = 0; n < count; ++n, off += kNodeSize) {
    const VoxelKey key{get<std::int32_t>(bytes, off), get<std::int32_t>(bytes, off + 4),
                       get<std::int32_t>(bytes, off + 8)};
    const VoxelNode node{get<float>(bytes, off + 12), get<float>(bytes, off + 16)};
    if (!std::isfinite(node.occ_logodds) || !std::isfinite(node.roi_logodds)) {
      throw FormatError("map: non-finite log-odds");
    }
    if (map.find(key) != nullptr) throw FormatError("map: duplicate key");
    map.set_node(key, node);
  }
  return map;
}

void save_map(const RoiMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  const std::string bytes = serialize(map);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path);
}

RoiMap load_map(const std::string& path, MapParams params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize(bytes, params);
}

}  // namespace roi_nbv
