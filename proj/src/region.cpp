#include <limits>

#include "roi_nbv/sampling.hpp"

namespace roi_nbv {

Region Region::everything() {
  Region r;
  r.unbounded_ = true;
  return r;
}

Region& Region::add_box(const Aabb& box) {
  boxes_.push_back(box);
  return *this;
}

Region& Region::add_shell(const SphericalShell& shell) {
  shells_.push_back(shell);
  return *this;
}

bool Region::contains(const Vec3& p) const {
  if (unbounded_) return true;
  for (const auto& b : boxes_) {
    if (b.contains(p)) return true;
  }
  for (const auto& s : shells_) {
    const double d = (p - s.center).norm();
    if (d >= s.r_min && d <= s.r_max) return true;
  }
  return false;
}

Region Region::inflated(double margin) const {
  Region out = *this;
  for (auto& b : out.boxes_) {
    b.min.array() -= margin;
    b.max.array() += margin;
  }
  for (auto& s : out.shells_) {
    s.r_min = std::max(0.0, s.r_min - margin);
    s.r_max += margin;
  }
  return out;
}

Aabb Region::bounds() const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (unbounded_) return {Vec3::Constant(-kInf), Vec3::Constant(kInf)};
  Aabb out{Vec3::Constant(kInf), Vec3::Constant(-kInf)};
  for (const auto& b : boxes_) {
    out.min = out.min.cwiseMin(b.min);
    out.max = out.max.cwiseMax(b.max);
  }
  for (const auto& s : shells_) {
    out.min = out.min.cwiseMin(s.center - Vec3::Constant(s.r_max));
    out.max = out.max.cwiseMax(s.center + Vec3::Constant(s.r_max));
  }
  return out;
}

}  // namespace roi_nbv
