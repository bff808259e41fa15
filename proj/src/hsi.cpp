#include <algorithm>
#include <cmath>
#include <numbers>

#include "roi_nbv/sensor_sim.hpp"

namespace roi_nbv {

Hsi rgb_to_hsi(const Rgb& c) {
  Hsi out;
  out.intensity = (c.r + c.g + c.b) / 3.0;
  out.saturation = out.intensity > 0.0 ? 1.0 - std::min({c.r, c.g, c.b}) / out.intensity : 0.0;

  const double num = 0.5 * ((c.r - c.g) + (c.r - c.b));
  const double den = std::sqrt((c.r - c.g) * (c.r - c.g) + (c.r - c.b) * (c.g - c.b));
  if (den <= 0.0) {
    out.hue_deg = 0.0;  // achromatic
    return out;
  }
  const double theta = std::acos(std::clamp(num / den, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  // theta in [0, 180]; blue-dominant colors sit on the negative half.
  out.hue_deg = c.b <= c.g ? theta : -theta;
  if (out.hue_deg == -180.0) out.hue_deg = 180.0;
  return out;
}

namespace {

double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  return r < 0.0 ? r + 360.0 : r;
}

}  // namespace

bool hsi_is_fruit(const Rgb& color, const HsiThresholds& t) {
  const Hsi hsi = rgb_to_hsi(color);
  if (hsi.saturation < t.min_saturation || hsi.intensity < t.min_intensity) return false;
  const double width = wrap360(t.hue_max_deg - t.hue_min_deg);
  return wrap360(hsi.hue_deg - t.hue_min_deg) <= width;
}

}  // namespace roi_nbv
