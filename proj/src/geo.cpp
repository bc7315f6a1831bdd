#include "bbtime/geo.hpp"

#include <algorithm>

namespace bbtime {

double great_circle_m(double lat_a, double lon_a, double lat_b, double lon_b) {
  constexpr double deg = M_PI / 180.0;
  const double phi1 = lat_a * deg;
  const double phi2 = lat_b * deg;
  const double dphi = (lat_b - lat_a) * deg;
  const double dlam = (lon_b - lon_a) * deg;
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlam / 2.0);
  const double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  const double c = 2.0 * std::atan2(std::sqrt(a), std::sqrt(std::max(0.0, 1.0 - a)));
  return earth_radius_m * c;
}

spatial_grid::spatial_grid(double cell_deg, std::size_t expected)
    : cell_deg_(cell_deg) {
  if (cell_deg_ <= 0.0) cell_deg_ = 0.01;
  if (expected > 0) cells_.reserve(expected);
}

void spatial_grid::insert(std::uint32_t id, double lat, double lon) {
  const auto cx = static_cast<std::int32_t>(std::floor(lon / cell_deg_));
  const auto cy = static_cast<std::int32_t>(std::floor(lat / cell_deg_));
  cells_[pack(cx, cy)].push_back(id);
}

void spatial_grid::for_each_near(double lat, double lon, double radius_m,
                                 const std::function<void(std::uint32_t)>& fn) const {
  const double lat_span_deg = radius_m / meters_per_deg_lat;
  const double coslat = std::max(0.1, std::cos(lat * M_PI / 180.0));
  const double lon_span_deg = radius_m / (meters_per_deg_lat * coslat);
  const auto ny = static_cast<std::int32_t>(lat_span_deg / cell_deg_) + 1;
  const auto nx = static_cast<std::int32_t>(lon_span_deg / cell_deg_) + 1;
  const auto cx0 = static_cast<std::int32_t>(std::floor(lon / cell_deg_));
  const auto cy0 = static_cast<std::int32_t>(std::floor(lat / cell_deg_));
  for (std::int32_t dy = -ny; dy <= ny; ++dy) {
    for (std::int32_t dx = -nx; dx <= nx; ++dx) {
      const auto it = cells_.find(pack(cx0 + dx, cy0 + dy));
      if (it == cells_.end()) continue;
      for (const auto id : it->second) fn(id);
    }
  }
}

}  // namespace bbtime
