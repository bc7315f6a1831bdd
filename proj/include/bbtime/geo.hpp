#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "bbtime/types.hpp"

namespace bbtime {

constexpr double earth_radius_m = 6'371'000.0;
constexpr double meters_per_deg_lat = earth_radius_m * M_PI / 180.0;  // ~111195 m

// Haversine distance on the reference sphere.
double great_circle_m(double lat_a, double lon_a, double lat_b, double lon_b);

struct geo_point {
  double lat = 0.0;
  double lon = 0.0;
};

inline double great_circle_m(const geo_point& a, const geo_point& b) {
  return great_circle_m(a.lat, a.lon, b.lat, b.lon);
}

// Fixed-pitch lat/lon bucket grid for near-pair discovery. Cell pitch is
// radius-sized along latitude; longitude scans widen with latitude so that
// every pair within `radius_m` is visited.
class spatial_grid {
 public:
  spatial_grid(double cell_deg, std::size_t expected = 0);

  void insert(std::uint32_t id, double lat, double lon);

  // Calls fn(id) for every inserted point whose cell could contain a point
  // within radius_m of (lat, lon). Caller re-checks the exact distance.
  void for_each_near(double lat, double lon, double radius_m,
                     const std::function<void(std::uint32_t)>& fn) const;

 private:
  static std::int64_t pack(std::int32_t cx, std::int32_t cy) {
    return (static_cast<std::int64_t>(cx) << 32) |
           static_cast<std::uint32_t>(cy);
  }

  double cell_deg_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> cells_;
};

// Geographic mesh cell key (0.5 degree default pitch elsewhere). Lat/lon are
// shifted to non-negative space before bucketing.
inline std::uint32_t mesh_cell(double lat, double lon, double cell_deg) {
  const auto cy = static_cast<std::uint32_t>((lat + 90.0) / cell_deg);
  const auto cx = static_cast<std::uint32_t>((lon + 180.0) / cell_deg);
  return (cy << 16) | (cx & 0xffffu);
}

inline std::uint64_t mesh_pair_key(std::uint32_t cell_a, std::uint32_t cell_b) {
  return (static_cast<std::uint64_t>(cell_a) << 32) | cell_b;
}

}  // namespace bbtime
