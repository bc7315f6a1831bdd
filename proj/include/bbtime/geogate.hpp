#pragma once

namespace bbtime {

// Route-vs-geographic distance ratio gate. Candidate paths whose ratio
// exceeds the effective threshold are discarded. Air candidates get a wider
// threshold (irregular fares warrant a broader search), and the threshold
// widens for short geographic distances.
struct geo_gate {
  double base_ground = 2.5;
  double base_air = 4.0;
  bool enabled = true;

  static constexpr double short_distance_floor_m = 50'000.0;  // D0

  static geo_gate disabled() { return {0.0, 0.0, false}; }

  double effective_threshold(double d_geo_m, bool air) const {
    const double base = air ? base_air : base_ground;
    const double d = d_geo_m > short_distance_floor_m ? d_geo_m : short_distance_floor_m;
    return base * (1.0 + short_distance_floor_m / d);
  }

  // keep == true means the candidate survives. Zero geographic distance
  // (same cluster) always survives.
  bool keep(double d_route_m, double d_geo_m, bool air) const {
    if (!enabled) return true;
    if (d_geo_m <= 0.0) return true;
    return d_route_m / d_geo_m <= effective_threshold(d_geo_m, air);
  }
};

}  // namespace bbtime
