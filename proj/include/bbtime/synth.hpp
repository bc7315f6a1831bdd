#pragma once

#include <cstdint>
#include <string>

#include "bbtime/network.hpp"

namespace bbtime {

// Parameters for the deterministic network generators. Families:
//   line            stations on a corridor, one vehicle-chained route per
//                   direction
//   grid            lattice with a route per row and column, both directions
//   hub_and_spoke   central hub with per-spoke shuttle routes
//   random_geometric uniform stations, edges within connect_radius_m,
//                   components linked so the result is connected
//   clustered_city  tight villages far apart, local lines plus an intercity
//                   chain (walk-edge growth fixture)
//   air_ground      ground clusters around airports, planes between
//                   airports, intercity trains
struct generator_spec {
  std::string family = "line";
  std::uint32_t stations = 10;
  std::uint64_t seed = 1;

  double spacing_m = 800.0;
  double area_km = 30.0;
  double connect_radius_m = 1500.0;

  std::uint32_t headway_s = 3600;
  double irregularity = 0.0;     // fraction of departures jittered
  double duration_jitter = 0.0;  // per-departure ride time jitter fraction
  // express overlays: line/grid corridors add skip-stop services at this
  // stride; clustered_city grows a two-level spine with one regional hub
  // per express_stride villages. 0 disables.
  std::uint32_t express_stride = 0;
  std::uint32_t service_days = 14;
  std::uint32_t day_start_s = 6 * 3600;
  std::uint32_t day_end_s = 22 * 3600;
  double ride_speed_mps = 8.33;
  std::uint32_t dwell_s = 60;
  std::int32_t tz_offset_s = 0;

  // clustered_city
  std::uint32_t villages = 25;
  std::uint32_t village_size = 4;
  double village_spacing_km = 6.0;
  double village_radius_m = 450.0;

  // air_ground
  std::uint32_t cities = 4;
  std::uint32_t city_stations = 15;
  double city_radius_km = 4.0;
  double city_spacing_km = 350.0;
  std::uint32_t plane_departures_per_day = 4;

  // First service day, UTC midnight (2026-01-05 is a Monday).
  std::string start_date = "20260105";
};

generator_spec parse_generator_spec(const std::string& path);

// Deterministic for a fixed spec + seed: per-hop RNG substreams are derived
// from stable keys, so the serialized network is byte-identical across runs.
// The generated graph is always connected.
network generate_synthetic(const generator_spec& spec);

}  // namespace bbtime
