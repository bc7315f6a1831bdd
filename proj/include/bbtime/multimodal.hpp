#pragma once

#include <string>
#include <vector>

#include "bbtime/network.hpp"

namespace bbtime {

struct taxi_pair {
  station_id a = invalid_station;
  station_id b = invalid_station;
  std::int64_t duration_s = 0;
  double fare_estimate = 0.0;
};

// A location without public transport that gets its own node plus a taxi
// link to the nearest connected station.
struct taxi_node {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
};

struct multimodal_config {
  double max_walk_pair_m = 1500.0;  // hard ceiling 2000
  double walk_speed_mps = 1.34;
  double walk_detour = 1.3;

  std::vector<taxi_pair> pairs;
  std::vector<taxi_node> nodes;
  bool auto_taxi = false;  // airport pairs + isolated stations
  double taxi_speed_mps = 16.7;
  double taxi_detour = 1.3;
  double airport_taxi_max_m = 80'000.0;
};

// Walk hops in both directions for every station pair within
// max_walk_pair_m (near pairs found via a spatial grid). duration =
// great-circle * detour / speed. Existing walk hops are never duplicated.
network add_walk_edges(const network& net, const multimodal_config& cfg);

// Explicit taxi pairs plus, with auto_taxi, airport<->airport links within
// range and a link from every degree-0 station to its nearest connected
// station. taxi_nodes are added as stations first.
network add_taxi_edges(const network& net, const multimodal_config& cfg);

// `key = value` / `taxi_pair = a,b,duration_s,fare` / `taxi_node =
// name,lat,lon` configuration file.
multimodal_config parse_multimodal_config(const std::string& path);

}  // namespace bbtime
