#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bbtime/departures.hpp"
#include "bbtime/geo.hpp"
#include "bbtime/types.hpp"

namespace bbtime {

// Transfer defaults: plain ground transfers, and the airport side of any leg
// involving a plane. Boarding an unscheduled leg (walk/taxi/bicycle) needs no
// slack. Per-station overrides win over all rules.
constexpr std::uint32_t default_transfer_s = 300;
constexpr std::uint32_t air_transfer_s = 2700;

// Intra-cluster displacement is reported as a walk: great-circle * detour at
// walking pace.
constexpr double cluster_walk_speed_mps = 1.34;
constexpr double cluster_walk_detour = 1.3;

struct station {
  station_id id = invalid_station;
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
  std::int32_t tz_offset_s = 0;  // ingest-time offset, used only when rendering
  std::uint32_t cluster = 0;
};

struct hop {
  hop_id id = invalid_hop;
  station_id from = invalid_station;
  station_id to = invalid_station;
  route_id route = 0;
  mode md = mode::bus;
  departure_list departures;               // scheduled hops
  std::int64_t fixed_duration_s = -1;      // unscheduled hops (walk/taxi/bicycle)
  double route_distance_m = 0.0;
  double fare_estimate = 0.0;              // taxi fare basis, informational

  bool scheduled() const { return fixed_duration_s < 0; }
};

struct route_info {
  std::string label;
  std::string agency;
};

// Immutable time-dependent graph. Construction goes through network_builder
// or the ingest module; finalize() derives adjacency, the horizon, duration
// minima and the cluster view. After that the structure is safe for
// unrestricted concurrent reads.
class network {
 public:
  std::vector<station> stations;
  std::vector<hop> hops;
  std::unordered_map<route_id, route_info> routes;
  std::unordered_map<station_id, std::uint32_t> transfer_override_s;
  utc_seconds horizon_begin = 0;
  utc_seconds horizon_end = 0;

  void finalize();

  std::size_t station_count() const { return stations.size(); }
  std::size_t hop_count() const { return hops.size(); }

  const std::vector<hop_id>& out_hops(station_id s) const { return out_hops_[s]; }
  const std::vector<hop_id>& in_hops(station_id s) const { return in_hops_[s]; }
  std::uint32_t degree(station_id s) const {
    return static_cast<std::uint32_t>(out_hops_[s].size() + in_hops_[s].size());
  }

  // --- time arithmetic on hops -------------------------------------------

  // Earliest event with dep >= t. Contract violation on unscheduled hops.
  std::optional<event> next_event_at_or_after(hop_id h, utc_seconds t) const;

  std::optional<event> event_by_ordinal(hop_id h, std::uint32_t ordinal) const;

  std::vector<event> events_in_window(hop_id h, utc_seconds t0, utc_seconds t1) const;

  // Minimum ride time over all events, or the fixed duration.
  std::uint32_t min_duration(hop_id h) const { return min_duration_[h]; }

  // Minimum transfer slack when switching from an arriving to a departing
  // leg at `at`.
  std::uint32_t min_transfer_s(station_id at, mode arriving, mode departing) const;

  // --- cluster view -------------------------------------------------------

  // Search and precompute operate on nodes; a node is a cluster of stations
  // (a singleton unless clustering was applied). Reported itineraries keep
  // the true member stations.
  std::uint32_t node_count() const { return static_cast<std::uint32_t>(node_members_.size()); }
  std::uint32_t node_of(station_id s) const { return stations[s].cluster; }
  station_id node_representative(std::uint32_t node) const { return node_rep_[node]; }
  const std::vector<station_id>& node_stations(std::uint32_t node) const {
    return node_members_[node];
  }
  const std::vector<hop_id>& node_out_hops(std::uint32_t node) const {
    return node_out_[node];
  }
  const std::vector<hop_id>& node_in_hops(std::uint32_t node) const {
    return node_in_[node];
  }
  bool clustered() const { return node_count() != station_count(); }

  // Walk seconds covering the displacement between two member stations of
  // one cluster (0 when identical).
  std::uint32_t displacement_walk_s(station_id a, station_id b) const;
  double displacement_walk_m(station_id a, station_id b) const;

  geo_point station_point(station_id s) const {
    return {stations[s].lat, stations[s].lon};
  }

 private:
  std::vector<std::vector<hop_id>> out_hops_;
  std::vector<std::vector<hop_id>> in_hops_;
  std::vector<std::uint32_t> min_duration_;
  std::vector<std::vector<station_id>> node_members_;
  std::vector<station_id> node_rep_;
  std::vector<std::vector<hop_id>> node_out_;
  std::vector<std::vector<hop_id>> node_in_;
};

class network_builder {
 public:
  station_id add_station(std::string name, double lat, double lon,
                         std::int32_t tz_offset_s = 0);

  // Events as (dep_utc, duration) pairs, strictly ascending.
  hop_id add_scheduled_hop(station_id from, station_id to, route_id route, mode md,
                           const std::vector<raw_event>& events,
                           double route_distance_m = -1.0);

  hop_id add_unscheduled_hop(station_id from, station_id to, route_id route, mode md,
                             std::int64_t duration_s, double route_distance_m = -1.0,
                             double fare_estimate = 0.0);

  void set_route(route_id r, std::string label, std::string agency = {});
  route_id allocate_route();
  void set_transfer_override(station_id s, std::uint32_t seconds);

  const std::vector<station>& stations() const { return net_.stations; }
  const std::vector<hop>& hops() const { return net_.hops; }

  network build();

 private:
  double default_distance(station_id a, station_id b) const;
  network net_;
  route_id next_route_ = 0;
};

// Single-linkage grouping of stations within radius_m; each cluster's
// representative is its member with the highest hop degree. Returns a new
// network with cluster ids assigned.
network cluster_stations(const network& net, double radius_m);

}  // namespace bbtime
