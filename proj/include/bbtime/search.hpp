#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbtime/connectivity.hpp"
#include "bbtime/geogate.hpp"
#include "bbtime/network.hpp"
#include "bbtime/overlay.hpp"
#include "bbtime/triplets.hpp"

namespace bbtime {

struct cost_weights {
  double transfer_s = 600.0;       // per scheduled boarding after the first
  double walk_s_per_m = 0.5;
  double taxi_s_per_km = 120.0;
  double fare_s_per_unit = 0.0;    // overlay fares
  double wait_initial = 0.0;       // initial wait is reported, not costed
};

struct query {
  station_id dep = invalid_station;
  station_id arr = invalid_station;
  utc_seconds earliest_dep = 0;
  std::int64_t initial_window_s = 7200;
  std::int64_t max_window_s = 259200;  // 3 days
  int max_transfers = 5;               // hard cap 7
  double max_walk_m = 2500.0;
  std::int64_t budget_ms = 500;        // < 0 means unlimited
  cost_weights weights;
  bool allow_air = true;
  bool allow_taxi = true;
  bool flexible_window = true;
};

struct itinerary_leg {
  hop_id hop = invalid_hop;
  std::optional<std::uint32_t> event_ordinal;  // scheduled legs only
  station_id board_station = invalid_station;
  station_id alight_station = invalid_station;
  utc_seconds dep = 0;  // effective (overlay-adjusted) times
  utc_seconds arr = 0;
  std::int64_t wait_before_s = 0;  // schedule wait + transfer + displacement
  double distance_m = 0.0;
  mode md = mode::bus;
  std::optional<double> fare;
};

struct itinerary {
  std::vector<itinerary_leg> legs;
  utc_seconds depart = 0;  // first boarding
  utc_seconds arrive = 0;
  std::int64_t elapsed_s = 0;
  double cost = 0.0;
  int transfers = 0;            // legs - 1
  int scheduled_transfers = 0;  // scheduled boardings - 1
  double walk_m = 0.0;
  std::int64_t initial_wait_s = 0;
  double fares = 0.0;

  std::string signature() const;  // compact mode letters, e.g. "BTPXW"
};

struct search_stats {
  std::uint64_t alternatives_evaluated = 0;
  std::uint64_t departures_scanned = 0;
  std::uint64_t candidates_generated = 0;
  std::uint64_t pruned_bound = 0;
  std::uint64_t pruned_geo = 0;
  std::uint64_t admissibility_violations = 0;
  bool time_limited = false;
  bool geo_pruned = false;
  int sweeps = 0;
  std::int64_t final_window_s = 0;
  std::int64_t elapsed_ms = 0;
  std::uint64_t overlay_epoch = 0;
};

struct no_route_info {
  bool reachable = false;  // schedule-free reachability
  std::optional<std::uint16_t> mesh_min_transfers;
  std::string explanation;
};

struct plan_result {
  std::optional<itinerary> best;
  std::optional<itinerary> next_departure;  // best strictly later start, if seen
  std::optional<no_route_info> no_route;
  search_stats stats;
};

struct search_options {
  geo_gate gate;               // default thresholds; geo_gate::disabled() for exact runs
  bool use_mesh_gate = true;
  bool check_admissibility = false;  // instrumented lower-bound audit
};

// Ordering key for candidate visitation: typical end-to-end time of the
// composing fragments, then cumulative route distance, then the hop
// sequence for determinism.
struct priority_key {
  std::int64_t typical_sum = 0;
  double d_route = 0.0;

  bool operator<(const priority_key& o) const {
    if (typical_sum != o.typical_sum) return typical_sum < o.typical_sum;
    return d_route < o.d_route;
  }
};

// True when the sweep for `transfers` can be skipped because the mesh holds
// a higher lower bound for the station pair's cells. Missing entries never
// skip.
bool transfer_gate_skips(const mesh_table* mesh, const network& net, station_id dep,
                         station_id arr, int transfers);

// Iterates T = 0..max_transfers, evaluating stored fragments first and
// completing each sweep with bounded adjacency composition under the shared
// cost bound. Exact versus exhaustive enumeration whenever the gate is
// disabled, the budget unlimited and the window fixed.
plan_result plan(const network& net, const triplet_store& store, const mesh_table* mesh,
                 const overlay_view& overlay, const query& q,
                 const search_options& opts = {});

}  // namespace bbtime
