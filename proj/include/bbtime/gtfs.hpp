#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bbtime/network.hpp"

namespace bbtime {

struct dst_rule {
  utc_seconds switch_utc = 0;
  std::int32_t new_offset_s = 0;
};

struct feed_config {
  std::string path;
  std::int32_t utc_offset_s = 0;
  std::vector<dst_rule> dst_rules;  // ascending by switch_utc
  int service_horizon_days = 14;
  std::string horizon_start;  // YYYYMMDD; empty = earliest calendar start
};

struct ingest_stats {
  std::size_t stations = 0;
  std::size_t hops = 0;
  std::size_t events = 0;
  std::size_t trips_expanded = 0;
  std::size_t record_errors = 0;
  std::size_t duplicate_departures = 0;
  std::vector<std::string> error_samples;
};

// Loads one GTFS feed into the builder. Times are converted to UTC here;
// the engine never sees local time. GTFS times past 24:00:00 roll into the
// next service day before conversion. transfers.txt rows with equal
// from/to stop become per-station minimum-transfer overrides.
void load_gtfs(const feed_config& cfg, network_builder& builder, ingest_stats& stats);

// `key = value` file with keys: path, utc_offset_seconds, horizon_days,
// horizon_start, dst_rule (repeatable, "switch_utc,new_offset").
feed_config parse_feed_config(const std::string& path);

}  // namespace bbtime
