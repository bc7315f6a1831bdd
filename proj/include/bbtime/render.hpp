#pragma once

#include <string>

#include "json.hpp"

#include "bbtime/network.hpp"
#include "bbtime/search.hpp"

namespace bbtime {

// Numbered-leg trip report with local times, per-leg distances, transfer
// wait lines, a summary line with the compact mode signature and a stats
// footer. Local time = UTC + the station's ingest offset.
std::string render_itinerary(const network& net, const query& q,
                             const plan_result& result);

// Machine-readable payload: UTC times, hop ids and ordinals, cost
// decomposition, stats. One JSON object; parse_itinerary() restores the
// exact itinerary.
nlohmann::json plan_payload(const network& net, const query& q,
                            const plan_result& result);

itinerary parse_itinerary(const network& net, const nlohmann::json& payload);

// helpers shared by the report and the CLI
std::string format_duration(std::int64_t seconds);
std::string format_distance_m(double meters);
std::string format_count(std::uint64_t n);  // 35.73 K style
std::string format_local_stamp(utc_seconds t, std::int32_t tz_offset_s);

}  // namespace bbtime
