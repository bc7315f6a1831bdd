#pragma once

#include <string>
#include <vector>

#include "bbtime/multimodal.hpp"
#include "bbtime/network.hpp"
#include "bbtime/synth.hpp"
#include "bbtime/triplets.hpp"

namespace bbtime::testing {

// 2026-01-05 (a Monday), UTC midnight. All fixtures schedule from here.
utc_seconds fixture_day0();

// Four stations: dep A, arr D, via B (fast) and via C (slow), plus a slow
// direct bus. The one-transfer trip through B beats the direct at any hour.
network diamond_network();

// Once-daily long-haul X->Y departing 20 h after fixture_day0, shuttle
// Y->Z; plus a slow local chain X->S->Z that fits a 2 h window but wastes
// most of a day. Exercises the flexible-window expansion.
network daily_longhaul_network();

// The five acceptance fixture families, fixed seeds and sizes:
// "line", "grid", "hub_and_spoke", "random_geometric" (<= 50 stations, with
// walk edges), "air_ground" (<= 80 stations, with walk edges).
const std::vector<std::string>& family_names();
generator_spec family_spec(const std::string& name);
network family_network(const std::string& name);

// clustered 100-station city used by the walk-growth checks. The spine
// overlay (regional express trains) keeps distant pairs within the
// transfer cap; pass 0 for the locality-only variant.
network clustered_city_network(std::uint32_t spine_region = 25);

triplet_store build_store(const network& net, const geo_gate& gate,
                          std::uint64_t seed = 1, unsigned threads = 1,
                          std::uint32_t samples = 64);

}  // namespace bbtime::testing
