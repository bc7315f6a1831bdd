#include "fixtures.hpp"

#include "bbtime/timeutil.hpp"

namespace bbtime::testing {

utc_seconds fixture_day0() { return utc_midnight({2026, 1, 5}); }

namespace {

std::vector<raw_event> daily(utc_seconds first_dep, std::uint32_t period,
                             std::uint32_t count, std::uint32_t duration,
                             int days = 14) {
  std::vector<raw_event> events;
  for (int d = 0; d < days; ++d) {
    for (std::uint32_t k = 0; k < count; ++k) {
      events.emplace_back(first_dep + d * 86400 + static_cast<utc_seconds>(period) * k,
                          duration);
    }
  }
  return events;
}

}  // namespace

network diamond_network() {
  const auto t0 = fixture_day0();
  network_builder b;
  const auto a = b.add_station("Alpha", 46.00, 8.00);
  const auto bb = b.add_station("Bravo", 46.05, 8.10);
  const auto c = b.add_station("Charlie", 45.95, 8.10);
  const auto d = b.add_station("Delta", 46.00, 8.20);
  b.set_route(0, "via-b first");
  b.set_route(1, "via-b second");
  b.set_route(2, "via-c first");
  b.set_route(3, "via-c second");
  b.set_route(4, "direct slow");
  // through B: 20 min legs every 30 min, transfer lines up after 300 s
  b.add_scheduled_hop(a, bb, 0, mode::bus, daily(t0 + 6 * 3600, 1800, 32, 1200));
  b.add_scheduled_hop(bb, d, 1, mode::bus, daily(t0 + 6 * 3600 + 1560, 1800, 32, 1200));
  // through C: same cadence but 45 min legs
  b.add_scheduled_hop(a, c, 2, mode::bus, daily(t0 + 6 * 3600, 1800, 32, 2700));
  b.add_scheduled_hop(c, d, 3, mode::bus, daily(t0 + 6 * 3600 + 3120, 1800, 32, 2700));
  // direct: hourly, 90 min ride
  b.add_scheduled_hop(a, d, 4, mode::bus, daily(t0 + 6 * 3600, 3600, 16, 5400));
  return b.build();
}

network daily_longhaul_network() {
  const auto t0 = fixture_day0();
  network_builder b;
  const auto x = b.add_station("Xenon", 46.0, 8.0);
  const auto y = b.add_station("Yard", 47.5, 11.0);
  const auto z = b.add_station("Zulu", 47.6, 11.2);
  const auto s = b.add_station("Slowtown", 46.8, 9.5);
  b.set_route(0, "daily long-haul");
  b.set_route(1, "shuttle");
  b.set_route(2, "local one");
  b.set_route(3, "local two");
  // one departure per day, 20 h after midnight
  b.add_scheduled_hop(x, y, 0, mode::train, daily(t0 + 20 * 3600, 0, 1, 6 * 3600));
  // half-hourly shuttle
  b.add_scheduled_hop(y, z, 1, mode::bus, daily(t0 + 5 * 3600, 1800, 36, 1500));
  // the slow way: departs early, each local takes 4 h, 8 h gap in Slowtown
  b.add_scheduled_hop(x, s, 2, mode::bus, daily(t0 + 6 * 3600, 0, 1, 4 * 3600));
  b.add_scheduled_hop(s, z, 3, mode::bus, daily(t0 + 18 * 3600, 0, 1, 4 * 3600));
  return b.build();
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"line", "grid", "hub_and_spoke",
                                              "random_geometric", "air_ground"};
  return names;
}

generator_spec family_spec(const std::string& name) {
  generator_spec spec;
  spec.family = name;
  spec.service_days = 14;
  if (name == "line") {
    spec.stations = 12;
    spec.spacing_m = 900;
    spec.headway_s = 1800;
    spec.irregularity = 0.3;
    spec.duration_jitter = 0.1;
    spec.express_stride = 3;
    spec.seed = 101;
  } else if (name == "grid") {
    spec.stations = 36;
    spec.spacing_m = 700;
    spec.headway_s = 2400;
    spec.irregularity = 0.4;
    spec.duration_jitter = 0.1;
    spec.express_stride = 3;
    spec.seed = 202;
  } else if (name == "hub_and_spoke") {
    spec.stations = 20;
    spec.spacing_m = 1500;
    spec.headway_s = 3600;
    spec.irregularity = 0.5;
    spec.duration_jitter = 0.15;
    spec.seed = 303;
  } else if (name == "random_geometric") {
    spec.stations = 50;
    spec.area_km = 25;
    spec.connect_radius_m = 4500;
    spec.headway_s = 2700;
    spec.irregularity = 0.5;
    spec.duration_jitter = 0.15;
    spec.seed = 404;
  } else if (name == "air_ground") {
    spec.family = "air_ground";
    spec.cities = 4;
    spec.city_stations = 18;
    spec.city_radius_km = 4.0;
    spec.city_spacing_km = 350.0;
    spec.connect_radius_m = 1800;
    spec.headway_s = 2700;
    spec.irregularity = 0.4;
    spec.duration_jitter = 0.1;
    spec.plane_departures_per_day = 4;
    spec.seed = 505;
  } else {
    throw validation_error("unknown fixture family: " + name);
  }
  return spec;
}

network family_network(const std::string& name) {
  auto net = generate_synthetic(family_spec(name));
  if (name == "random_geometric" || name == "air_ground") {
    multimodal_config cfg;
    cfg.max_walk_pair_m = 1500;
    net = add_walk_edges(net, cfg);
  }
  return net;
}

network clustered_city_network(std::uint32_t spine_region) {
  generator_spec spec;
  spec.family = "clustered_city";
  spec.villages = 25;
  spec.village_size = 4;
  spec.village_spacing_km = 6.0;
  spec.village_radius_m = 450.0;
  spec.headway_s = 1800;
  spec.express_stride = spine_region;
  spec.seed = 77;
  return generate_synthetic(spec);
}

triplet_store build_store(const network& net, const geo_gate& gate, std::uint64_t seed,
                          unsigned threads, std::uint32_t samples) {
  precompute_config cfg;
  cfg.est.sample_count = samples;
  cfg.est.rng_seed = seed;
  cfg.est.horizon_start = net.horizon_begin;
  cfg.gate = gate;
  cfg.threads = threads;
  triplet_store store;
  build_direct_matrix(net, cfg, store);
  build_triplets(net, 1, cfg, store);
  build_triplets(net, 2, cfg, store);
  return store;
}

}  // namespace bbtime::testing
