#include "bbtime/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "bbtime/timeutil.hpp"

namespace bbtime {

namespace {

constexpr double base_lat = 46.0;
constexpr double base_lon = 8.0;

struct placed_station {
  std::string name;
  double lat;
  double lon;
};

double lat_of(double north_m) { return base_lat + north_m / meters_per_deg_lat; }

double lon_of(double east_m, double at_lat) {
  return base_lon + east_m / (meters_per_deg_lat * std::cos(at_lat * M_PI / 180.0));
}

struct schedule_params {
  const generator_spec* spec;
  utc_seconds day0;
};

// Departure list for one hop: daily service day_start..day_end at the given
// headway over service_days days, phase-shifted per hop, optionally
// jittered. With full irregularity no two consecutive gaps stay equal.
std::vector<raw_event> hop_departures(const schedule_params& sp, std::uint64_t hop_key,
                                      std::uint32_t phase_s, std::uint32_t ride_s) {
  const auto& spec = *sp.spec;
  std::mt19937_64 rng(mix64(spec.seed, hop_key));
  std::vector<raw_event> events;
  const std::int64_t headway = std::max<std::uint32_t>(spec.headway_s, 60);
  for (std::uint32_t day = 0; day < spec.service_days; ++day) {
    const utc_seconds midnight = sp.day0 + static_cast<utc_seconds>(day) * 86400;
    for (std::int64_t t = spec.day_start_s + phase_s; t < spec.day_end_s; t += headway) {
      utc_seconds dep = midnight + t;
      std::uint32_t dur = ride_s;
      if (spec.irregularity > 0.0) {
        const double roll = static_cast<double>(rng() % 1000000) / 1000000.0;
        if (roll < spec.irregularity) {
          const std::int64_t span = std::max<std::int64_t>(1, (headway * 3) / 10);
          dep += static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(2 * span)) - span;
        } else {
          rng();  // keep the draw sequence aligned
        }
      }
      if (spec.duration_jitter > 0.0) {
        const double f = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;
        const auto delta = static_cast<std::int64_t>(f * spec.duration_jitter * ride_s);
        dur = static_cast<std::uint32_t>(
            std::max<std::int64_t>(60, static_cast<std::int64_t>(ride_s) + delta));
      }
      events.emplace_back(dep, dur);
    }
  }
  std::sort(events.begin(), events.end());
  // collapse duplicate departures created by jitter
  events.erase(std::unique(events.begin(), events.end(),
                           [](const raw_event& a, const raw_event& b) {
                             return a.first == b.first;
                           }),
               events.end());
  if (spec.irregularity >= 1.0) {
    // fully irregular lists must not exhibit periodicity anywhere
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 2; i < events.size(); ++i) {
        const auto g1 = events[i - 1].first - events[i - 2].first;
        const auto g2 = events[i].first - events[i - 1].first;
        if (g1 == g2) {
          events[i].first += 1;
          changed = true;
        }
      }
      std::sort(events.begin(), events.end());
      events.erase(std::unique(events.begin(), events.end(),
                               [](const raw_event& a, const raw_event& b) {
                                 return a.first == b.first;
                               }),
                   events.end());
    }
  }
  return events;
}

// A vehicle-chained corridor service over an ordered station sequence:
// stop i leaves at trip_start + i * (ride + dwell).
void add_corridor_route(network_builder& b, const schedule_params& sp,
                        const std::vector<station_id>& seq, const std::string& label,
                        mode md, double speed_mps) {
  const auto& spec = *sp.spec;
  for (int dir = 0; dir < 2; ++dir) {
    const auto route = b.allocate_route();
    b.set_route(route, label + (dir == 0 ? " out" : " back"));
    std::vector<station_id> order = seq;
    if (dir == 1) std::reverse(order.begin(), order.end());
    std::int64_t leg_offset = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const auto from = order[i];
      const auto to = order[i + 1];
      const double gc = great_circle_m(b.stations()[from].lat, b.stations()[from].lon,
                                       b.stations()[to].lat, b.stations()[to].lon);
      const auto ride = static_cast<std::uint32_t>(
          std::max<std::int64_t>(60, std::llround(gc * 1.15 / speed_mps)));
      const std::uint64_t key = mix64(mix64(route, from), to);
      auto events = hop_departures(sp, key, static_cast<std::uint32_t>(leg_offset % 86400),
                                   ride);
      if (!events.empty()) b.add_scheduled_hop(from, to, route, md, events, gc * 1.15);
      leg_offset += ride + spec.dwell_s;
    }
  }
}

// Independent per-hop schedule between two stations, both directions.
void add_shuttle_hops(network_builder& b, const schedule_params& sp, station_id a,
                      station_id c, const std::string& label, mode md,
                      double speed_mps, double distance_factor = 1.15) {
  const auto route = b.allocate_route();
  b.set_route(route, label);
  const double gc = great_circle_m(b.stations()[a].lat, b.stations()[a].lon,
                                   b.stations()[c].lat, b.stations()[c].lon);
  const auto ride = static_cast<std::uint32_t>(
      std::max<std::int64_t>(60, std::llround(gc * distance_factor / speed_mps)));
  for (int dir = 0; dir < 2; ++dir) {
    const auto from = dir == 0 ? a : c;
    const auto to = dir == 0 ? c : a;
    const std::uint64_t key = mix64(mix64(route, from), to);
    const auto phase = static_cast<std::uint32_t>(mix64(key, 7) % sp.spec->headway_s);
    auto events = hop_departures(sp, key, phase, ride);
    if (!events.empty()) {
      b.add_scheduled_hop(from, to, route, md, events, gc * distance_factor);
    }
  }
}

// Links the closest cross-component station pairs until the hop graph built
// so far is connected.
void ensure_connected(network_builder& b, const schedule_params& sp) {
  const auto& stations = b.stations();
  const auto n = stations.size();
  std::vector<std::uint32_t> comp(n);
  std::iota(comp.begin(), comp.end(), 0u);
  std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
    while (comp[x] != x) {
      comp[x] = comp[comp[x]];
      x = comp[x];
    }
    return x;
  };
  auto unite = [&](std::uint32_t a, std::uint32_t c) {
    a = find(a);
    c = find(c);
    if (a != c) comp[std::max(a, c)] = std::min(a, c);
  };
  for (const auto& h : b.hops()) unite(h.from, h.to);

  for (;;) {
    // locate the closest station pair across different components
    double best = std::numeric_limits<double>::max();
    station_id ba = invalid_station, bc = invalid_station;
    for (station_id i = 0; i < n; ++i) {
      for (station_id j = i + 1; j < n; ++j) {
        if (find(i) == find(j)) continue;
        const double d = great_circle_m(stations[i].lat, stations[i].lon,
                                        stations[j].lat, stations[j].lon);
        if (d < best) {
          best = d;
          ba = i;
          bc = j;
        }
      }
    }
    if (ba == invalid_station) break;
    add_shuttle_hops(b, sp, ba, bc, "link", mode::bus, sp.spec->ride_speed_mps);
    unite(ba, bc);
  }
}

// Skip-stop overlay over an ordered corridor: stops at every
// express_stride-th station plus the last one.
void add_express_overlay(network_builder& b, const schedule_params& sp,
                         const std::vector<station_id>& seq, const std::string& label) {
  const auto stride = sp.spec->express_stride;
  if (stride == 0 || seq.size() <= stride + 1) return;
  std::vector<station_id> stops;
  for (std::size_t i = 0; i < seq.size(); i += stride) stops.push_back(seq[i]);
  if (stops.back() != seq.back()) stops.push_back(seq.back());
  add_corridor_route(b, sp, stops, label, mode::bus, sp.spec->ride_speed_mps * 1.5);
}

network generate_line(network_builder& b, const schedule_params& sp) {
  const auto& spec = *sp.spec;
  std::vector<station_id> seq;
  for (std::uint32_t i = 0; i < spec.stations; ++i) {
    seq.push_back(b.add_station("L" + std::to_string(i), base_lat,
                                lon_of(i * spec.spacing_m, base_lat), spec.tz_offset_s));
  }
  add_corridor_route(b, sp, seq, "line", mode::bus, spec.ride_speed_mps);
  add_express_overlay(b, sp, seq, "line express");
  return b.build();
}

network generate_grid(network_builder& b, const schedule_params& sp) {
  const auto& spec = *sp.spec;
  const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(spec.stations)));
  const auto rows = std::max(2u, side);
  const auto cols = std::max(2u, spec.stations / rows);
  std::vector<std::vector<station_id>> grid(rows, std::vector<station_id>(cols));
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      const double lat = lat_of(r * spec.spacing_m);
      grid[r][c] = b.add_station("G" + std::to_string(r) + "_" + std::to_string(c), lat,
                                 lon_of(c * spec.spacing_m, lat), spec.tz_offset_s);
    }
  }
  for (std::uint32_t r = 0; r < rows; ++r) {
    add_corridor_route(b, sp, grid[r], "row " + std::to_string(r), mode::bus,
                       spec.ride_speed_mps);
    add_express_overlay(b, sp, grid[r], "row " + std::to_string(r) + " express");
  }
  for (std::uint32_t c = 0; c < cols; ++c) {
    std::vector<station_id> col;
    for (std::uint32_t r = 0; r < rows; ++r) col.push_back(grid[r][c]);
    add_corridor_route(b, sp, col, "col " + std::to_string(c), mode::bus,
                       spec.ride_speed_mps);
    add_express_overlay(b, sp, col, "col " + std::to_string(c) + " express");
  }
  return b.build();
}

network generate_hub_and_spoke(network_builder& b, const schedule_params& sp) {
  const auto& spec = *sp.spec;
  const auto hub = b.add_station("hub", base_lat, base_lon, spec.tz_offset_s);
  const auto spokes = spec.stations > 1 ? spec.stations - 1 : 1;
  std::vector<station_id> ring;
  for (std::uint32_t i = 0; i < spokes; ++i) {
    const double angle = 2.0 * M_PI * i / spokes;
    const double north = std::sin(angle) * spec.spacing_m * 4.0;
    const double east = std::cos(angle) * spec.spacing_m * 4.0;
    const double lat = lat_of(north);
    const auto s = b.add_station("spoke" + std::to_string(i), lat, lon_of(east, lat),
                                 spec.tz_offset_s);
    ring.push_back(s);
    add_shuttle_hops(b, sp, hub, s, "spoke " + std::to_string(i), mode::bus,
                     spec.ride_speed_mps);
  }
  // circumferential line so neighbor trips need not detour via the hub
  if (ring.size() > 2) {
    ring.push_back(ring.front());
    add_corridor_route(b, sp, ring, "ring", mode::bus, spec.ride_speed_mps);
  }
  return b.build();
}

network generate_random_geometric(network_builder& b, const schedule_params& sp) {
  const auto& spec = *sp.spec;
  std::mt19937_64 rng(mix64(spec.seed, 0xa11ce));
  const double box_m = spec.area_km * 1000.0;
  for (std::uint32_t i = 0; i < spec.stations; ++i) {
    const double north = static_cast<double>(rng() % 1000000) / 1000000.0 * box_m;
    const double east = static_cast<double>(rng() % 1000000) / 1000000.0 * box_m;
    const double lat = lat_of(north);
    b.add_station("S" + std::to_string(i), lat, lon_of(east, lat), spec.tz_offset_s);
  }
  std::vector<std::pair<station_id, station_id>> edges;
  const auto& stations = b.stations();
  for (station_id i = 0; i < spec.stations; ++i) {
    for (station_id j = i + 1; j < spec.stations; ++j) {
      const double d = great_circle_m(stations[i].lat, stations[i].lon, stations[j].lat,
                                      stations[j].lon);
      if (d <= spec.connect_radius_m) edges.emplace_back(i, j);
    }
  }
  for (const auto& [i, j] : edges) {
    add_shuttle_hops(b, sp, i, j, "e" + std::to_string(i) + "_" + std::to_string(j),
                     mode::bus, spec.ride_speed_mps);
  }
  ensure_connected(b, sp);
  return b.build();
}

network generate_clustered_city(network_builder& b, const schedule_params& sp) {
  const auto& spec = *sp.spec;
  std::mt19937_64 rng(mix64(spec.seed, 0xc17f));
  const auto villages = spec.villages;
  const auto per = spec.village_size;
  const auto vcols = static_cast<std::uint32_t>(std::ceil(std::sqrt(villages)));
  std::vector<std::vector<station_id>> members(villages);
  for (std::uint32_t v = 0; v < villages; ++v) {
    const double cn = (v / vcols) * spec.village_spacing_km * 1000.0;
    const double ce = (v % vcols) * spec.village_spacing_km * 1000.0;
    for (std::uint32_t k = 0; k < per; ++k) {
      const double ang = 2.0 * M_PI * (static_cast<double>(rng() % 1000) / 1000.0);
      const double rad = spec.village_radius_m *
                         (0.35 + 0.65 * static_cast<double>(rng() % 1000) / 1000.0);
      const double lat = lat_of(cn + std::sin(ang) * rad);
      members[v].push_back(b.add_station(
          "V" + std::to_string(v) + "_" + std::to_string(k), lat,
          lon_of(ce + std::cos(ang) * rad, lat), spec.tz_offset_s));
    }
  }
  for (std::uint32_t v = 0; v < villages; ++v) {
    add_corridor_route(b, sp, members[v], "village " + std::to_string(v), mode::bus,
                       spec.ride_speed_mps);
    // a second local loop through the village in shuffled order thickens the
    // scheduled base graph relative to the synthesized walk edges
    std::vector<station_id> loop = members[v];
    std::reverse(loop.begin() + 1, loop.end());
    add_corridor_route(b, sp, loop, "village loop " + std::to_string(v), mode::bus,
                       spec.ride_speed_mps);
  }
  std::vector<station_id> intercity;
  for (std::uint32_t v = 0; v < villages; ++v) intercity.push_back(members[v][0]);
  add_corridor_route(b, sp, intercity, "intercity", mode::train, spec.ride_speed_mps * 2.5);
  if (spec.express_stride > 0) {
    // two-level spine: express_stride villages share one regional hub;
    // regional hubs trunk to the first village
    const auto region = spec.express_stride;
    for (std::uint32_t v = 0; v < villages; ++v) {
      const auto hub_village = (v / region) * region;
      if (v == hub_village) continue;
      add_shuttle_hops(b, sp, members[hub_village][0], members[v][0],
                       "spine spoke " + std::to_string(v), mode::train,
                       spec.ride_speed_mps * 3.0);
    }
    for (std::uint32_t r = region; r < villages; r += region) {
      add_shuttle_hops(b, sp, members[0][0], members[r][0],
                       "spine trunk " + std::to_string(r), mode::train,
                       spec.ride_speed_mps * 3.5);
    }
  }
  return b.build();
}

network generate_air_ground(network_builder& b, const schedule_params& sp) {
  const auto& spec = *sp.spec;
  std::mt19937_64 rng(mix64(spec.seed, 0xa17));
  const auto cities = std::max(2u, spec.cities);
  std::vector<station_id> airports;
  std::vector<std::vector<station_id>> city_members(cities);

  for (std::uint32_t c = 0; c < cities; ++c) {
    const double cn = (c / 2) * spec.city_spacing_km * 1000.0;
    const double ce = (c % 2) * spec.city_spacing_km * 1000.0 +
                      (c / 2) * 0.35 * spec.city_spacing_km * 1000.0;
    const double radius = spec.city_radius_km * 1000.0;
    for (std::uint32_t k = 0; k < spec.city_stations; ++k) {
      const double ang = 2.0 * M_PI * (static_cast<double>(rng() % 1000) / 1000.0);
      const double rad = radius * (static_cast<double>(rng() % 1000) / 1000.0);
      const double lat = lat_of(cn + std::sin(ang) * rad);
      city_members[c].push_back(b.add_station(
          "C" + std::to_string(c) + "_" + std::to_string(k), lat,
          lon_of(ce + std::cos(ang) * rad, lat), spec.tz_offset_s));
    }
    const double alat = lat_of(cn + radius * 1.4);
    airports.push_back(b.add_station("C" + std::to_string(c) + "_airport", alat,
                                     lon_of(ce + radius * 1.4, alat), spec.tz_offset_s));
  }

  // ground: geometric edges within each city plus an airport shuttle
  const auto& stations = b.stations();
  for (std::uint32_t c = 0; c < cities; ++c) {
    std::vector<std::pair<station_id, station_id>> edges;
    const auto& mem = city_members[c];
    for (std::size_t i = 0; i < mem.size(); ++i) {
      for (std::size_t j = i + 1; j < mem.size(); ++j) {
        const double d = great_circle_m(stations[mem[i]].lat, stations[mem[i]].lon,
                                        stations[mem[j]].lat, stations[mem[j]].lon);
        if (d <= spec.connect_radius_m) edges.emplace_back(mem[i], mem[j]);
      }
    }
    for (const auto& [i, j] : edges) {
      add_shuttle_hops(b, sp, i, j, "c" + std::to_string(c) + " local", mode::bus,
                       spec.ride_speed_mps);
    }
    // link the airport to the two nearest city stations plus an express
    // from the central hub station
    std::vector<station_id> by_dist = mem;
    const auto ap = airports[c];
    std::sort(by_dist.begin(), by_dist.end(), [&](station_id x, station_id y) {
      const double dx = great_circle_m(stations[ap].lat, stations[ap].lon,
                                       stations[x].lat, stations[x].lon);
      const double dy = great_circle_m(stations[ap].lat, stations[ap].lon,
                                       stations[y].lat, stations[y].lon);
      if (dx != dy) return dx < dy;
      return x < y;
    });
    for (std::size_t k = 0; k < std::min<std::size_t>(2, by_dist.size()); ++k) {
      add_shuttle_hops(b, sp, by_dist[k], ap, "c" + std::to_string(c) + " airport bus",
                       mode::bus, spec.ride_speed_mps);
    }
    if (mem[0] != by_dist[0] && mem[0] != by_dist[std::min<std::size_t>(1, by_dist.size() - 1)]) {
      add_shuttle_hops(b, sp, mem[0], ap, "c" + std::to_string(c) + " airport express",
                       mode::bus, spec.ride_speed_mps * 1.6);
    }
  }

  // planes between all airport pairs, a few departures per day
  for (std::uint32_t a = 0; a < cities; ++a) {
    for (std::uint32_t c = a + 1; c < cities; ++c) {
      generator_spec air = spec;
      air.headway_s = std::max<std::uint32_t>(
          3600, (spec.day_end_s - spec.day_start_s) /
                    std::max(1u, spec.plane_departures_per_day));
      schedule_params asp{&air, sp.day0};
      const double gc = great_circle_m(stations[airports[a]].lat, stations[airports[a]].lon,
                                       stations[airports[c]].lat, stations[airports[c]].lon);
      const auto ride = static_cast<std::uint32_t>(std::llround(gc / 200.0) + 1500);
      for (int dir = 0; dir < 2; ++dir) {
        const auto route = b.allocate_route();
        b.set_route(route, "flight " + std::to_string(a) + "-" + std::to_string(c));
        const auto from = dir == 0 ? airports[a] : airports[c];
        const auto to = dir == 0 ? airports[c] : airports[a];
        const std::uint64_t key = mix64(mix64(route, from), to);
        const auto phase = static_cast<std::uint32_t>(mix64(key, 3) % air.headway_s);
        auto events = hop_departures(asp, key, phase, ride);
        if (!events.empty()) b.add_scheduled_hop(from, to, route, mode::plane, events, gc);
      }
    }
  }

  // intercity trains along the city chain
  for (std::uint32_t c = 0; c + 1 < cities; ++c) {
    add_shuttle_hops(b, sp, city_members[c][0], city_members[c + 1][0],
                     "rail " + std::to_string(c), mode::train, spec.ride_speed_mps * 4.0);
  }
  ensure_connected(b, sp);
  return b.build();
}

}  // namespace

network generate_synthetic(const generator_spec& spec) {
  if (spec.stations == 0) throw validation_error("generator needs stations >= 1");
  if (spec.day_end_s <= spec.day_start_s) {
    throw validation_error("generator needs day_end > day_start");
  }
  network_builder b;
  schedule_params sp{&spec, utc_midnight(parse_yyyymmdd(spec.start_date))};
  if (spec.family == "line") return generate_line(b, sp);
  if (spec.family == "grid") return generate_grid(b, sp);
  if (spec.family == "hub_and_spoke") return generate_hub_and_spoke(b, sp);
  if (spec.family == "random_geometric") return generate_random_geometric(b, sp);
  if (spec.family == "clustered_city") return generate_clustered_city(b, sp);
  if (spec.family == "air_ground") return generate_air_ground(b, sp);
  throw validation_error("unknown generator family: " + spec.family);
}

generator_spec parse_generator_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open generator spec: " + path);
  generator_spec spec;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "family") spec.family = value;
    else if (key == "stations") spec.stations = std::stoul(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else if (key == "spacing_m") spec.spacing_m = std::stod(value);
    else if (key == "area_km") spec.area_km = std::stod(value);
    else if (key == "connect_radius_m") spec.connect_radius_m = std::stod(value);
    else if (key == "headway_s") spec.headway_s = std::stoul(value);
    else if (key == "irregularity") spec.irregularity = std::stod(value);
    else if (key == "duration_jitter") spec.duration_jitter = std::stod(value);
    else if (key == "express_stride") spec.express_stride = std::stoul(value);
    else if (key == "service_days") spec.service_days = std::stoul(value);
    else if (key == "day_start_s") spec.day_start_s = std::stoul(value);
    else if (key == "day_end_s") spec.day_end_s = std::stoul(value);
    else if (key == "ride_speed_mps") spec.ride_speed_mps = std::stod(value);
    else if (key == "dwell_s") spec.dwell_s = std::stoul(value);
    else if (key == "tz_offset_s") spec.tz_offset_s = std::stoi(value);
    else if (key == "villages") spec.villages = std::stoul(value);
    else if (key == "village_size") spec.village_size = std::stoul(value);
    else if (key == "village_spacing_km") spec.village_spacing_km = std::stod(value);
    else if (key == "village_radius_m") spec.village_radius_m = std::stod(value);
    else if (key == "cities") spec.cities = std::stoul(value);
    else if (key == "city_stations") spec.city_stations = std::stoul(value);
    else if (key == "city_radius_km") spec.city_radius_km = std::stod(value);
    else if (key == "city_spacing_km") spec.city_spacing_km = std::stod(value);
    else if (key == "plane_departures_per_day") spec.plane_departures_per_day = std::stoul(value);
    else if (key == "start_date") spec.start_date = value;
    else throw validation_error("unknown generator key: " + key);
  }
  return spec;
}

}  // namespace bbtime
