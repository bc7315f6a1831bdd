#include "bbtime/multimodal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace bbtime {

namespace {

bool walk_hop_exists(const network& net, station_id a, station_id b) {
  for (const auto hid : net.out_hops(a)) {
    const auto& h = net.hops[hid];
    if (h.md == mode::walk && h.to == b) return true;
  }
  return false;
}

route_id next_route_id(const network& net) {
  route_id next = 0;
  for (const auto& [r, info] : net.routes) next = std::max(next, r + 1);
  for (const auto& h : net.hops) next = std::max(next, h.route + 1);
  return next;
}

hop_id append_unscheduled(network& net, station_id from, station_id to, route_id route,
                          mode md, std::int64_t duration_s, double distance_m,
                          double fare = 0.0) {
  hop h;
  h.id = static_cast<hop_id>(net.hops.size());
  h.from = from;
  h.to = to;
  h.route = route;
  h.md = md;
  h.fixed_duration_s = std::max<std::int64_t>(1, duration_s);
  h.route_distance_m = distance_m;
  h.fare_estimate = fare;
  net.hops.push_back(std::move(h));
  return net.hops.back().id;
}

}  // namespace

network add_walk_edges(const network& net, const multimodal_config& cfg) {
  if (cfg.max_walk_pair_m > 2000.0) {
    throw validation_error("max walk pair distance is capped at 2000 m");
  }
  network out = net;
  const auto route = next_route_id(out);
  bool used_route = false;

  spatial_grid grid(cfg.max_walk_pair_m / meters_per_deg_lat, out.stations.size());
  for (const auto& s : out.stations) grid.insert(s.id, s.lat, s.lon);

  for (const auto& s : out.stations) {
    std::vector<station_id> near;
    grid.for_each_near(s.lat, s.lon, cfg.max_walk_pair_m, [&](std::uint32_t other) {
      if (other > s.id) near.push_back(other);
    });
    std::sort(near.begin(), near.end());
    for (const auto other : near) {
      const auto& o = out.stations[other];
      const double gc = great_circle_m(s.lat, s.lon, o.lat, o.lon);
      if (gc > cfg.max_walk_pair_m) continue;
      const double dist = gc * cfg.walk_detour;
      const auto dur = static_cast<std::int64_t>(std::llround(dist / cfg.walk_speed_mps));
      if (!walk_hop_exists(net, s.id, other)) {
        append_unscheduled(out, s.id, other, route, mode::walk, dur, dist);
        used_route = true;
      }
      if (!walk_hop_exists(net, other, s.id)) {
        append_unscheduled(out, other, s.id, route, mode::walk, dur, dist);
        used_route = true;
      }
    }
  }
  if (used_route) out.routes[route] = {"walk", ""};
  out.finalize();
  return out;
}

network add_taxi_edges(const network& net, const multimodal_config& cfg) {
  network out = net;
  const auto route = next_route_id(out);
  bool used_route = false;

  // isolated locations become nodes of their own
  for (const auto& n : cfg.nodes) {
    station s;
    s.id = static_cast<station_id>(out.stations.size());
    s.name = n.name;
    s.lat = n.lat;
    s.lon = n.lon;
    s.cluster = s.id;
    if (!out.stations.empty()) {
      // inherit the rendering offset of the nearest existing station
      const station* nearest = &out.stations[0];
      double best = std::numeric_limits<double>::max();
      for (const auto& other : out.stations) {
        const double d = great_circle_m(n.lat, n.lon, other.lat, other.lon);
        if (d < best) {
          best = d;
          nearest = &other;
        }
      }
      s.tz_offset_s = nearest->tz_offset_s;
    }
    out.stations.push_back(std::move(s));
  }
  // cluster indexes must stay dense after appending stations
  for (auto& s : out.stations) s.cluster = s.id;

  auto add_pair = [&](station_id a, station_id b, std::int64_t dur, double dist,
                      double fare) {
    append_unscheduled(out, a, b, route, mode::taxi, dur, dist, fare);
    append_unscheduled(out, b, a, route, mode::taxi, dur, dist, fare);
    used_route = true;
  };

  for (const auto& p : cfg.pairs) {
    if (p.a >= out.stations.size() || p.b >= out.stations.size() || p.a == p.b) {
      throw validation_error("taxi pair references unknown station");
    }
    const double gc = great_circle_m(out.stations[p.a].lat, out.stations[p.a].lon,
                                     out.stations[p.b].lat, out.stations[p.b].lon);
    add_pair(p.a, p.b, p.duration_s, std::max(gc, gc * cfg.taxi_detour), p.fare_estimate);
  }

  if (cfg.auto_taxi || !cfg.nodes.empty()) {
    // degree after ingest, computed on the input network (appended taxi
    // hops must not mask isolation); appended nodes have degree zero.
    auto degree_of = [&](station_id s) -> std::uint32_t {
      if (s < net.stations.size()) return net.degree(s);
      return 0;
    };

    if (cfg.auto_taxi) {
      std::vector<station_id> airports;
      for (const auto& h : net.hops) {
        if (h.md != mode::plane) continue;
        airports.push_back(h.from);
        airports.push_back(h.to);
      }
      std::sort(airports.begin(), airports.end());
      airports.erase(std::unique(airports.begin(), airports.end()), airports.end());
      for (std::size_t i = 0; i < airports.size(); ++i) {
        for (std::size_t j = i + 1; j < airports.size(); ++j) {
          const auto a = airports[i];
          const auto b = airports[j];
          const double gc = great_circle_m(out.stations[a].lat, out.stations[a].lon,
                                           out.stations[b].lat, out.stations[b].lon);
          if (gc > cfg.airport_taxi_max_m) continue;
          const double dist = gc * cfg.taxi_detour;
          add_pair(a, b, std::llround(dist / cfg.taxi_speed_mps), dist, dist / 1000.0);
        }
      }
    }

    // every station still without service gets a taxi to the nearest
    // connected station
    for (const auto& s : out.stations) {
      if (degree_of(s.id) > 0) continue;
      station_id nearest = invalid_station;
      double best = std::numeric_limits<double>::max();
      for (const auto& other : out.stations) {
        if (other.id == s.id || degree_of(other.id) == 0) continue;
        const double d = great_circle_m(s.lat, s.lon, other.lat, other.lon);
        if (d < best) {
          best = d;
          nearest = other.id;
        }
      }
      if (nearest == invalid_station) continue;
      const double dist = best * cfg.taxi_detour;
      add_pair(s.id, nearest, std::llround(dist / cfg.taxi_speed_mps), dist,
               dist / 1000.0);
    }
  }

  if (used_route) out.routes[route] = {"taxi", ""};
  out.finalize();
  return out;
}

multimodal_config parse_multimodal_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open multimodal config: " + path);
  multimodal_config cfg;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  auto split_csv = [&](const std::string& v) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= v.size()) {
      const auto comma = v.find(',', pos);
      if (comma == std::string::npos) {
        parts.push_back(trim(v.substr(pos)));
        break;
      }
      parts.push_back(trim(v.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    return parts;
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "max_walk_pair_m") cfg.max_walk_pair_m = std::stod(value);
    else if (key == "walk_speed_mps") cfg.walk_speed_mps = std::stod(value);
    else if (key == "walk_detour") cfg.walk_detour = std::stod(value);
    else if (key == "auto_taxi") cfg.auto_taxi = value == "1" || value == "true";
    else if (key == "taxi_speed_mps") cfg.taxi_speed_mps = std::stod(value);
    else if (key == "taxi_detour") cfg.taxi_detour = std::stod(value);
    else if (key == "airport_taxi_max_m") cfg.airport_taxi_max_m = std::stod(value);
    else if (key == "taxi_pair") {
      const auto p = split_csv(value);
      if (p.size() != 4) throw validation_error("taxi_pair wants a,b,duration_s,fare");
      cfg.pairs.push_back({static_cast<station_id>(std::stoul(p[0])),
                           static_cast<station_id>(std::stoul(p[1])), std::stoll(p[2]),
                           std::stod(p[3])});
    } else if (key == "taxi_node") {
      const auto p = split_csv(value);
      if (p.size() != 3) throw validation_error("taxi_node wants name,lat,lon");
      cfg.nodes.push_back({p[0], std::stod(p[1]), std::stod(p[2])});
    } else {
      throw validation_error("unknown multimodal config key: " + key);
    }
  }
  return cfg;
}

}  // namespace bbtime
