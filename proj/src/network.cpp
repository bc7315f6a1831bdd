#include "bbtime/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bbtime {

const char* mode_name(mode m) {
  switch (m) {
    case mode::bus: return "bus";
    case mode::train: return "train";
    case mode::plane: return "plane";
    case mode::walk: return "walk";
    case mode::taxi: return "taxi";
    case mode::bicycle: return "bicycle";
  }
  return "?";
}

bool mode_from_name(const std::string& s, mode& out) {
  for (const mode m : {mode::bus, mode::train, mode::plane, mode::walk,
                       mode::taxi, mode::bicycle}) {
    if (s == mode_name(m)) {
      out = m;
      return true;
    }
  }
  return false;
}

void network::finalize() {
  const auto n = stations.size();
  out_hops_.assign(n, {});
  in_hops_.assign(n, {});
  min_duration_.assign(hops.size(), 0);

  horizon_begin = std::numeric_limits<utc_seconds>::max();
  horizon_end = std::numeric_limits<utc_seconds>::min();
  bool any_event = false;

  for (const auto& h : hops) {
    if (h.from == h.to) throw validation_error("hop with identical endpoints");
    if (h.from >= n || h.to >= n) throw validation_error("hop references unknown station");
    if (h.scheduled() && h.departures.empty()) {
      throw validation_error("scheduled hop with zero events");
    }
    out_hops_[h.from].push_back(h.id);
    in_hops_[h.to].push_back(h.id);
    if (h.scheduled()) {
      min_duration_[h.id] = h.departures.min_duration();
      horizon_begin = std::min(horizon_begin, h.departures.first_departure());
      horizon_end = std::max(horizon_end, h.departures.last_arrival());
      any_event = true;
    } else {
      min_duration_[h.id] = static_cast<std::uint32_t>(h.fixed_duration_s);
    }
  }
  if (!any_event) {
    horizon_begin = 0;
    horizon_end = 0;
  }
  for (auto& v : out_hops_) std::sort(v.begin(), v.end());
  for (auto& v : in_hops_) std::sort(v.begin(), v.end());

  // Cluster view. Cluster ids are expected dense; stations default to
  // singleton clusters in station order.
  std::uint32_t max_cluster = 0;
  for (const auto& s : stations) max_cluster = std::max(max_cluster, s.cluster);
  const std::uint32_t nodes = stations.empty() ? 0 : max_cluster + 1;
  node_members_.assign(nodes, {});
  for (const auto& s : stations) node_members_[s.cluster].push_back(s.id);

  node_rep_.assign(nodes, invalid_station);
  node_out_.assign(nodes, {});
  node_in_.assign(nodes, {});
  for (std::uint32_t c = 0; c < nodes; ++c) {
    if (node_members_[c].empty()) throw validation_error("empty cluster index");
    station_id rep = node_members_[c][0];
    for (const auto s : node_members_[c]) {
      if (degree(s) > degree(rep)) rep = s;
    }
    node_rep_[c] = rep;
    for (const auto s : node_members_[c]) {
      for (const auto h : out_hops_[s]) node_out_[c].push_back(h);
      for (const auto h : in_hops_[s]) node_in_[c].push_back(h);
    }
    std::sort(node_out_[c].begin(), node_out_[c].end());
    std::sort(node_in_[c].begin(), node_in_[c].end());
  }
}

std::optional<event> network::next_event_at_or_after(hop_id h, utc_seconds t) const {
  const auto& hp = hops[h];
  if (!hp.scheduled()) throw validation_error("next_event_at_or_after on unscheduled hop");
  auto e = hp.departures.at_or_after(t);
  if (e) e->hop = h;
  return e;
}

std::optional<event> network::event_by_ordinal(hop_id h, std::uint32_t ordinal) const {
  const auto& hp = hops[h];
  if (!hp.scheduled()) return std::nullopt;
  auto e = hp.departures.by_ordinal(ordinal);
  if (e) e->hop = h;
  return e;
}

std::vector<event> network::events_in_window(hop_id h, utc_seconds t0,
                                             utc_seconds t1) const {
  std::vector<event> out;
  const auto& hp = hops[h];
  if (!hp.scheduled()) return out;
  hp.departures.for_each_in_window(t0, t1, [&](const event& e) {
    out.push_back(e);
    out.back().hop = h;
  });
  return out;
}

std::uint32_t network::min_transfer_s(station_id at, mode arriving, mode departing) const {
  const auto it = transfer_override_s.find(at);
  if (it != transfer_override_s.end()) return it->second;
  if (arriving == mode::plane || departing == mode::plane) return air_transfer_s;
  if (is_unscheduled_mode(departing)) return 0;
  return default_transfer_s;
}

double network::displacement_walk_m(station_id a, station_id b) const {
  if (a == b) return 0.0;
  return great_circle_m(station_point(a), station_point(b)) * cluster_walk_detour;
}

std::uint32_t network::displacement_walk_s(station_id a, station_id b) const {
  if (a == b) return 0;
  return static_cast<std::uint32_t>(
      std::llround(displacement_walk_m(a, b) / cluster_walk_speed_mps));
}

station_id network_builder::add_station(std::string name, double lat, double lon,
                                        std::int32_t tz_offset_s) {
  if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    throw validation_error("station coordinates out of range: " + name);
  }
  const auto id = static_cast<station_id>(net_.stations.size());
  net_.stations.push_back({id, std::move(name), lat, lon, tz_offset_s, id});
  return id;
}

double network_builder::default_distance(station_id a, station_id b) const {
  return great_circle_m(net_.stations[a].lat, net_.stations[a].lon,
                        net_.stations[b].lat, net_.stations[b].lon);
}

hop_id network_builder::add_scheduled_hop(station_id from, station_id to,
                                          route_id route, mode md,
                                          const std::vector<raw_event>& events,
                                          double route_distance_m) {
  if (from == to) throw validation_error("hop endpoints must differ");
  const auto id = static_cast<hop_id>(net_.hops.size());
  const double gc = default_distance(from, to);
  hop h;
  h.id = id;
  h.from = from;
  h.to = to;
  h.route = route;
  h.md = md;
  h.departures = departure_list::encode(events);
  h.route_distance_m = std::max(route_distance_m, gc);
  net_.hops.push_back(std::move(h));
  return id;
}

hop_id network_builder::add_unscheduled_hop(station_id from, station_id to,
                                            route_id route, mode md,
                                            std::int64_t duration_s,
                                            double route_distance_m,
                                            double fare_estimate) {
  if (from == to) throw validation_error("hop endpoints must differ");
  if (duration_s <= 0) throw validation_error("unscheduled hop needs positive duration");
  const auto id = static_cast<hop_id>(net_.hops.size());
  const double gc = default_distance(from, to);
  hop h;
  h.id = id;
  h.from = from;
  h.to = to;
  h.route = route;
  h.md = md;
  h.fixed_duration_s = duration_s;
  h.route_distance_m = std::max(route_distance_m, gc);
  h.fare_estimate = fare_estimate;
  net_.hops.push_back(std::move(h));
  return id;
}

void network_builder::set_route(route_id r, std::string label, std::string agency) {
  net_.routes[r] = {std::move(label), std::move(agency)};
  if (r >= next_route_) next_route_ = r + 1;
}

route_id network_builder::allocate_route() { return next_route_++; }

void network_builder::set_transfer_override(station_id s, std::uint32_t seconds) {
  net_.transfer_override_s[s] = seconds;
}

network network_builder::build() {
  network out = std::move(net_);
  net_ = network{};
  out.finalize();
  return out;
}

namespace {

struct union_find {
  std::vector<std::uint32_t> parent;
  explicit union_find(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

network cluster_stations(const network& net, double radius_m) {
  network out = net;
  const auto n = out.stations.size();
  union_find uf(n);
  if (radius_m > 0.0 && n > 1) {
    spatial_grid grid(radius_m / meters_per_deg_lat, n);
    for (const auto& s : out.stations) grid.insert(s.id, s.lat, s.lon);
    for (const auto& s : out.stations) {
      grid.for_each_near(s.lat, s.lon, radius_m, [&](std::uint32_t other) {
        if (other <= s.id) return;
        if (great_circle_m(s.lat, s.lon, out.stations[other].lat,
                           out.stations[other].lon) <= radius_m) {
          uf.unite(s.id, other);
        }
      });
    }
  }
  // Dense cluster ids in order of the smallest member station id.
  std::unordered_map<std::uint32_t, std::uint32_t> root_to_cluster;
  std::uint32_t next = 0;
  for (station_id s = 0; s < n; ++s) {
    const auto root = uf.find(s);
    auto [it, inserted] = root_to_cluster.try_emplace(root, next);
    if (inserted) ++next;
    out.stations[s].cluster = it->second;
  }
  out.finalize();
  return out;
}

}  // namespace bbtime
