#include "bbtime/connectivity.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace bbtime {

namespace {

std::vector<std::uint16_t> zero_one_bfs(const network& net, std::uint32_t start,
                                        bool reverse, bfs_stats* stats) {
  const auto n = net.node_count();
  std::vector<std::uint16_t> dist(n, unreachable_level);
  std::deque<std::uint32_t> dq;
  dist[start] = 0;
  dq.push_back(start);
  while (!dq.empty()) {
    const auto cur = dq.front();
    dq.pop_front();
    if (stats) ++stats->nodes_popped;
    const auto d = dist[cur];
    const auto& edges = reverse ? net.node_in_hops(cur) : net.node_out_hops(cur);
    for (const auto hid : edges) {
      if (stats) ++stats->edges_relaxed;
      const auto& h = net.hops[hid];
      const auto nxt = net.node_of(reverse ? h.from : h.to);
      const std::uint16_t w = h.scheduled() ? 1 : 0;
      const auto nd = static_cast<std::uint16_t>(d + w);
      if (nd < dist[nxt]) {
        dist[nxt] = nd;
        if (w == 0) {
          dq.push_front(nxt);
        } else {
          dq.push_back(nxt);
        }
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<std::uint16_t> min_boardings_from(const network& net, std::uint32_t origin,
                                              bfs_stats* stats) {
  return zero_one_bfs(net, origin, false, stats);
}

std::vector<std::uint16_t> min_boardings_to(const network& net, std::uint32_t target) {
  return zero_one_bfs(net, target, true, nullptr);
}

reach_profile profile_search(const network& net, std::uint32_t origin) {
  reach_profile p;
  p.origin = origin;
  const auto dist = min_boardings_from(net, origin);
  for (std::uint32_t v = 0; v < dist.size(); ++v) {
    if (v == origin || dist[v] == unreachable_level) continue;
    // transfers = boardings - 1; pure-walk reachability still lands in
    // bucket zero.
    const std::uint32_t transfers = dist[v] > 0 ? dist[v] - 1u : 0u;
    if (transfers >= p.min_transfers_histogram.size()) {
      p.min_transfers_histogram.resize(transfers + 1, 0);
    }
    ++p.min_transfers_histogram[transfers];
    ++p.reachable_count;
  }
  return p;
}

mesh_table build_mesh_table(const network& net, double cell_deg) {
  mesh_table table(cell_deg);
  const auto nodes = net.node_count();
  // every member station's cell counts: lookups key on true station
  // coordinates, and a cluster may straddle a cell boundary
  std::vector<std::vector<std::uint32_t>> cells_of(nodes);
  for (std::uint32_t v = 0; v < nodes; ++v) {
    for (const auto s : net.node_stations(v)) {
      const auto cell = mesh_cell(net.stations[s].lat, net.stations[s].lon, cell_deg);
      auto& cells = cells_of[v];
      if (std::find(cells.begin(), cells.end(), cell) == cells.end()) {
        cells.push_back(cell);
      }
    }
  }
  for (std::uint32_t origin = 0; origin < nodes; ++origin) {
    const auto dist = min_boardings_from(net, origin);
    for (std::uint32_t v = 0; v < nodes; ++v) {
      if (v == origin || dist[v] == unreachable_level) continue;
      const std::uint16_t transfers = dist[v] > 0 ? dist[v] - 1 : 0;
      for (const auto ca : cells_of[origin]) {
        for (const auto cb : cells_of[v]) table.fold_min(ca, cb, transfers);
      }
    }
  }
  return table;
}

std::string connectivity_report(const network& net) {
  const auto nodes = net.node_count();
  std::vector<std::uint32_t> component(nodes, nodes);
  std::uint32_t component_count = 0;

  // Weakly connected components over the undirected view.
  for (std::uint32_t s = 0; s < nodes; ++s) {
    if (component[s] != nodes) continue;
    const auto cid = component_count++;
    std::vector<std::uint32_t> stack{s};
    component[s] = cid;
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      auto visit = [&](std::uint32_t nxt) {
        if (component[nxt] == nodes) {
          component[nxt] = cid;
          stack.push_back(nxt);
        }
      };
      for (const auto hid : net.node_out_hops(cur)) visit(net.node_of(net.hops[hid].to));
      for (const auto hid : net.node_in_hops(cur)) visit(net.node_of(net.hops[hid].from));
    }
  }

  std::vector<std::vector<std::uint32_t>> members(component_count);
  for (std::uint32_t v = 0; v < nodes; ++v) members[component[v]].push_back(v);

  std::uint64_t reachable_pairs = 0;
  std::vector<std::uint64_t> histogram;
  for (std::uint32_t origin = 0; origin < nodes; ++origin) {
    const auto p = profile_search(net, origin);
    reachable_pairs += p.reachable_count;
    if (p.min_transfers_histogram.size() > histogram.size()) {
      histogram.resize(p.min_transfers_histogram.size(), 0);
    }
    for (std::size_t i = 0; i < p.min_transfers_histogram.size(); ++i) {
      histogram[i] += p.min_transfers_histogram[i];
    }
  }
  const std::uint64_t total_pairs =
      nodes > 1 ? static_cast<std::uint64_t>(nodes) * (nodes - 1) : 0;

  std::ostringstream os;
  os << "connectivity report\n";
  os << "  stations: " << net.station_count() << "\n";
  if (net.clustered()) os << "  nodes (clusters): " << nodes << "\n";
  os << "  components: " << component_count << "\n";
  for (std::uint32_t c = 0; c < component_count; ++c) {
    os << "    component " << c << ": " << members[c].size() << " node(s)";
    if (members[c].size() <= 8) {
      os << " [";
      for (std::size_t i = 0; i < members[c].size(); ++i) {
        if (i) os << " ";
        os << net.stations[net.node_representative(members[c][i])].name;
      }
      os << "]";
    }
    os << "\n";
  }
  os << "  directed pairs reachable: " << reachable_pairs << " / " << total_pairs << "\n";
  if (total_pairs > reachable_pairs) {
    os << "  unreachable pairs: " << (total_pairs - reachable_pairs) << "\n";
  }
  os << "  min-transfer histogram (pairs per transfer count):\n";
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    os << "    T=" << i << ": " << histogram[i] << "\n";
  }
  return os.str();
}

}  // namespace bbtime
