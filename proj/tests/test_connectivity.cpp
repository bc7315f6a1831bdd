#include "doctest.h"

#include "bbtime/connectivity.hpp"
#include "testlib/fixtures.hpp"
#include "testlib/oracle.hpp"

using namespace bbtime;

namespace {

network line_abc() {
  network_builder b;
  const auto a = b.add_station("a", 46.0, 8.0);
  const auto c = b.add_station("b", 46.0, 8.1);
  const auto d = b.add_station("c", 46.0, 8.2);
  b.add_scheduled_hop(a, c, 0, mode::bus, {{0, 60}});
  b.add_scheduled_hop(c, d, 1, mode::bus, {{100, 60}});
  return b.build();
}

}  // namespace

TEST_CASE("profile of a line: levels count boardings minus one") {
  const auto net = line_abc();
  const auto p = profile_search(net, 0);
  CHECK(p.reachable_count == 2);
  REQUIRE(p.min_transfers_histogram.size() == 2);
  CHECK(p.min_transfers_histogram[0] == 1);  // b at zero transfers
  CHECK(p.min_transfers_histogram[1] == 1);  // c at one transfer
  CHECK(p.reachable_count ==
        p.min_transfers_histogram[0] + p.min_transfers_histogram[1]);
}

TEST_CASE("disconnected stations are absent from the profile") {
  network_builder b;
  const auto a = b.add_station("a", 46.0, 8.0);
  const auto c = b.add_station("b", 46.0, 8.1);
  b.add_station("island", 47.0, 9.0);
  b.add_scheduled_hop(a, c, 0, mode::bus, {{0, 60}});
  const auto net = b.build();
  const auto p = profile_search(net, 0);
  CHECK(p.reachable_count == 1);
}

TEST_CASE("walk edges are free within a level") {
  network_builder b;
  const auto a = b.add_station("a", 46.0, 8.0);
  const auto c = b.add_station("b", 46.0, 8.01);
  const auto d = b.add_station("c", 46.0, 8.02);
  b.add_scheduled_hop(a, c, 0, mode::bus, {{0, 60}});
  b.add_unscheduled_hop(c, d, 1, mode::walk, 300);
  const auto net = b.build();
  const auto p = profile_search(net, 0);
  REQUIRE(p.min_transfers_histogram.size() == 1);
  CHECK(p.min_transfers_histogram[0] == 2);  // both reached with one boarding
}

TEST_CASE("profiles match the independent transfer oracle on fixtures") {
  for (const auto& name : {"grid", "random_geometric"}) {
    const auto net = testing::family_network(name);
    for (std::uint32_t origin = 0; origin < net.node_count(); origin += 7) {
      const auto dist = min_boardings_from(net, origin);
      const auto oracle = testing::oracle_min_transfers(net, origin);
      for (std::uint32_t v = 0; v < net.node_count(); ++v) {
        if (v == origin) continue;
        if (oracle[v] < 0) {
          CHECK(dist[v] == unreachable_level);
        } else {
          REQUIRE(dist[v] != unreachable_level);
          const int transfers = dist[v] > 0 ? dist[v] - 1 : 0;
          CHECK(transfers == oracle[v]);
        }
      }
    }
  }
}

TEST_CASE("mesh bounds never exceed exact minimum transfers") {
  const auto net = testing::family_network("random_geometric");
  const auto mesh = build_mesh_table(net, 0.5);
  for (std::uint32_t origin = 0; origin < net.node_count(); ++origin) {
    const auto oracle = testing::oracle_min_transfers(net, origin);
    for (std::uint32_t v = 0; v < net.node_count(); ++v) {
      if (v == origin || oracle[v] < 0) continue;
      const auto bound = mesh.lookup(net.stations[origin].lat, net.stations[origin].lon,
                                     net.stations[v].lat, net.stations[v].lon);
      REQUIRE(bound.has_value());
      CHECK(*bound <= oracle[v]);
    }
  }
}

TEST_CASE("all stations in one cell collapse to one entry") {
  const auto net = line_abc();
  const auto mesh = build_mesh_table(net, 5.0);
  CHECK(mesh.size() == 1);
  const auto bound = mesh.lookup(46.0, 8.0, 46.0, 8.2);
  REQUIRE(bound);
  CHECK(*bound == 0);
}

TEST_CASE("coarser meshes only lower bounds") {
  const auto net = testing::family_network("grid");
  const auto fine = build_mesh_table(net, 0.002);
  const auto coarse = build_mesh_table(net, 1.0);
  for (const auto& a : net.stations) {
    for (const auto& b : net.stations) {
      if (a.id == b.id) continue;
      const auto bf = fine.lookup(a.lat, a.lon, b.lat, b.lon);
      const auto bc = coarse.lookup(a.lat, a.lon, b.lat, b.lon);
      if (bf && bc) CHECK(*bc <= *bf);
    }
  }
}

TEST_CASE("per-origin search cost scales with the hop count") {
  // a node pops at most once per distance improvement; relaxations stay
  // proportional to hops
  for (const auto& name : {"grid", "random_geometric"}) {
    const auto net = testing::family_network(name);
    bfs_stats stats;
    min_boardings_from(net, 0, &stats);
    CHECK(stats.edges_relaxed <= 4 * net.hop_count());
    CHECK(stats.nodes_popped <= 4 * net.node_count());
  }
}

TEST_CASE("minimum transfers are symmetric on bidirectional fixtures") {
  const auto net = testing::family_network("grid");  // every hop has a mirror
  for (std::uint32_t a = 0; a < net.node_count(); a += 5) {
    const auto from_a = min_boardings_from(net, a);
    for (std::uint32_t b = 0; b < net.node_count(); b += 3) {
      if (a == b) continue;
      const auto from_b = min_boardings_from(net, b);
      CHECK(from_a[b] == from_b[a]);
    }
  }
}

TEST_CASE("connectivity report lists components deterministically") {
  network_builder b;
  const auto a = b.add_station("mainland a", 46.0, 8.0);
  const auto c = b.add_station("mainland b", 46.0, 8.1);
  const auto i1 = b.add_station("island x", 47.0, 9.0);
  const auto i2 = b.add_station("island y", 47.0, 9.1);
  b.add_scheduled_hop(a, c, 0, mode::bus, {{0, 60}});
  b.add_scheduled_hop(i1, i2, 1, mode::bus, {{0, 60}});
  const auto net = b.build();
  const auto report = connectivity_report(net);
  CHECK(report.find("components: 2") != std::string::npos);
  CHECK(report.find("island x") != std::string::npos);
  CHECK(report == connectivity_report(net));

  const auto one = connectivity_report(line_abc());
  CHECK(one.find("components: 1") != std::string::npos);
}
