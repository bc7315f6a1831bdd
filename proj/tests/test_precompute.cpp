#include <random>

#include "doctest.h"

#include "bbtime/triplets.hpp"
#include "testlib/fixtures.hpp"
#include "testlib/oracle.hpp"

using namespace bbtime;

namespace {

// A -> B -> C with explicit event lists and a 10 s transfer override at B.
network chain_net(std::vector<raw_event> leg1, std::vector<raw_event> leg2,
                  std::uint32_t transfer_at_b = 10) {
  network_builder b;
  const auto a = b.add_station("a", 46.0, 8.00);
  const auto m = b.add_station("b", 46.0, 8.05);
  const auto c = b.add_station("c", 46.0, 8.10);
  b.set_transfer_override(m, transfer_at_b);
  b.add_scheduled_hop(a, m, 0, mode::bus, leg1);
  b.add_scheduled_hop(m, c, 1, mode::bus, leg2);
  return b.build();
}

estimator_config quick_cfg(const network& net, std::uint64_t seed = 1) {
  estimator_config cfg;
  cfg.rng_seed = seed;
  cfg.horizon_start = net.horizon_begin;
  return cfg;
}

}  // namespace

TEST_CASE("min_trip_time chains a single feasible combination") {
  const auto net = chain_net({{100, 50}}, {{180, 30}});
  const auto r = min_trip_time(net, std::vector<hop_id>{0, 1}, 0, 86400);
  REQUIRE(r);
  CHECK(r->board == 100);
  CHECK(r->arrive == 210);
}

TEST_CASE("min_trip_time respects the minimum transfer") {
  const auto net = chain_net({{100, 50}}, {{155, 30}});
  CHECK(!min_trip_time(net, std::vector<hop_id>{0, 1}, 0, 86400));
}

TEST_CASE("min_trip_time rejects disconnected sequences") {
  network_builder b;
  const auto a = b.add_station("a", 46, 8.0);
  const auto c = b.add_station("b", 46, 8.1);
  const auto d = b.add_station("c", 46, 8.2);
  const auto e = b.add_station("d", 46, 8.3);
  b.add_scheduled_hop(a, c, 0, mode::bus, {{0, 60}});
  b.add_scheduled_hop(d, e, 1, mode::bus, {{100, 60}});
  const auto net = b.build();
  CHECK_THROWS_AS(min_trip_time(net, std::vector<hop_id>{0, 1}, 0, 86400),
                  validation_error);
}

TEST_CASE("forward chaining matches the brute-force combination oracle") {
  std::mt19937_64 rng(515);
  for (int round = 0; round < 60; ++round) {
    auto gen_leg = [&](utc_seconds base) {
      std::vector<raw_event> events;
      utc_seconds t = base;
      const int n = 2 + static_cast<int>(rng() % 6);
      for (int i = 0; i < n; ++i) {
        t += 60 + static_cast<utc_seconds>(rng() % 1800);
        events.emplace_back(t, 120 + static_cast<std::uint32_t>(rng() % 1800));
      }
      return events;
    };
    network_builder b;
    const auto s0 = b.add_station("s0", 46.0, 8.00);
    const auto s1 = b.add_station("s1", 46.0, 8.05);
    const auto s2 = b.add_station("s2", 46.0, 8.10);
    const auto s3 = b.add_station("s3", 46.0, 8.15);
    b.set_transfer_override(s1, static_cast<std::uint32_t>(rng() % 600));
    b.set_transfer_override(s2, static_cast<std::uint32_t>(rng() % 600));
    b.add_scheduled_hop(s0, s1, 0, mode::bus, gen_leg(0));
    b.add_scheduled_hop(s1, s2, 1, mode::bus, gen_leg(0));
    b.add_scheduled_hop(s2, s3, 2, mode::bus, gen_leg(0));
    const auto net = b.build();
    const std::vector<hop_id> legs{0, 1, 2};
    const auto t_dep = static_cast<utc_seconds>(rng() % 2000);

    const auto greedy = min_trip_time(net, legs, t_dep, 86400);
    const auto brute = testing::oracle_min_trip_bruteforce(net, legs, t_dep, 86400);
    REQUIRE(greedy.has_value() == brute.has_value());
    if (greedy) {
      // earliest-arrival objective: forward-greedy chaining is exact on it
      CHECK(greedy->arrive == brute->arrive);
      CHECK(greedy->board <= brute->board);
    }
  }
}

TEST_CASE("constant hourly service has a seed-independent typical time") {
  std::vector<raw_event> leg;
  for (int d = 0; d < 14; ++d) {
    for (int h = 0; h < 24; ++h) leg.emplace_back(d * 86400 + h * 3600, 600);
  }
  network_builder b;
  const auto a = b.add_station("a", 46, 8.0);
  const auto c = b.add_station("b", 46, 8.1);
  b.add_scheduled_hop(a, c, 0, mode::bus, leg);
  const auto net = b.build();
  for (const std::uint64_t seed : {1ull, 7ull, 99ull}) {
    const auto r = estimate_typical_time(net, std::vector<hop_id>{0}, quick_cfg(net, seed));
    REQUIRE(r);
    CHECK(r->typical_s == 600);
    CHECK(r->min_s == 600);
  }
}

TEST_CASE("aligned two-leg service yields the deterministic sum") {
  // legs depart hourly; the second leaves 2700 s after the first arrives,
  // so every sample is 1800 + 900 + 1800
  std::vector<raw_event> leg1, leg2;
  for (int d = 0; d < 14; ++d) {
    for (int h = 0; h < 24; ++h) {
      leg1.emplace_back(d * 86400 + h * 3600, 1800);
      leg2.emplace_back(d * 86400 + h * 3600 + 2700, 1800);
    }
  }
  const auto net = chain_net(leg1, leg2, 300);
  const auto r = estimate_typical_time(net, std::vector<hop_id>{0, 1}, quick_cfg(net));
  REQUIRE(r);
  CHECK(r->typical_s == 4500);
  CHECK(r->min_s == 4500);
}

TEST_CASE("estimator equals the from-scratch oracle, sparse second leg") {
  // second leg runs mondays only: most samples chain across several days
  std::vector<raw_event> leg1, leg2;
  for (int d = 0; d < 14; ++d) {
    for (int h = 6; h < 22; ++h) leg1.emplace_back(d * 86400 + h * 3600, 1500);
  }
  leg2.emplace_back(0 * 86400 + 12 * 3600, 7200);
  leg2.emplace_back(7 * 86400 + 12 * 3600, 7200);
  const auto net = chain_net(leg1, leg2, 300);
  const std::vector<hop_id> legs{0, 1};
  for (const std::uint64_t seed : {3ull, 17ull, 2026ull}) {
    auto cfg = quick_cfg(net, seed);
    const auto engine = estimate_typical_time(net, legs, cfg);
    const auto oracle = testing::oracle_estimate(net, legs, cfg);
    REQUIRE(engine.has_value() == oracle.has_value());
    if (engine) {
      CHECK(engine->typical_s == oracle->typical_s);
      CHECK(engine->min_s == oracle->min_s);
    }
  }
}

TEST_CASE("estimator equality over random leg sequences") {
  std::mt19937_64 rng(808);
  const auto net = testing::family_network("grid");
  int checked = 0;
  while (checked < 40) {
    // random 1-3 leg connected path over scheduled hops
    const auto start = static_cast<station_id>(rng() % net.station_count());
    std::vector<hop_id> legs;
    auto cur = start;
    const int want = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < want; ++i) {
      const auto& outs = net.out_hops(cur);
      if (outs.empty()) break;
      const auto h = outs[rng() % outs.size()];
      if (!net.hops[h].scheduled()) break;
      legs.push_back(h);
      cur = net.hops[h].to;
    }
    if (legs.empty()) continue;
    ++checked;
    auto cfg = quick_cfg(net, mix64(909, checked));
    const auto engine = estimate_typical_time(net, legs, cfg);
    const auto oracle = testing::oracle_estimate(net, legs, cfg);
    REQUIRE(engine.has_value() == oracle.has_value());
    if (engine) {
      CHECK(engine->typical_s == oracle->typical_s);
      CHECK(engine->min_s == oracle->min_s);
    }
  }
}

TEST_CASE("estimator needs a minimum sample count") {
  const auto net = chain_net({{100, 50}}, {{180, 30}});
  auto cfg = quick_cfg(net);
  cfg.sample_count = 4;
  CHECK_THROWS_AS(estimate_typical_time(net, std::vector<hop_id>{0}, cfg),
                  validation_error);
}

TEST_CASE("direct matrix entries") {
  network_builder b;
  const auto a = b.add_station("a", 46, 8.0);
  const auto c = b.add_station("b", 46, 8.1);
  const auto d = b.add_station("c", 46, 8.2);
  std::vector<raw_event> constant;
  for (int i = 0; i < 200; ++i) constant.emplace_back(i * 3600, 600);
  b.add_scheduled_hop(a, c, 0, mode::bus, constant);
  b.add_unscheduled_hop(a, c, 1, mode::walk, 840);
  (void)d;  // no hop to d
  const auto net = b.build();

  precompute_config cfg;
  cfg.est = quick_cfg(net);
  triplet_store store;
  build_direct_matrix(net, cfg, store);

  const auto* ac = store.find(0, 0, 1);
  REQUIRE(ac);
  CHECK(ac->size() == 2);  // one entry per distinct hop
  for (const auto& tp : *ac) {
    if (tp.hop_seq[0] == 0) {
      CHECK(tp.typical_s == 600);
      CHECK(tp.min_s == 600);
    } else {
      CHECK(tp.typical_s == 840);
    }
  }
  CHECK(store.find(0, 0, 2) == nullptr);  // sparse
  CHECK(store.find(0, 1, 0) == nullptr);
}

TEST_CASE("mixed-duration hop: typical equals the oracle's sample average") {
  std::vector<raw_event> events;
  for (int d = 0; d < 14; ++d) {
    for (int h = 0; h < 24; ++h) {
      events.emplace_back(d * 86400 + h * 3600, h % 2 == 0 ? 600 : 900);
    }
  }
  network_builder b;
  const auto a = b.add_station("a", 46, 8.0);
  const auto c = b.add_station("b", 46, 8.1);
  b.add_scheduled_hop(a, c, 0, mode::bus, events);
  const auto net = b.build();
  const auto cfg = quick_cfg(net, 31);
  const auto engine = estimate_typical_time(net, std::vector<hop_id>{0}, cfg);
  const auto oracle = testing::oracle_estimate(net, std::vector<hop_id>{0}, cfg);
  REQUIRE(engine);
  CHECK(engine->typical_s == oracle->typical_s);
  CHECK(engine->min_s == 600);
}

TEST_CASE("line network produces the unique T=1 path and no T=2") {
  network_builder b;
  const auto a = b.add_station("a", 46, 8.0);
  const auto m = b.add_station("b", 46, 8.1);
  const auto c = b.add_station("c", 46, 8.2);
  std::vector<raw_event> ev;
  for (int i = 0; i < 100; ++i) ev.emplace_back(i * 3600, 900);
  std::vector<raw_event> ev2;
  for (int i = 0; i < 100; ++i) ev2.emplace_back(i * 3600 + 1800, 900);
  b.add_scheduled_hop(a, m, 0, mode::bus, ev);
  b.add_scheduled_hop(m, c, 1, mode::bus, ev2);
  const auto net = b.build();
  const auto store = testing::build_store(net, geo_gate::disabled());
  const auto* t1 = store.find(1, 0, 2);
  REQUIRE(t1);
  REQUIRE(t1->size() == 1);
  CHECK((*t1)[0].vias == std::vector<std::uint32_t>{1});
  CHECK((*t1)[0].hop_seq == std::vector<hop_id>{0, 1});
  CHECK(store.pair_count(2) == 0);
}

TEST_CASE("diamond ordering follows typical time") {
  const auto net = testing::diamond_network();
  const auto store = testing::build_store(net, geo_gate::disabled());
  const auto* cell = store.find(1, 0, 3);
  REQUIRE(cell);
  REQUIRE(cell->size() == 2);
  CHECK((*cell)[0].vias == std::vector<std::uint32_t>{1});  // via Bravo is faster
  CHECK((*cell)[1].vias == std::vector<std::uint32_t>{2});
  CHECK((*cell)[0].typical_s <= (*cell)[1].typical_s);
}

TEST_CASE("per-pair caps grow with endpoint degree and clamp at 16") {
  network_builder b;
  const auto hub = b.add_station("hub", 46, 8.0);
  std::vector<raw_event> ev{{0, 300}, {600, 300}, {1200, 300}};
  for (int i = 0; i < 2048; ++i) {
    const auto s = b.add_station("s" + std::to_string(i), 46.0 + 0.001 * (i + 1), 8.0);
    b.add_scheduled_hop(hub, s, i * 2, mode::bus, ev);
    b.add_scheduled_hop(s, hub, i * 2 + 1, mode::bus, ev);
  }
  const auto net = b.build();
  CHECK(triplet_store::pair_cap(net, 0, 1) == 16);     // degree 4096 clamps
  CHECK(triplet_store::pair_cap(net, 1, 2) == 4 + 1);  // spoke degree 2
}

TEST_CASE("stored fragments satisfy the lower-bound and ordering invariants") {
  const auto net = testing::family_network("grid");
  const auto store = testing::build_store(net, geo_gate{});
  for (int t = 0; t <= 2; ++t) {
    store.for_each_cell(t, [&](std::uint32_t dep, std::uint32_t arr,
                               const std::vector<triplet>& cell) {
      (void)dep;
      (void)arr;
      std::int64_t prev = std::numeric_limits<std::int64_t>::min();
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const auto& tp = cell[i];
        CHECK(tp.typical_s >= prev);
        prev = tp.typical_s;
        CHECK(tp.min_s <= tp.typical_s);
        // typical >= sum of min durations and transfer slacks
        std::int64_t lb = 0;
        for (std::size_t k = 0; k < tp.hop_seq.size(); ++k) {
          lb += net.min_duration(tp.hop_seq[k]);
          if (k > 0) {
            const auto& prev_hop = net.hops[tp.hop_seq[k - 1]];
            lb += net.min_transfer_s(prev_hop.to, prev_hop.md,
                                     net.hops[tp.hop_seq[k]].md);
          }
        }
        CHECK(tp.typical_s >= lb);
        for (std::size_t j = i + 1; j < cell.size(); ++j) {
          CHECK(cell[j].hop_seq != tp.hop_seq);
        }
      }
    });
  }
}

TEST_CASE("adding departures never worsens the typical time") {
  std::vector<raw_event> sparse, dense;
  for (int d = 0; d < 14; ++d) {
    for (int h = 0; h < 24; h += 4) sparse.emplace_back(d * 86400 + h * 3600, 1200);
    for (int h = 0; h < 24; h += 2) dense.emplace_back(d * 86400 + h * 3600, 1200);
  }
  std::vector<raw_event> second;
  for (int d = 0; d < 14; ++d) {
    for (int h = 0; h < 24; ++h) second.emplace_back(d * 86400 + h * 3600 + 600, 900);
  }
  const auto net1 = chain_net(sparse, second, 300);
  const auto net2 = chain_net(dense, second, 300);
  const std::vector<hop_id> legs{0, 1};
  const auto r1 = estimate_typical_time(net1, legs, quick_cfg(net1, 5));
  const auto r2 = estimate_typical_time(net2, legs, quick_cfg(net2, 5));
  REQUIRE(r1);
  REQUIRE(r2);
  CHECK(r2->typical_s <= r1->typical_s);
}

TEST_CASE("parallel and sequential builds produce identical stores") {
  const auto net = testing::family_network("grid");
  const auto seq = testing::build_store(net, geo_gate{}, 11, 1);
  const auto par = testing::build_store(net, geo_gate{}, 11, 4);
  for (int t = 0; t <= 2; ++t) {
    REQUIRE(seq.pair_count(t) == par.pair_count(t));
    REQUIRE(seq.triplet_count(t) == par.triplet_count(t));
    seq.for_each_cell(t, [&](std::uint32_t dep, std::uint32_t arr,
                             const std::vector<triplet>& cell) {
      const auto* other = par.find(t, dep, arr);
      REQUIRE(other);
      REQUIRE(other->size() == cell.size());
      for (std::size_t i = 0; i < cell.size(); ++i) {
        CHECK((*other)[i].hop_seq == cell[i].hop_seq);
        CHECK((*other)[i].typical_s == cell[i].typical_s);
      }
    });
  }
}

TEST_CASE("sparse footprint stays sub-quadratic on the clustered fixture") {
  // locality-dominated variant: a hub spine densifies the pair matrix
  const auto net = testing::clustered_city_network(0);
  const auto store = testing::build_store(net, geo_gate{});
  const double cap = std::pow(static_cast<double>(net.station_count()), 1.6);
  CHECK(static_cast<double>(store.pair_count(1)) <= cap);
  CHECK(static_cast<double>(store.pair_count(2)) <= cap);
}

TEST_CASE("transfer pair table materializes the rules") {
  network_builder b;
  const auto stop = b.add_station("plain stop", 46, 8.0);
  const auto airport = b.add_station("airport", 46, 8.2);
  const auto village = b.add_station("village", 46, 8.4);
  b.add_scheduled_hop(village, stop, 0, mode::bus, {{0, 60}});
  b.add_scheduled_hop(stop, village, 1, mode::bus, {{200, 60}});
  b.add_scheduled_hop(village, airport, 2, mode::bus, {{0, 60}});
  b.add_scheduled_hop(airport, village, 3, mode::plane, {{9000, 1200}});
  b.set_transfer_override(village, 120);
  const auto net = b.build();
  const auto table = min_transfer_pair_table(net);
  const auto key = [](hop_id in, hop_id out) {
    return (static_cast<std::uint64_t>(in) << 32) | out;
  };
  CHECK(table.at(key(0, 1)) == 300);   // bus->bus at the plain stop
  CHECK(table.at(key(2, 3)) == 2700);  // bus->plane at the airport
  CHECK(table.at(key(3, 2)) == 120);   // override wins at the village
  CHECK(table.at(key(1, 0)) == 120);
}
