#include "bbtime/triplets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace bbtime {

const std::vector<std::uint32_t> triplet_store::empty_row_{};

std::optional<event> best_arrival_at_or_after(const network& net, hop_id h,
                                              utc_seconds ready) {
  auto first = net.next_event_at_or_after(h, ready);
  if (!first) return std::nullopt;
  event best = *first;
  // A later departure can only win while it leaves before the current best
  // arrival.
  for (std::uint32_t ord = best.ordinal + 1;; ++ord) {
    const auto nx = net.event_by_ordinal(h, ord);
    if (!nx || nx->dep >= best.arr) break;
    if (nx->arr < best.arr) best = *nx;
  }
  return best;
}

std::optional<trip_times> min_trip_time(const network& net,
                                        std::span<const hop_id> legs,
                                        utc_seconds t_dep, std::int64_t span) {
  if (legs.empty()) throw validation_error("min_trip_time on empty leg sequence");
  const utc_seconds limit = t_dep + span;
  utc_seconds board = 0;
  utc_seconds cur_arr = 0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const auto& h = net.hops[legs[i]];
    utc_seconds ready;
    if (i == 0) {
      ready = t_dep;
    } else {
      const auto& prev = net.hops[legs[i - 1]];
      if (net.node_of(prev.to) != net.node_of(h.from)) {
        throw validation_error("leg sequence is not a connected path");
      }
      ready = cur_arr + net.min_transfer_s(prev.to, prev.md, h.md) +
              net.displacement_walk_s(prev.to, h.from);
    }
    if (h.scheduled()) {
      const auto e = best_arrival_at_or_after(net, legs[i], ready);
      if (!e || e->arr > limit) return std::nullopt;
      if (i == 0) board = e->dep;
      cur_arr = e->arr;
    } else {
      if (i == 0) board = ready;
      cur_arr = ready + h.fixed_duration_s;
      if (cur_arr > limit) return std::nullopt;
    }
  }
  return trip_times{board, cur_arr};
}

std::optional<typical_time> estimate_typical_time(const network& net,
                                                  std::span<const hop_id> legs,
                                                  const estimator_config& cfg) {
  if (cfg.sample_count < 8) throw validation_error("estimator needs >= 8 samples");
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<utc_seconds> starts;
  starts.reserve(cfg.sample_count);
  for (std::uint32_t i = 0; i < cfg.sample_count; ++i) {
    starts.push_back(cfg.horizon_start +
                     static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(
                                                          cfg.sample_horizon_s)));
  }

  std::vector<std::int64_t> samples;
  samples.reserve(cfg.sample_count);
  std::int64_t global_min = std::numeric_limits<std::int64_t>::max();
  for (const auto t : starts) {
    const auto r = min_trip_time(net, legs, t, cfg.per_sample_span_s);
    if (!r) continue;
    const auto v = r->total();
    samples.push_back(v);
    global_min = std::min(global_min, v);
  }
  if (samples.empty()) return std::nullopt;

  std::int64_t sum = 0;
  for (const auto v : samples) sum += v;
  const std::int64_t mean = sum / static_cast<std::int64_t>(samples.size());
  const std::int64_t thr = cfg.outlier_threshold(mean);

  std::int64_t trimmed_sum = 0;
  std::int64_t trimmed_n = 0;
  for (const auto v : samples) {
    if (std::llabs(v - mean) <= thr) {
      trimmed_sum += v;
      ++trimmed_n;
    }
  }
  const std::int64_t typical = trimmed_n > 0 ? trimmed_sum / trimmed_n : mean;
  return typical_time{typical, global_min};
}

void triplet_store::insert(int t, std::uint32_t dep, std::uint32_t arr, triplet tp) {
  auto& sl = slices_[t];
  auto& cell = sl.cells[key(dep, arr)];
  if (cell.empty()) sl.rows[dep].push_back(arr);
  cell.push_back(std::move(tp));
}

const std::vector<triplet>* triplet_store::find(int t, std::uint32_t dep,
                                                std::uint32_t arr) const {
  const auto& sl = slices_[t];
  const auto it = sl.cells.find(key(dep, arr));
  return it == sl.cells.end() ? nullptr : &it->second;
}

const std::vector<std::uint32_t>& triplet_store::row(int t, std::uint32_t dep) const {
  const auto& sl = slices_[t];
  const auto it = sl.rows.find(dep);
  return it == sl.rows.end() ? empty_row_ : it->second;
}

std::uint32_t triplet_store::pair_cap(const network& net, std::uint32_t dep,
                                      std::uint32_t arr) {
  const auto deg = std::max(
      net.node_out_hops(dep).size() + net.node_in_hops(dep).size(),
      net.node_out_hops(arr).size() + net.node_in_hops(arr).size());
  std::uint32_t log2deg = 0;
  for (auto d = deg; d > 1; d >>= 1) ++log2deg;
  return std::clamp(4u + log2deg, 4u, 16u);
}

void triplet_store::finalize(const network& net, bool apply_cap) {
  for (int t = 0; t <= max_t; ++t) {
    auto& sl = slices_[t];
    for (auto& [k, cell] : sl.cells) {
      std::sort(cell.begin(), cell.end(), [](const triplet& a, const triplet& b) {
        if (a.typical_s != b.typical_s) return a.typical_s < b.typical_s;
        return a.hop_seq < b.hop_seq;
      });
      cell.erase(std::unique(cell.begin(), cell.end(),
                             [](const triplet& a, const triplet& b) {
                               return a.hop_seq == b.hop_seq;
                             }),
                 cell.end());
      if (t > 0 && apply_cap) {
        const auto dep = static_cast<std::uint32_t>(k >> 32);
        const auto arr = static_cast<std::uint32_t>(k & 0xffffffffu);
        const auto cap = pair_cap(net, dep, arr);
        if (cell.size() > cap) cell.resize(cap);
      }
    }
    for (auto& [dep, arrs] : sl.rows) std::sort(arrs.begin(), arrs.end());
  }
}

std::uint64_t triplet_store::pair_count(int t) const { return slices_[t].cells.size(); }

std::uint64_t triplet_store::triplet_count(int t) const {
  std::uint64_t n = 0;
  for (const auto& [k, cell] : slices_[t].cells) n += cell.size();
  return n;
}

void triplet_store::for_each_cell(
    int t, const std::function<void(std::uint32_t, std::uint32_t,
                                    const std::vector<triplet>&)>& fn) const {
  const auto& sl = slices_[t];
  std::vector<std::uint64_t> keys;
  keys.reserve(sl.cells.size());
  for (const auto& [k, cell] : sl.cells) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const auto k : keys) {
    fn(static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k & 0xffffffffu),
       sl.cells.at(k));
  }
}

namespace {

std::uint64_t seq_seed(std::uint64_t base, std::span<const hop_id> seq) {
  std::uint64_t s = base;
  for (const auto h : seq) s = mix64(s, h);
  return s;
}

std::optional<triplet> estimate_fragment(const network& net,
                                         const precompute_config& cfg,
                                         std::vector<std::uint32_t> vias,
                                         std::vector<hop_id> seq) {
  estimator_config ec = cfg.est;
  ec.rng_seed = seq_seed(cfg.est.rng_seed, seq);
  const auto est = estimate_typical_time(net, seq, ec);
  if (!est) return std::nullopt;
  triplet tp;
  tp.vias = std::move(vias);
  tp.hop_seq = std::move(seq);
  tp.typical_s = est->typical_s;
  tp.min_s = est->min_s;
  return tp;
}

double node_geo_m(const network& net, std::uint32_t a, std::uint32_t b) {
  return great_circle_m(net.station_point(net.node_representative(a)),
                        net.station_point(net.node_representative(b)));
}

}  // namespace

void build_direct_matrix(const network& net, const precompute_config& cfg,
                         triplet_store& store) {
  for (const auto& h : net.hops) {
    const auto dep = net.node_of(h.from);
    const auto arr = net.node_of(h.to);
    if (dep == arr) continue;
    auto tp = estimate_fragment(net, cfg, {}, {h.id});
    if (tp) store.insert(0, dep, arr, std::move(*tp));
  }
  store.finalize(net);
  store.mark_built(0);
}

namespace {

struct pending_fragment {
  std::uint32_t arr;
  std::vector<std::uint32_t> vias;
  std::vector<hop_id> seq;
  double d_route;
  bool air;
};

// Enumerates T=1 or T=2 fragment candidates for one departure node.
void enumerate_row(const network& net, const triplet_store& store, int t,
                   const precompute_config& cfg, std::uint32_t dep,
                   std::vector<pending_fragment>& out) {
  const auto push = [&](std::uint32_t arr, std::vector<std::uint32_t> vias,
                        std::vector<hop_id> seq, double d_route, bool air) {
    if (!cfg.gate.keep(d_route, node_geo_m(net, dep, arr), air)) return;
    out.push_back({arr, std::move(vias), std::move(seq), d_route, air});
  };

  if (t == 1) {
    for (const auto h1 : net.node_out_hops(dep)) {
      const auto& a = net.hops[h1];
      if (!a.scheduled()) continue;
      const auto via = net.node_of(a.to);
      if (via == dep) continue;
      for (const auto h2 : net.node_out_hops(via)) {
        const auto& b = net.hops[h2];
        if (!b.scheduled()) continue;
        const auto arr = net.node_of(b.to);
        if (arr == dep || arr == via) continue;
        push(arr, {via}, {h1, h2}, a.route_distance_m + b.route_distance_m,
             a.md == mode::plane || b.md == mode::plane);
      }
    }
    return;
  }

  // T=2 composes stored T=1 fragments with direct scheduled hops, in both
  // orders, with the gate applied between stages by the T=1 build.
  for (const auto mid : store.row(1, dep)) {
    const auto* frags = store.find(1, dep, mid);
    if (!frags) continue;
    for (const auto& f : frags[0]) {
      for (const auto h3 : net.node_out_hops(mid)) {
        const auto& c = net.hops[h3];
        if (!c.scheduled()) continue;
        const auto arr = net.node_of(c.to);
        if (arr == dep || arr == mid || arr == f.vias[0]) continue;
        double d = c.route_distance_m;
        bool air = c.md == mode::plane;
        for (const auto h : f.hop_seq) {
          d += net.hops[h].route_distance_m;
          air = air || net.hops[h].md == mode::plane;
        }
        push(arr, {f.vias[0], mid}, {f.hop_seq[0], f.hop_seq[1], h3}, d, air);
      }
    }
  }
  for (const auto h1 : net.node_out_hops(dep)) {
    const auto& a = net.hops[h1];
    if (!a.scheduled()) continue;
    const auto v1 = net.node_of(a.to);
    if (v1 == dep) continue;
    for (const auto arr : store.row(1, v1)) {
      if (arr == dep || arr == v1) continue;
      const auto* frags = store.find(1, v1, arr);
      if (!frags) continue;
      for (const auto& f : frags[0]) {
        if (f.vias[0] == dep || f.vias[0] == arr || f.vias[0] == v1) continue;
        double d = a.route_distance_m;
        bool air = a.md == mode::plane;
        for (const auto h : f.hop_seq) {
          d += net.hops[h].route_distance_m;
          air = air || net.hops[h].md == mode::plane;
        }
        push(arr, {v1, f.vias[0]}, {h1, f.hop_seq[0], f.hop_seq[1]}, d, air);
      }
    }
  }
}

}  // namespace

void build_triplets(const network& net, int t, const precompute_config& cfg,
                    triplet_store& store) {
  if (t < 1 || t > triplet_store::max_t) {
    throw validation_error("triplet slices exist for T=1 and T=2 only");
  }
  if (t == 2 && !store.has_slice(1)) {
    throw validation_error("T=2 build requires the T=1 slice");
  }

  const auto nodes = net.node_count();
  const unsigned workers = std::max(1u, cfg.threads);

  // Rows are independent; workers fill disjoint result slots so any thread
  // count produces the same store.
  std::vector<std::vector<std::pair<std::uint32_t, triplet>>> results(nodes);
  std::atomic<std::uint32_t> next_row{0};
  auto work = [&]() {
    std::vector<pending_fragment> pending;
    for (;;) {
      const auto dep = next_row.fetch_add(1);
      if (dep >= nodes) break;
      pending.clear();
      enumerate_row(net, store, t, cfg, dep, pending);
      for (auto& p : pending) {
        auto tp = estimate_fragment(net, cfg, std::move(p.vias), std::move(p.seq));
        if (tp) results[dep].emplace_back(p.arr, std::move(*tp));
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (std::uint32_t dep = 0; dep < nodes; ++dep) {
    for (auto& [arr, tp] : results[dep]) store.insert(t, dep, arr, std::move(tp));
  }
  store.finalize(net);
  store.mark_built(t);
}

std::unordered_map<std::uint64_t, std::uint32_t> min_transfer_pair_table(
    const network& net) {
  std::unordered_map<std::uint64_t, std::uint32_t> table;
  for (const auto& s : net.stations) {
    for (const auto hin : net.in_hops(s.id)) {
      for (const auto hout : net.out_hops(s.id)) {
        const auto key = (static_cast<std::uint64_t>(hin) << 32) | hout;
        table[key] = net.min_transfer_s(s.id, net.hops[hin].md, net.hops[hout].md);
      }
    }
  }
  return table;
}

std::string precompute_report(const network& net, const triplet_store& store,
                              double wall_seconds) {
  std::ostringstream os;
  os << "precompute report\n";
  os << "  nodes: " << net.node_count() << ", hops: " << net.hop_count() << "\n";
  for (int t = 0; t <= triplet_store::max_t; ++t) {
    if (!store.has_slice(t)) continue;
    os << "  T=" << t << ": " << store.pair_count(t) << " pairs, "
       << store.triplet_count(t) << " fragments\n";
  }
  os << "  transfer pairs: " << min_transfer_pair_table(net).size() << "\n";
  os << "  wall time: " << wall_seconds << " s\n";
  return os.str();
}

}  // namespace bbtime
