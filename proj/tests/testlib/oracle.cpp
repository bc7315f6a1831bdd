#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace bbtime::testing {

namespace {

// transfer rules restated from the contract, independent of the engine path
std::uint32_t xfer_s(const network& net, station_id at, mode in, mode out) {
  const auto it = net.transfer_override_s.find(at);
  if (it != net.transfer_override_s.end()) return it->second;
  if (in == mode::plane || out == mode::plane) return 2700;
  if (out == mode::walk || out == mode::taxi || out == mode::bicycle) return 0;
  return 300;
}

double disp_m(const network& net, station_id a, station_id b) {
  if (a == b) return 0.0;
  return great_circle_m(net.stations[a].lat, net.stations[a].lon, net.stations[b].lat,
                        net.stations[b].lon) *
         1.3;
}

std::uint32_t disp_s(const network& net, station_id a, station_id b) {
  if (a == b) return 0;
  return static_cast<std::uint32_t>(std::llround(disp_m(net, a, b) / 1.34));
}

bool is_unsched_mode(mode m) {
  return m == mode::walk || m == mode::taxi || m == mode::bicycle;
}

}  // namespace

plan_oracle::plan_oracle(const network& net, const oracle_options& opts)
    : net_(net), opts_(opts) {
  events_.resize(net.hops.size());
  for (const auto& h : net.hops) {
    if (!h.scheduled()) continue;
    auto raw = h.departures.decode();
    auto& out = events_[h.id];
    out.reserve(raw.size());
    for (std::uint32_t ord = 0; ord < raw.size(); ++ord) {
      oracle_event e;
      e.dep = raw[ord].first;
      e.arr = raw[ord].first + raw[ord].second;
      e.ordinal = ord;
      for (const auto& a : opts_.annotations) {
        if (a.hop != h.id || a.ordinal != ord) continue;
        if (raw[ord].first < a.valid_from || raw[ord].first >= a.valid_to) continue;
        switch (a.kind) {
          case annotation_kind::delay:
            e.dep += a.dep_delta_s;
            e.arr += a.arr_delta_s;
            break;
          case annotation_kind::cancelled:
            e.rejected = true;
            break;
          case annotation_kind::seats:
            if (!a.seats_available) e.rejected = true;
            break;
          case annotation_kind::fare:
            e.fare = a.fare_amount;
            break;
        }
      }
      out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const oracle_event& a, const oracle_event& b) { return a.dep < b.dep; });
  }
}

void plan_oracle::enumerate(
    std::uint32_t cur, std::uint32_t arr_node, int sched_left,
    std::vector<char>& visited, std::vector<hop_id>& seq,
    const std::vector<int>& dist_to_arr,
    const std::function<void(const std::vector<hop_id>&)>& fn) const {
  if (cur == arr_node) {
    if (!seq.empty()) fn(seq);
    return;
  }
  const bool last_unsched =
      !seq.empty() && !net_.hops[seq.back()].scheduled();
  for (const auto hid : net_.node_out_hops(cur)) {
    const auto& h = net_.hops[hid];
    if (h.md == mode::plane && !opts_.allow_air) continue;
    if (h.md == mode::taxi && !opts_.allow_taxi) continue;
    const bool sched = h.scheduled();
    if (!sched && last_unsched) continue;
    const int sched_next = sched_left - (sched ? 1 : 0);
    if (sched_next < 0) continue;
    const auto to = net_.node_of(h.to);
    if (visited[to]) continue;
    // a path needs at least dist_to_arr hops; alternation allows at most
    // 2 * sched_next + 1 further legs
    if (dist_to_arr[to] < 0 || dist_to_arr[to] > 2 * sched_next + 1) continue;
    visited[to] = 1;
    seq.push_back(hid);
    enumerate(to, arr_node, sched_next, visited, seq, dist_to_arr, fn);
    seq.pop_back();
    visited[to] = 0;
  }
}

oracle_trip plan_oracle::best(station_id dep, station_id arr, utc_seconds earliest) const {
  return best(dep, arr, earliest, opts_.window_s);
}

oracle_trip plan_oracle::best(station_id dep, station_id arr, utc_seconds earliest,
                              std::int64_t window_s) const {
  const auto dep_node = net_.node_of(dep);
  const auto arr_node = net_.node_of(arr);
  oracle_trip result;
  if (dep_node == arr_node) return result;

  // plain hop-count BFS toward arr for reach pruning
  std::vector<int> dist(net_.node_count(), -1);
  {
    std::deque<std::uint32_t> dq;
    dist[arr_node] = 0;
    dq.push_back(arr_node);
    while (!dq.empty()) {
      const auto cur = dq.front();
      dq.pop_front();
      for (const auto hid : net_.node_in_hops(cur)) {
        const auto prev = net_.node_of(net_.hops[hid].from);
        if (dist[prev] < 0) {
          dist[prev] = dist[cur] + 1;
          dq.push_back(prev);
        }
      }
    }
  }
  if (dist[dep_node] < 0) return result;

  const bool fare_mode = [&] {
    if (opts_.weights.fare_s_per_unit <= 0.0) return false;
    for (const auto& a : opts_.annotations) {
      if (a.kind == annotation_kind::fare) return true;
    }
    return false;
  }();

  // per-leg minimal effective arrival; durations may vary, so scan while a
  // later departure could overtake
  auto best_arrival = [&](hop_id h, utc_seconds ready) -> const oracle_event* {
    const auto& evs = events_[h];
    auto it = std::lower_bound(evs.begin(), evs.end(), ready,
                               [](const oracle_event& e, utc_seconds t) {
                                 return e.dep < t;
                               });
    const oracle_event* best = nullptr;
    for (; it != evs.end(); ++it) {
      if (best && it->dep >= best->arr) break;
      if (it->rejected) continue;
      if (!best || it->arr < best->arr || (it->arr == best->arr && it->dep > best->dep)) {
        best = &*it;
      }
    }
    return best;
  };

  auto evaluate_path = [&](const std::vector<hop_id>& seq) {
    // structural cost components
    int sched_count = 0;
    double walk_m = 0.0;
    double taxi_km = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& h = net_.hops[seq[i]];
      if (h.scheduled()) ++sched_count;
      if (h.md == mode::walk) walk_m += h.route_distance_m;
      if (h.md == mode::taxi) taxi_km += h.route_distance_m / 1000.0;
      if (i > 0) walk_m += disp_m(net_, net_.hops[seq[i - 1]].to, h.from);
    }
    if (walk_m > opts_.max_walk_m) return;
    const double structural =
        opts_.weights.transfer_s * (sched_count > 0 ? sched_count - 1 : 0) +
        opts_.weights.walk_s_per_m * walk_m + opts_.weights.taxi_s_per_km * taxi_km;

    // full combination search over fare-relevant events, greedy otherwise
    std::function<bool(std::size_t, utc_seconds, double, utc_seconds&, double&)>
        chain_min;
    chain_min = [&](std::size_t i, utc_seconds cur_arr, double fares_in,
                    utc_seconds& out_arr, double& out_fares) -> bool {
      if (i == seq.size()) {
        out_arr = cur_arr;
        out_fares = fares_in;
        return true;
      }
      const auto& h = net_.hops[seq[i]];
      const auto& prev = net_.hops[seq[i - 1]];
      const utc_seconds ready = cur_arr + xfer_s(net_, prev.to, prev.md, h.md) +
                                disp_s(net_, prev.to, h.from);
      if (!h.scheduled()) {
        return chain_min(i + 1, ready + h.fixed_duration_s, fares_in, out_arr, out_fares);
      }
      if (!fare_mode) {
        const auto* e = best_arrival(seq[i], ready);
        if (!e) return false;
        return chain_min(i + 1, e->arr, fares_in + e->fare, out_arr, out_fares);
      }
      // exhaustive over all accepted events departing after ready
      bool any = false;
      utc_seconds best_a = 0;
      double best_f = 0.0;
      double best_score = 0.0;
      const auto& evs = events_[seq[i]];
      for (const auto& e : evs) {
        if (e.rejected || e.dep < ready) continue;
        utc_seconds a;
        double f;
        if (!chain_min(i + 1, e.arr, fares_in + e.fare, a, f)) continue;
        const double score =
            static_cast<double>(a) + opts_.weights.fare_s_per_unit * f;
        if (!any || score < best_score) {
          any = true;
          best_a = a;
          best_f = f;
          best_score = score;
        }
      }
      if (!any) return false;
      out_arr = best_a;
      out_fares = best_f;
      return true;
    };

    auto consider_start = [&](utc_seconds board, utc_seconds first_arr,
                              double first_fare) {
      utc_seconds arrive;
      double fares;
      if (!chain_min(1, first_arr, first_fare, arrive, fares)) return;
      const double elapsed = static_cast<double>(arrive - board);
      const double cost = elapsed + structural +
                          opts_.weights.fare_s_per_unit * fares +
                          opts_.weights.wait_initial *
                              static_cast<double>(board - earliest);
      if (!result.found || cost < result.cost) {
        result.found = true;
        result.cost = cost;
        result.depart = board;
        result.arrive = arrive;
        result.transfers = static_cast<int>(seq.size()) - 1;
        result.seq = seq;
      }
    };

    const auto& first = net_.hops[seq[0]];
    if (!first.scheduled()) {
      consider_start(earliest, earliest + first.fixed_duration_s, 0.0);
      return;
    }
    for (const auto& e : events_[seq[0]]) {
      if (e.rejected || e.dep < earliest || e.dep >= earliest + window_s) continue;
      consider_start(e.dep, e.arr, e.fare);
    }
  };

  std::vector<char> visited(net_.node_count(), 0);
  visited[dep_node] = 1;
  std::vector<hop_id> seq;
  enumerate(dep_node, arr_node, opts_.t_max + 1, visited, seq, dist, evaluate_path);
  return result;
}

std::vector<int> oracle_min_transfers(const network& net, std::uint32_t origin) {
  // dense relaxation, deliberately structure-free
  const auto n = net.node_count();
  constexpr int inf = 1 << 29;
  std::vector<int> boardings(n, inf);
  boardings[origin] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& h : net.hops) {
      const auto a = net.node_of(h.from);
      const auto b = net.node_of(h.to);
      const int w = h.scheduled() ? 1 : 0;
      if (boardings[a] + w < boardings[b]) {
        boardings[b] = boardings[a] + w;
        changed = true;
      }
    }
  }
  std::vector<int> transfers(n, -1);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (v == origin || boardings[v] >= inf) continue;
    transfers[v] = boardings[v] > 0 ? boardings[v] - 1 : 0;
  }
  return transfers;
}

namespace {

struct raw_leg {
  bool scheduled;
  std::vector<std::pair<utc_seconds, utc_seconds>> events;  // dep, arr
  std::int64_t fixed = 0;
  std::uint32_t ready_extra = 0;  // transfer + displacement before this leg
};

std::vector<raw_leg> decode_legs(const network& net, const std::vector<hop_id>& legs) {
  std::vector<raw_leg> out;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const auto& h = net.hops[legs[i]];
    raw_leg rl;
    rl.scheduled = h.scheduled();
    if (rl.scheduled) {
      for (const auto& [dep, dur] : h.departures.decode()) {
        rl.events.emplace_back(dep, dep + dur);
      }
    } else {
      rl.fixed = h.fixed_duration_s;
    }
    if (i > 0) {
      const auto& prev = net.hops[legs[i - 1]];
      rl.ready_extra = xfer_s(net, prev.to, prev.md, h.md) +
                       disp_s(net, prev.to, h.from);
    }
    out.push_back(std::move(rl));
  }
  return out;
}

std::optional<trip_times> chain_raw(const std::vector<raw_leg>& legs, utc_seconds t_dep,
                                    std::int64_t span) {
  const utc_seconds limit = t_dep + span;
  utc_seconds board = 0;
  utc_seconds cur = 0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const auto& l = legs[i];
    const utc_seconds ready = i == 0 ? t_dep : cur + l.ready_extra;
    if (!l.scheduled) {
      if (i == 0) board = ready;
      cur = ready + l.fixed;
      if (cur > limit) return std::nullopt;
      continue;
    }
    const std::pair<utc_seconds, utc_seconds>* best = nullptr;
    for (const auto& e : l.events) {
      if (e.first < ready) continue;
      if (best && e.first >= best->second) break;
      if (!best || e.second < best->second ||
          (e.second == best->second && e.first > best->first)) {
        best = &e;
      }
    }
    if (!best || best->second > limit) return std::nullopt;
    if (i == 0) board = best->first;
    cur = best->second;
  }
  return trip_times{board, cur};
}

}  // namespace

std::optional<typical_time> oracle_estimate(const network& net,
                                            const std::vector<hop_id>& legs,
                                            const estimator_config& cfg) {
  const auto raw = decode_legs(net, legs);
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<std::int64_t> samples;
  std::int64_t global_min = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t i = 0; i < cfg.sample_count; ++i) {
    const utc_seconds t =
        cfg.horizon_start +
        static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cfg.sample_horizon_s));
    const auto r = chain_raw(raw, t, cfg.per_sample_span_s);
    if (!r) continue;
    samples.push_back(r->total());
    global_min = std::min(global_min, r->total());
  }
  if (samples.empty()) return std::nullopt;
  std::int64_t sum = 0;
  for (const auto v : samples) sum += v;
  const std::int64_t mean = sum / static_cast<std::int64_t>(samples.size());
  const std::int64_t thr = std::max<std::int64_t>(7200, mean / 2);
  std::int64_t ssum = 0, scnt = 0;
  for (const auto v : samples) {
    if (std::llabs(v - mean) <= thr) {
      ssum += v;
      ++scnt;
    }
  }
  return typical_time{scnt > 0 ? ssum / scnt : mean, global_min};
}

std::optional<trip_times> oracle_min_trip_bruteforce(const network& net,
                                                     const std::vector<hop_id>& legs,
                                                     utc_seconds t_dep,
                                                     std::int64_t span) {
  const auto raw = decode_legs(net, legs);
  const utc_seconds limit = t_dep + span;
  std::optional<trip_times> best;

  std::function<void(std::size_t, utc_seconds, utc_seconds)> rec =
      [&](std::size_t i, utc_seconds board, utc_seconds cur) {
        if (cur > limit) return;
        if (i == raw.size()) {
          if (!best || cur < best->arrive ||
              (cur == best->arrive && board > best->board)) {
            best = trip_times{board, cur};
          }
          return;
        }
        const auto& l = raw[i];
        const utc_seconds ready = i == 0 ? t_dep : cur + l.ready_extra;
        if (!l.scheduled) {
          rec(i + 1, i == 0 ? ready : board, ready + l.fixed);
          return;
        }
        for (const auto& e : l.events) {
          if (e.first < ready) continue;
          rec(i + 1, i == 0 ? e.first : board, e.second);
        }
      };
  rec(0, 0, 0);
  return best;
}

std::string validate_itinerary(const network& net, const query& q, const itinerary& it,
                               const std::vector<annotation>& annotations,
                               std::int64_t window_s) {
  if (it.legs.empty()) return "itinerary without legs";

  struct eff {
    utc_seconds dep;
    utc_seconds arr;
    double fare;
  };
  auto effective_of = [&](hop_id h, std::uint32_t ordinal) -> std::optional<eff> {
    const auto raw = net.hops[h].departures.decode();
    if (ordinal >= raw.size()) return std::nullopt;
    eff e{raw[ordinal].first, raw[ordinal].first + raw[ordinal].second, 0.0};
    for (const auto& a : annotations) {
      if (a.hop != h || a.ordinal != ordinal) continue;
      if (raw[ordinal].first < a.valid_from || raw[ordinal].first >= a.valid_to) continue;
      switch (a.kind) {
        case annotation_kind::delay:
          e.dep += a.dep_delta_s;
          e.arr += a.arr_delta_s;
          break;
        case annotation_kind::cancelled:
          return std::nullopt;
        case annotation_kind::seats:
          if (!a.seats_available) return std::nullopt;
          break;
        case annotation_kind::fare:
          e.fare = a.fare_amount;
          break;
      }
    }
    return e;
  };

  double walk_m = 0.0;
  double taxi_km = 0.0;
  double fares = 0.0;
  int sched = 0;
  for (std::size_t i = 0; i < it.legs.size(); ++i) {
    const auto& leg = it.legs[i];
    const auto& h = net.hops[leg.hop];
    if (h.from != leg.board_station || h.to != leg.alight_station) {
      return "leg stations disagree with the hop";
    }
    if (leg.arr <= leg.dep) return "leg arrives before it departs";

    if (h.scheduled()) {
      ++sched;
      if (!leg.event_ordinal) return "scheduled leg without an event ordinal";
      const auto e = effective_of(leg.hop, *leg.event_ordinal);
      if (!e) return "leg uses a rejected or unknown departure";
      if (e->dep != leg.dep || e->arr != leg.arr) {
        return "leg times disagree with the effective event";
      }
      fares += e->fare;
    }
    if (h.md == mode::walk) walk_m += h.route_distance_m;
    if (h.md == mode::taxi) taxi_km += h.route_distance_m / 1000.0;

    if (i == 0) {
      if (h.scheduled()) {
        if (leg.dep < q.earliest_dep || leg.dep >= q.earliest_dep + window_s) {
          return "first boarding outside the departure window";
        }
      } else if (leg.dep != q.earliest_dep) {
        return "unscheduled start must leave at the earliest departure";
      }
    } else {
      const auto& prev = it.legs[i - 1];
      const auto& prev_hop = net.hops[prev.hop];
      if (net.node_of(prev_hop.to) != net.node_of(h.from)) {
        return "consecutive legs do not connect";
      }
      walk_m += disp_m(net, prev.alight_station, leg.board_station);
      const utc_seconds ready = prev.arr +
                                xfer_s(net, prev.alight_station, prev_hop.md, h.md) +
                                disp_s(net, prev.alight_station, leg.board_station);
      if (leg.dep < ready) return "transfer time violated";
      if (!h.scheduled() && leg.dep != ready) {
        return "unscheduled leg must start when ready";
      }
    }
  }
  if (walk_m > q.max_walk_m + 1e-6) return "walk budget exceeded";

  const double elapsed = static_cast<double>(it.legs.back().arr - it.legs.front().dep);
  const double cost = elapsed +
                      q.weights.transfer_s * (sched > 0 ? sched - 1 : 0) +
                      q.weights.walk_s_per_m * walk_m +
                      q.weights.taxi_s_per_km * taxi_km +
                      q.weights.fare_s_per_unit * fares +
                      q.weights.wait_initial *
                          static_cast<double>(it.legs.front().dep - q.earliest_dep);
  if (std::abs(cost - it.cost) > 1e-6) return "cost decomposition mismatch";
  if (it.transfers != static_cast<int>(it.legs.size()) - 1) return "transfer count wrong";
  return {};
}

}  // namespace bbtime::testing
