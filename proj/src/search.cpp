#include "bbtime/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace bbtime {

std::string itinerary::signature() const {
  std::string s;
  s.reserve(legs.size());
  for (const auto& l : legs) s.push_back(mode_letter(l.md));
  return s;
}

bool transfer_gate_skips(const mesh_table* mesh, const network& net, station_id dep,
                         station_id arr, int transfers) {
  if (!mesh) return false;
  const auto bound = mesh->lookup(net.stations[dep].lat, net.stations[dep].lon,
                                  net.stations[arr].lat, net.stations[arr].lon);
  return bound.has_value() && transfers < static_cast<int>(*bound);
}

namespace {

using clock_type = std::chrono::steady_clock;

struct seq_hash {
  std::size_t operator()(const std::vector<hop_id>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (const auto x : v) h = mix64(h, x);
    return static_cast<std::size_t>(h);
  }
};

struct candidate {
  std::vector<hop_id> seq;
  priority_key key;
  double d_route = 0.0;
  double lb_cost = 0.0;
};

struct chain_tail {
  utc_seconds arrive = 0;
  double fares = 0.0;
  std::vector<itinerary_leg> legs;
};

class planner {
 public:
  planner(const network& net, const triplet_store& store, const mesh_table* mesh,
          const overlay_view& ov, const query& q, const search_options& opts)
      : net_(net), store_(store), mesh_(mesh), overlay_(ov), q_(q), opts_(opts) {}

  plan_result run();

 private:
  bool deadline_hit() {
    if (!has_deadline_) return false;
    if (clock_type::now() >= deadline_) {
      stats_.time_limited = true;
      return true;
    }
    return false;
  }

  double node_geo(std::uint32_t a, std::uint32_t b) const {
    return great_circle_m(net_.station_point(net_.node_representative(a)),
                          net_.station_point(net_.node_representative(b)));
  }

  std::int64_t hop_typical(hop_id h) const {
    const auto it = typical0_.find(h);
    return it != typical0_.end() ? it->second
                                 : static_cast<std::int64_t>(net_.min_duration(h));
  }

  // Baseline minimum ride time, lowered where overlay deltas shrink an
  // event. Keeps the pruning bound admissible under early arrivals.
  std::int64_t effective_min_duration(hop_id h) const {
    const auto base = static_cast<std::int64_t>(net_.min_duration(h));
    const auto it = overlay_min_dur_.find(h);
    return it != overlay_min_dur_.end() ? std::min(base, it->second) : base;
  }

  bool mode_allowed(mode m) const {
    if (m == mode::plane && !q_.allow_air) return false;
    if (m == mode::taxi && !q_.allow_taxi) return false;
    return true;
  }

  // Admissible lower bound on the cost of any completion of this hop path:
  // minimum ride times, minimum transfer slacks, and the structural
  // penalties that every completion pays.
  double sequence_lb(const std::vector<hop_id>& seq, int sched_count) const {
    std::int64_t elapsed = 0;
    double walk_m = 0.0;
    double taxi_km = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& h = net_.hops[seq[i]];
      elapsed += effective_min_duration(seq[i]);
      if (i > 0) {
        const auto& prev = net_.hops[seq[i - 1]];
        elapsed += net_.min_transfer_s(prev.to, prev.md, h.md);
        elapsed += net_.displacement_walk_s(prev.to, h.from);
        walk_m += net_.displacement_walk_m(prev.to, h.from);
      }
      if (h.md == mode::walk) walk_m += h.route_distance_m;
      if (h.md == mode::taxi) taxi_km += h.route_distance_m / 1000.0;
    }
    const int transfers = sched_count > 0 ? sched_count - 1 : 0;
    return static_cast<double>(elapsed) + q_.weights.transfer_s * transfers +
           q_.weights.walk_s_per_m * walk_m + q_.weights.taxi_s_per_km * taxi_km;
  }

  // --- overlay-aware event scans -----------------------------------------

  bool ordinal_annotated(hop_id h, std::uint32_t ordinal) const {
    const auto* anns = overlay_->annotations_for(h);
    if (!anns) return false;
    for (const auto& a : *anns) {
      if (a.ordinal == ordinal) return true;
    }
    return false;
  }

  // Effective events of `h` departing in [t0, t1), ascending by effective
  // departure.
  std::vector<effective_event> effective_in_window(hop_id h, utc_seconds t0,
                                                   utc_seconds t1) {
    std::vector<effective_event> out;
    const auto* anns = overlay_->annotations_for(h);
    for (const auto& e : net_.events_in_window(h, t0, t1)) {
      ++stats_.departures_scanned;
      if (anns && ordinal_annotated(h, e.ordinal)) continue;
      out.push_back({e, false, std::nullopt});
    }
    if (anns) {
      std::unordered_set<std::uint32_t> seen;
      for (const auto& a : *anns) {
        if (!seen.insert(a.ordinal).second) continue;
        const auto eff = overlay_->effective_by_ordinal(net_, h, a.ordinal);
        ++stats_.departures_scanned;
        if (!eff || eff->rejected) continue;
        if (eff->ev.dep >= t0 && eff->ev.dep < t1) out.push_back(*eff);
      }
      std::sort(out.begin(), out.end(),
                [](const effective_event& a, const effective_event& b) {
                  if (a.ev.dep != b.ev.dep) return a.ev.dep < b.ev.dep;
                  return a.ev.ordinal < b.ev.ordinal;
                });
    }
    return out;
  }

  // Minimum effective arrival with effective departure >= ready. Durations
  // may vary within a list, so the scan continues while a later departure
  // could still overtake the best arrival.
  std::optional<effective_event> best_effective_arrival(hop_id h, utc_seconds ready) {
    const auto* anns = overlay_->annotations_for(h);
    std::optional<effective_event> best;

    auto consider = [&](const effective_event& cand) {
      if (cand.rejected || cand.ev.dep < ready) return;
      if (!best || cand.ev.arr < best->ev.arr ||
          (cand.ev.arr == best->ev.arr && cand.ev.dep > best->ev.dep)) {
        best = cand;
      }
    };

    if (anns) {
      std::unordered_set<std::uint32_t> seen;
      for (const auto& a : *anns) {
        if (!seen.insert(a.ordinal).second) continue;
        const auto eff = overlay_->effective_by_ordinal(net_, h, a.ordinal);
        ++stats_.departures_scanned;
        if (eff) consider(*eff);
      }
    }
    auto e = net_.hops[h].departures.at_or_after(ready);
    while (e) {
      e->hop = h;
      ++stats_.departures_scanned;
      if (best && e->dep >= best->ev.arr) break;
      if (!anns || !ordinal_annotated(h, e->ordinal)) {
        consider({*e, false, std::nullopt});
      }
      e = net_.event_by_ordinal(h, e->ordinal + 1);
    }
    return best;
  }

  bool hop_has_fare_annotation(hop_id h) const {
    if (q_.weights.fare_s_per_unit <= 0.0) return false;
    const auto* anns = overlay_->annotations_for(h);
    if (!anns) return false;
    for (const auto& a : *anns) {
      if (a.kind == annotation_kind::fare) return true;
    }
    return false;
  }

  // First `max_n` accepted effective events departing >= ready (fare
  // alternatives enumeration).
  std::vector<effective_event> collect_effective(hop_id h, utc_seconds ready,
                                                 std::size_t max_n) {
    std::vector<effective_event> out;
    const auto* anns = overlay_->annotations_for(h);
    if (anns) {
      std::unordered_set<std::uint32_t> seen;
      for (const auto& a : *anns) {
        if (!seen.insert(a.ordinal).second) continue;
        const auto eff = overlay_->effective_by_ordinal(net_, h, a.ordinal);
        ++stats_.departures_scanned;
        if (eff && !eff->rejected && eff->ev.dep >= ready) out.push_back(*eff);
      }
    }
    auto e = net_.hops[h].departures.at_or_after(ready);
    while (e && out.size() < max_n * 2) {
      e->hop = h;
      ++stats_.departures_scanned;
      if (!anns || !ordinal_annotated(h, e->ordinal)) {
        out.push_back({*e, false, std::nullopt});
      }
      e = net_.event_by_ordinal(h, e->ordinal + 1);
    }
    std::sort(out.begin(), out.end(),
              [](const effective_event& a, const effective_event& b) {
                if (a.ev.dep != b.ev.dep) return a.ev.dep < b.ev.dep;
                return a.ev.ordinal < b.ev.ordinal;
              });
    if (out.size() > max_n) out.resize(max_n);
    return out;
  }

  // --- chaining ------------------------------------------------------------

  // Completes legs[i..] given the previous leg ended at prev_alight at
  // cur_arr. Minimizes effective arrival plus weighted fares.
  std::optional<chain_tail> chain(const std::vector<hop_id>& seq, std::size_t i,
                                  station_id prev_alight, mode prev_mode,
                                  utc_seconds cur_arr) {
    if (i == seq.size()) return chain_tail{cur_arr, 0.0, {}};
    const auto h = seq[i];
    const auto& hp = net_.hops[h];
    const auto xfer = net_.min_transfer_s(prev_alight, prev_mode, hp.md);
    const auto disp = net_.displacement_walk_s(prev_alight, hp.from);
    const utc_seconds ready = cur_arr + xfer + disp;

    auto make_leg = [&](utc_seconds dep, utc_seconds arr,
                        std::optional<std::uint32_t> ordinal,
                        std::optional<double> fare) {
      itinerary_leg leg;
      leg.hop = h;
      leg.event_ordinal = ordinal;
      leg.board_station = hp.from;
      leg.alight_station = hp.to;
      leg.dep = dep;
      leg.arr = arr;
      leg.wait_before_s = dep - cur_arr;
      leg.distance_m = hp.route_distance_m;
      leg.md = hp.md;
      leg.fare = fare;
      return leg;
    };

    if (!hp.scheduled()) {
      const utc_seconds arr = ready + hp.fixed_duration_s;
      auto rest = chain(seq, i + 1, hp.to, hp.md, arr);
      if (!rest) return std::nullopt;
      rest->legs.insert(rest->legs.begin(), make_leg(ready, arr, std::nullopt, {}));
      return rest;
    }

    if (hop_has_fare_annotation(h)) {
      // fare-varying departures: enumerate a handful of alternatives
      const auto options = collect_effective(h, ready, 4);
      std::optional<chain_tail> best;
      double best_score = 0.0;
      for (const auto& opt : options) {
        auto rest = chain(seq, i + 1, hp.to, hp.md, opt.ev.arr);
        if (!rest) continue;
        const double fare = opt.fare.value_or(0.0);
        const double score = static_cast<double>(rest->arrive) +
                             q_.weights.fare_s_per_unit * (fare + rest->fares);
        if (!best || score < best_score) {
          rest->fares += fare;
          rest->legs.insert(rest->legs.begin(),
                            make_leg(opt.ev.dep, opt.ev.arr, opt.ev.ordinal, opt.fare));
          best = std::move(rest);
          best_score = score;
        }
      }
      return best;
    }

    const auto e = best_effective_arrival(h, ready);
    if (!e) return std::nullopt;
    auto rest = chain(seq, i + 1, hp.to, hp.md, e->ev.arr);
    if (!rest) return std::nullopt;
    rest->fares += e->fare.value_or(0.0);
    rest->legs.insert(rest->legs.begin(),
                      make_leg(e->ev.dep, e->ev.arr, e->ev.ordinal, e->fare));
    return rest;
  }

  // --- itinerary assembly ---------------------------------------------------

  std::optional<itinerary> assemble(std::vector<itinerary_leg> legs) {
    itinerary it;
    it.legs = std::move(legs);
    if (it.legs.empty()) return std::nullopt;
    it.depart = it.legs.front().dep;
    it.arrive = it.legs.back().arr;
    it.elapsed_s = it.arrive - it.depart;
    it.transfers = static_cast<int>(it.legs.size()) - 1;
    it.initial_wait_s = it.depart - q_.earliest_dep;

    int sched = 0;
    double walk_m = 0.0;
    double taxi_km = 0.0;
    double fares = 0.0;
    for (std::size_t i = 0; i < it.legs.size(); ++i) {
      const auto& leg = it.legs[i];
      if (net_.hops[leg.hop].scheduled()) ++sched;
      if (leg.md == mode::walk) walk_m += leg.distance_m;
      if (leg.md == mode::taxi) taxi_km += leg.distance_m / 1000.0;
      if (i > 0) {
        walk_m += net_.displacement_walk_m(it.legs[i - 1].alight_station,
                                           leg.board_station);
      }
      fares += leg.fare.value_or(0.0);
    }
    it.scheduled_transfers = sched > 0 ? sched - 1 : 0;
    it.walk_m = walk_m;
    it.fares = fares;
    if (walk_m > q_.max_walk_m) return std::nullopt;

    it.cost = static_cast<double>(it.elapsed_s) +
              q_.weights.transfer_s * it.scheduled_transfers +
              q_.weights.walk_s_per_m * walk_m + q_.weights.taxi_s_per_km * taxi_km +
              q_.weights.fare_s_per_unit * fares +
              q_.weights.wait_initial * static_cast<double>(it.initial_wait_s);
    return it;
  }

  static bool better(const itinerary& a, const itinerary& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.transfers != b.transfers) return a.transfers < b.transfers;
    if (a.arrive != b.arrive) return a.arrive < b.arrive;
    std::vector<hop_id> ha, hb;
    for (const auto& l : a.legs) ha.push_back(l.hop);
    for (const auto& l : b.legs) hb.push_back(l.hop);
    return ha < hb;
  }

  void offer(itinerary&& it) {
    ++stats_.alternatives_evaluated;
    if (!best_ || better(it, *best_)) {
      if (best_ && best_->depart != it.depart) {
        // keep the displaced leader as the later-departure alternative
        if (best_->depart > it.depart &&
            (!next_dep_ || better(*best_, *next_dep_))) {
          next_dep_ = best_;
        }
      }
      best_ = std::move(it);
      bound_ = std::min(bound_, best_->cost);
      return;
    }
    if (it.depart > best_->depart && (!next_dep_ || better(it, *next_dep_))) {
      next_dep_ = std::move(it);
    }
  }

  void evaluate(const candidate& c) {
    if (c.lb_cost > bound_) {
      ++stats_.pruned_bound;
      return;
    }
    const auto& first = net_.hops[c.seq[0]];
    const utc_seconds w0 = q_.earliest_dep;
    const utc_seconds w1 = q_.earliest_dep + window_s_;

    auto realize = [&](std::vector<itinerary_leg> legs) {
      auto it = assemble(std::move(legs));
      if (!it) return;
      if (opts_.check_admissibility && it->cost + 1e-6 < c.lb_cost) {
        ++stats_.admissibility_violations;
      }
      offer(std::move(*it));
    };

    if (!first.scheduled()) {
      // unscheduled start: leave immediately, no initial wait
      const utc_seconds arr = q_.earliest_dep + first.fixed_duration_s;
      auto rest = chain(c.seq, 1, first.to, first.md, arr);
      if (rest) {
        itinerary_leg leg0;
        leg0.hop = c.seq[0];
        leg0.board_station = first.from;
        leg0.alight_station = first.to;
        leg0.dep = q_.earliest_dep;
        leg0.arr = arr;
        leg0.wait_before_s = 0;
        leg0.distance_m = first.route_distance_m;
        leg0.md = first.md;
        rest->legs.insert(rest->legs.begin(), leg0);
        realize(std::move(rest->legs));
      }
      return;
    }

    for (const auto& boarding : effective_in_window(c.seq[0], w0, w1)) {
      if (deadline_hit()) return;
      if (bound_ < c.lb_cost) {
        ++stats_.pruned_bound;
        return;
      }
      itinerary_leg leg0;
      leg0.hop = c.seq[0];
      leg0.event_ordinal = boarding.ev.ordinal;
      leg0.board_station = first.from;
      leg0.alight_station = first.to;
      leg0.dep = boarding.ev.dep;
      leg0.arr = boarding.ev.arr;
      leg0.wait_before_s = boarding.ev.dep - q_.earliest_dep;
      leg0.distance_m = first.route_distance_m;
      leg0.md = first.md;
      leg0.fare = boarding.fare;

      auto rest = chain(c.seq, 1, first.to, first.md, boarding.ev.arr);
      if (!rest) continue;
      std::vector<itinerary_leg> legs;
      legs.reserve(c.seq.size());
      legs.push_back(leg0);
      for (auto& l : rest->legs) legs.push_back(std::move(l));
      realize(std::move(legs));
    }
  }

  // --- candidate generation -------------------------------------------------

  bool sequence_allowed(const std::vector<hop_id>& seq) const {
    double walk_m = 0.0;
    for (const auto h : seq) {
      const auto& hp = net_.hops[h];
      if (!mode_allowed(hp.md)) return false;
      if (hp.md == mode::walk) walk_m += hp.route_distance_m;
    }
    return walk_m <= q_.max_walk_m;
  }

  void emit(std::vector<hop_id> seq, int sched_count, double d_route,
            std::int64_t typical_sum, std::vector<candidate>& out,
            std::unordered_set<std::vector<hop_id>, seq_hash>& seen) {
    if (!seen.insert(seq).second) return;
    bool air = false;
    for (const auto h : seq) air = air || net_.hops[h].md == mode::plane;
    if (!opts_.gate.keep(d_route, d_geo_, air)) {
      ++stats_.pruned_geo;
      stats_.geo_pruned = true;
      return;
    }
    candidate c;
    c.key = {typical_sum, d_route};
    c.d_route = d_route;
    c.lb_cost = sequence_lb(seq, sched_count);
    c.seq = std::move(seq);
    ++stats_.candidates_generated;
    out.push_back(std::move(c));
  }

  // Stored-fragment composition: covers a sweep with fragments of up to
  // three legs each, largest first. For T <= 2 with a built slice this is a
  // direct cell lookup.
  void compose_stored(int legs_left, std::uint32_t cur, std::vector<hop_id>& seq,
                      std::vector<char>& visited, double d_route,
                      std::int64_t typical_sum, int target_sched,
                      std::vector<candidate>& out,
                      std::unordered_set<std::vector<hop_id>, seq_hash>& seen) {
    if (deadline_hit()) return;
    for (int t_frag = std::min(legs_left, 3) - 1; t_frag >= 0; --t_frag) {
      if (!store_.has_slice(t_frag)) continue;
      const int legs_frag = t_frag + 1;
      if (legs_frag == legs_left) {
        const auto* cell = store_.find(t_frag, cur, arr_node_);
        if (!cell) continue;
        for (const auto& tp : *cell) {
          bool ok = true;
          for (const auto v : tp.vias) ok = ok && !visited[v];
          // T0 fragments may be unscheduled hops; composition sweeps count
          // scheduled legs only
          int sched = 0;
          double d = 0.0;
          for (const auto h : tp.hop_seq) {
            if (net_.hops[h].scheduled()) ++sched;
            d += net_.hops[h].route_distance_m;
          }
          if (!ok || sched != legs_frag) continue;
          auto full = seq;
          full.insert(full.end(), tp.hop_seq.begin(), tp.hop_seq.end());
          if (!sequence_allowed(full)) continue;
          emit(std::move(full), target_sched, d_route + d, typical_sum + tp.typical_s,
               out, seen);
        }
        continue;
      }
      for (const auto mid : store_.row(t_frag, cur)) {
        if (mid == arr_node_ || visited[mid]) continue;
        const auto* cell = store_.find(t_frag, cur, mid);
        if (!cell) continue;
        for (const auto& tp : *cell) {
          bool ok = true;
          for (const auto v : tp.vias) ok = ok && !visited[v];
          int sched = 0;
          double d = 0.0;
          for (const auto h : tp.hop_seq) {
            if (net_.hops[h].scheduled()) ++sched;
            d += net_.hops[h].route_distance_m;
          }
          if (!ok || sched != legs_frag) continue;
          const auto mark = [&](char flag) {
            visited[mid] = flag;
            for (const auto v : tp.vias) visited[v] = flag;
          };
          mark(1);
          const auto before = seq.size();
          seq.insert(seq.end(), tp.hop_seq.begin(), tp.hop_seq.end());
          compose_stored(legs_left - legs_frag, mid, seq, visited, d_route + d,
                         typical_sum + tp.typical_s, target_sched, out, seen);
          seq.resize(before);
          mark(0);
        }
      }
    }
  }

  // Adjacency completion: every simple node path with exactly target_sched
  // scheduled legs (plus interleaved unscheduled legs, never two in a row).
  void dfs_complete(std::uint32_t cur, int target_sched, int sched_used,
                    bool last_unscheduled, double d_route, double walk_m,
                    std::int64_t elapsed_lb, std::vector<hop_id>& seq,
                    std::vector<char>& visited, std::vector<candidate>& out,
                    std::unordered_set<std::vector<hop_id>, seq_hash>& seen) {
    if (abort_generation_ || deadline_hit()) {
      abort_generation_ = true;
      return;
    }
    if (cur == arr_node_) {
      if (!seq.empty() &&
          (sched_used == target_sched || (target_sched == 1 && sched_used == 0))) {
        std::int64_t typ = 0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
          typ += hop_typical(seq[i]);
          if (i > 0) {
            const auto& prev = net_.hops[seq[i - 1]];
            typ += net_.min_transfer_s(prev.to, prev.md, net_.hops[seq[i]].md);
          }
        }
        emit(seq, sched_used, d_route, typ, out, seen);
      }
      return;  // paths end at the destination
    }
    for (const auto hid : net_.node_out_hops(cur)) {
      const auto& h = net_.hops[hid];
      if (!mode_allowed(h.md)) continue;
      const bool sched = h.scheduled();
      if (!sched && last_unscheduled) continue;
      const int next_sched = sched_used + (sched ? 1 : 0);
      if (next_sched > target_sched) continue;
      const auto to = net_.node_of(h.to);
      if (visited[to]) continue;
      if (rev_min_[to] != unreachable_level &&
          next_sched + rev_min_[to] > target_sched) {
        continue;
      }
      if (rev_min_[to] == unreachable_level) continue;
      double w = walk_m + (h.md == mode::walk ? h.route_distance_m : 0.0);
      if (w > q_.max_walk_m) continue;
      const double d = d_route + h.route_distance_m;
      if (opts_.gate.enabled && d_geo_ > 0.0) {
        // monotone partial gate: the full path can only be longer
        const bool air_membership = true;  // widest threshold, stays sound
        if (d / d_geo_ > opts_.gate.effective_threshold(d_geo_, air_membership)) {
          ++stats_.pruned_geo;
          stats_.geo_pruned = true;
          continue;
        }
      }
      std::int64_t lb = elapsed_lb + effective_min_duration(hid);
      if (!seq.empty()) {
        const auto& prev = net_.hops[seq.back()];
        lb += net_.min_transfer_s(prev.to, prev.md, h.md);
        lb += net_.displacement_walk_s(prev.to, h.from);
      }
      const int transfers = target_sched > 0 ? target_sched - 1 : 0;
      const double lb_cost = static_cast<double>(lb) +
                             q_.weights.transfer_s * transfers +
                             q_.weights.walk_s_per_m * w;
      if (lb_cost > bound_) {
        ++stats_.pruned_bound;
        continue;
      }
      visited[to] = 1;
      seq.push_back(hid);
      dfs_complete(to, target_sched, next_sched, !sched, d, w, lb, seq, visited, out,
                   seen);
      seq.pop_back();
      visited[to] = 0;
      if (abort_generation_) return;
    }
  }

  void sweep(int transfers) {
    if (transfer_gate_skips(mesh_ && opts_.use_mesh_gate ? mesh_ : nullptr, net_,
                            q_.dep, q_.arr, transfers)) {
      return;
    }
    ++stats_.sweeps;
    const int target_sched = transfers + 1;
    std::unordered_set<std::vector<hop_id>, seq_hash> seen;
    std::vector<char> visited(net_.node_count(), 0);
    visited[dep_node_] = 1;

    // stored fragments first: pre-sorted by typical time, they set the
    // bound before the completion pass runs
    {
      std::vector<candidate> stored;
      std::vector<hop_id> seq;
      compose_stored(target_sched, dep_node_, seq, visited, 0.0, 0, target_sched,
                     stored, seen);
      std::sort(stored.begin(), stored.end(), [](const candidate& a, const candidate& b) {
        if (!(a.key < b.key) && !(b.key < a.key)) return a.seq < b.seq;
        return a.key < b.key;
      });
      for (const auto& c : stored) {
        if (deadline_hit()) return;
        evaluate(c);
      }
    }

    // adjacency completion sweep
    std::vector<candidate> completion;
    {
      std::vector<hop_id> seq;
      abort_generation_ = false;
      dfs_complete(dep_node_, target_sched, 0, false, 0.0, 0.0, 0, seq, visited,
                   completion, seen);
    }
    std::sort(completion.begin(), completion.end(),
              [](const candidate& a, const candidate& b) {
                if (!(a.key < b.key) && !(b.key < a.key)) return a.seq < b.seq;
                return a.key < b.key;
              });
    for (const auto& c : completion) {
      if (deadline_hit()) return;
      evaluate(c);
    }
  }

  void run_sweeps() {
    for (int t = 0; t <= q_.max_transfers; ++t) {
      if (deadline_hit()) return;
      sweep(t);
    }
  }

  const network& net_;
  const triplet_store& store_;
  const mesh_table* mesh_;
  overlay_view overlay_;
  const query& q_;
  const search_options& opts_;

  std::uint32_t dep_node_ = 0;
  std::uint32_t arr_node_ = 0;
  double d_geo_ = 0.0;
  std::vector<std::uint16_t> rev_min_;
  std::unordered_map<hop_id, std::int64_t> typical0_;
  std::unordered_map<hop_id, std::int64_t> overlay_min_dur_;

  double bound_ = std::numeric_limits<double>::infinity();
  std::optional<itinerary> best_;
  std::optional<itinerary> next_dep_;
  search_stats stats_;
  std::int64_t window_s_ = 0;
  bool has_deadline_ = false;
  clock_type::time_point deadline_;
  bool abort_generation_ = false;
};

plan_result planner::run() {
  const auto started = clock_type::now();
  if (q_.dep >= net_.station_count() || q_.arr >= net_.station_count()) {
    throw validation_error("query references unknown station");
  }
  if (q_.dep == q_.arr) throw validation_error("origin equals destination");
  if (q_.max_transfers < 0 || q_.max_transfers > 7) {
    throw validation_error("max transfers out of range (0..7)");
  }
  if (q_.earliest_dep > net_.horizon_end) {
    throw validation_error("departure time past the network horizon");
  }

  if (q_.budget_ms >= 0) {
    has_deadline_ = true;
    deadline_ = started + std::chrono::milliseconds(q_.budget_ms);
  }

  dep_node_ = net_.node_of(q_.dep);
  arr_node_ = net_.node_of(q_.arr);
  stats_.overlay_epoch = overlay_->epoch();

  plan_result result;
  if (dep_node_ == arr_node_) {
    result.no_route = no_route_info{
        true, std::nullopt,
        "origin and destination share one station cluster (walking distance)"};
    result.stats = stats_;
    return result;
  }

  d_geo_ = node_geo(dep_node_, arr_node_);
  rev_min_ = min_boardings_to(net_, arr_node_);

  // overlay deltas can shrink rides below the baseline minimum
  for (const auto& h : net_.hops) {
    const auto* anns = overlay_->annotations_for(h.id);
    if (!anns) continue;
    for (const auto& a : *anns) {
      if (a.kind != annotation_kind::delay) continue;
      const auto base = net_.event_by_ordinal(h.id, a.ordinal);
      if (!base) continue;
      const std::int64_t eff = (base->arr + a.arr_delta_s) - (base->dep + a.dep_delta_s);
      if (eff <= 0) continue;
      auto [it, inserted] = overlay_min_dur_.try_emplace(h.id, eff);
      if (!inserted && eff < it->second) it->second = eff;
    }
  }

  // per-hop typical times for ordering, from the direct matrix when built
  if (store_.has_slice(0)) {
    store_.for_each_cell(0, [&](std::uint32_t, std::uint32_t,
                                const std::vector<triplet>& cell) {
      for (const auto& tp : cell) typical0_[tp.hop_seq[0]] = tp.typical_s;
    });
  }

  window_s_ = std::min(q_.initial_window_s, q_.max_window_s);
  run_sweeps();

  if (q_.flexible_window) {
    // Keep doubling while the best trip still wastes time waiting (or none
    // was found): an unproductive doubling is not a reason to stop before a
    // far-away departure comes into range. The cap bounds the loop.
    for (;;) {
      if (deadline_hit() || window_s_ >= q_.max_window_s) break;
      bool expand = false;
      if (!best_) {
        expand = true;
      } else {
        const std::int64_t threshold =
            std::max<std::int64_t>(3600, best_->elapsed_s / 4);
        if (best_->initial_wait_s > threshold) expand = true;
        for (std::size_t i = 1; !expand && i < best_->legs.size(); ++i) {
          if (best_->legs[i].wait_before_s > threshold) expand = true;
        }
      }
      if (!expand) break;
      window_s_ = std::min(window_s_ * 2, q_.max_window_s);
      run_sweeps();
    }
  }

  stats_.final_window_s = window_s_;
  stats_.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          clock_type::now() - started)
                          .count();

  if (best_ && next_dep_ && next_dep_->depart <= best_->depart) next_dep_.reset();
  result.best = best_;
  result.next_departure = next_dep_;
  if (!best_) {
    no_route_info info;
    const auto fwd = min_boardings_from(net_, dep_node_);
    info.reachable = fwd[arr_node_] != unreachable_level;
    if (mesh_) {
      info.mesh_min_transfers =
          mesh_->lookup(net_.stations[q_.dep].lat, net_.stations[q_.dep].lon,
                        net_.stations[q_.arr].lat, net_.stations[q_.arr].lon);
    }
    if (!info.reachable) {
      info.explanation = "destination is not reachable from origin (disconnected)";
    } else {
      const auto need = fwd[arr_node_] > 0 ? fwd[arr_node_] - 1 : 0;
      info.explanation = "no route within the given constraints; the pair needs >= " +
                         std::to_string(need) + " transfer(s) ignoring schedules";
    }
    result.no_route = std::move(info);
  }
  result.stats = stats_;
  return result;
}

}  // namespace

plan_result plan(const network& net, const triplet_store& store, const mesh_table* mesh,
                 const overlay_view& overlay, const query& q,
                 const search_options& opts) {
  planner p(net, store, mesh, overlay, q, opts);
  return p.run();
}

}  // namespace bbtime
