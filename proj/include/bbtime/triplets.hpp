#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bbtime/geogate.hpp"
#include "bbtime/network.hpp"

namespace bbtime {

// A precomputed trip fragment: a fixed hop path between two nodes with a
// typical and a minimum end-to-end time. The search treats fragments as
// single segments.
struct triplet {
  std::vector<std::uint32_t> vias;  // via nodes, empty for direct fragments
  std::vector<hop_id> hop_seq;      // transfers + 1 hops, a connected path
  std::int64_t typical_s = 0;
  std::int64_t min_s = 0;
};

struct estimator_config {
  std::uint32_t sample_count = 64;
  std::int64_t sample_horizon_s = 14 * 86400;
  std::int64_t per_sample_span_s = 3 * 86400;
  std::uint64_t rng_seed = 1;
  utc_seconds horizon_start = 0;

  // Samples that stray from the mean by more than this are dropped before
  // the final average. Suppresses traffic-day spikes without emptying the
  // sample set.
  std::int64_t outlier_threshold(std::int64_t mean) const {
    const std::int64_t half = mean / 2;
    return half > 7200 ? half : 7200;
  }
};

struct trip_times {
  utc_seconds board = 0;
  utc_seconds arrive = 0;
  std::int64_t total() const { return arrive - board; }
};

struct typical_time {
  std::int64_t typical_s = 0;
  std::int64_t min_s = 0;
};

// Earliest-arrival event with dep >= ready. Scans past the first candidate
// while later departures could still overtake it (durations may vary within
// one list).
std::optional<event> best_arrival_at_or_after(const network& net, hop_id h,
                                              utc_seconds ready);

// Forward earliest-feasible chain over `legs` starting at t_dep: board the
// first leg at the earliest event >= t_dep, chain each next leg at the
// earliest event >= arrival + min transfer (+ intra-cluster displacement).
// Infeasible when no chain arrives within t_dep + span.
std::optional<trip_times> min_trip_time(const network& net,
                                        std::span<const hop_id> legs,
                                        utc_seconds t_dep, std::int64_t span);

// Typical end-to-end time: sample_count start times are drawn as
// horizon_start + (n-th mt19937_64(rng_seed) output mod sample_horizon_s);
// each feasible sample contributes its min_trip_time total. The result is
// the outlier-trimmed mean plus the global minimum over feasible samples.
// nullopt when no sample is feasible.
std::optional<typical_time> estimate_typical_time(const network& net,
                                                  std::span<const hop_id> legs,
                                                  const estimator_config& cfg);

// Sparse per-T matrices of fragments, keyed by (dep node, arr node). Lists
// are sorted ascending by typical time and truncated to a per-pair cap that
// grows with endpoint connectivity (hubs keep more alternatives).
class triplet_store {
 public:
  static constexpr int max_t = 2;

  bool has_slice(int t) const { return built_[t]; }
  void mark_built(int t) { built_[t] = true; }

  void insert(int t, std::uint32_t dep, std::uint32_t arr, triplet tp);

  const std::vector<triplet>* find(int t, std::uint32_t dep, std::uint32_t arr) const;

  // Arrival nodes with entries for this departure node, ascending.
  const std::vector<std::uint32_t>& row(int t, std::uint32_t dep) const;

  // Sorts cells by (typical, hop sequence), deduplicates by hop sequence,
  // applies the per-pair cap, sorts row indexes. Must be called after
  // inserts and before queries.
  void finalize(const network& net, bool apply_cap = true);

  std::uint64_t pair_count(int t) const;
  std::uint64_t triplet_count(int t) const;

  static std::uint32_t pair_cap(const network& net, std::uint32_t dep,
                                std::uint32_t arr);

  // Deterministic iteration for serialization: ascending (dep, arr).
  void for_each_cell(int t,
                     const std::function<void(std::uint32_t dep, std::uint32_t arr,
                                              const std::vector<triplet>&)>& fn) const;

 private:
  static std::uint64_t key(std::uint32_t dep, std::uint32_t arr) {
    return (static_cast<std::uint64_t>(dep) << 32) | arr;
  }
  struct slice {
    std::unordered_map<std::uint64_t, std::vector<triplet>> cells;
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> rows;
  };
  slice slices_[max_t + 1];
  bool built_[max_t + 1] = {false, false, false};
  static const std::vector<std::uint32_t> empty_row_;
};

struct precompute_config {
  estimator_config est;
  geo_gate gate;
  unsigned threads = 1;
};

// T=0: one fragment per direct hop (all modes), typical/min from the
// estimator applied to the single leg.
void build_direct_matrix(const network& net, const precompute_config& cfg,
                         triplet_store& store);

// T in {1, 2}: enumerate via candidates over scheduled hops through
// adjacency composition (T=2 composes T=1 rows with direct hops in both
// orders), pre-filtered by the geo gate on cumulative route distance.
void build_triplets(const network& net, int t, const precompute_config& cfg,
                    triplet_store& store);

// Materialized min transfer seconds for every in/out hop pair sharing a
// station.
std::unordered_map<std::uint64_t, std::uint32_t> min_transfer_pair_table(
    const network& net);

std::string precompute_report(const network& net, const triplet_store& store,
                              double wall_seconds);

}  // namespace bbtime
