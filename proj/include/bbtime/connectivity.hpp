#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "bbtime/network.hpp"

namespace bbtime {

constexpr std::uint16_t unreachable_level = std::numeric_limits<std::uint16_t>::max();

// Schedule-free reachability from one origin node. Levels count scheduled
// boardings; unscheduled edges (walk/taxi/bicycle) are free within a level.
// The origin itself is excluded from the counts.
struct reach_profile {
  std::uint32_t origin = 0;
  std::uint32_t reachable_count = 0;
  std::vector<std::uint32_t> min_transfers_histogram;  // index = transfer count
};

// Sparse lower bound on minimum transfers between geographic mesh cells:
// entry(cell(a), cell(b)) <= exact minimum transfers for every station pair
// (a, b) of the two cells. Ordered cell pairs (graphs may be asymmetric).
class mesh_table {
 public:
  explicit mesh_table(double cell_deg = 0.5) : cell_deg_(cell_deg) {}

  double cell_deg() const { return cell_deg_; }

  void fold_min(std::uint32_t cell_a, std::uint32_t cell_b, std::uint16_t transfers) {
    auto [it, inserted] = bounds_.try_emplace(mesh_pair_key(cell_a, cell_b), transfers);
    if (!inserted && transfers < it->second) it->second = transfers;
  }

  // Lower bound on min transfers, or nullopt when unknown (callers must
  // treat unknown as "no bound").
  std::optional<std::uint16_t> lookup(double lat_a, double lon_a, double lat_b,
                                      double lon_b) const {
    const auto it = bounds_.find(mesh_pair_key(mesh_cell(lat_a, lon_a, cell_deg_),
                                               mesh_cell(lat_b, lon_b, cell_deg_)));
    if (it == bounds_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return bounds_.size(); }
  bool empty() const { return bounds_.empty(); }
  const std::unordered_map<std::uint64_t, std::uint16_t>& entries() const {
    return bounds_;
  }

 private:
  double cell_deg_;
  std::unordered_map<std::uint64_t, std::uint16_t> bounds_;
};

struct bfs_stats {
  std::uint64_t edges_relaxed = 0;
  std::uint64_t nodes_popped = 0;
};

// Per-node minimum boardings from `origin` (0-1 BFS: scheduled hops cost one
// boarding, unscheduled hops are free). unreachable_level where no path.
std::vector<std::uint16_t> min_boardings_from(const network& net, std::uint32_t origin,
                                              bfs_stats* stats = nullptr);

// Reverse variant: minimum boardings needed from each node TO `target`.
std::vector<std::uint16_t> min_boardings_to(const network& net, std::uint32_t target);

reach_profile profile_search(const network& net, std::uint32_t origin);

mesh_table build_mesh_table(const network& net, double cell_deg = 0.5);

std::string connectivity_report(const network& net);

}  // namespace bbtime
