#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bbtime/network.hpp"

namespace bbtime {

enum class annotation_kind : std::uint8_t { delay = 0, cancelled, fare, seats };

// Non-destructive per-departure annotation. Identity is (hop, ordinal within
// the baseline decoded list, kind); re-applying the same key replaces.
struct annotation {
  hop_id hop = invalid_hop;
  std::uint32_t ordinal = 0;
  annotation_kind kind = annotation_kind::delay;
  std::int32_t dep_delta_s = 0;  // delay
  std::int32_t arr_delta_s = 0;  // delay
  double fare_amount = 0.0;      // fare
  std::string currency;          // fare
  bool seats_available = true;   // seats
  utc_seconds valid_from = std::numeric_limits<utc_seconds>::min();
  utc_seconds valid_to = std::numeric_limits<utc_seconds>::max();
};

// Baseline event with annotations applied.
struct effective_event {
  event ev;
  bool rejected = false;  // cancelled or no seats
  std::optional<double> fare;
};

// Immutable annotation index; queries hold one for their whole run so
// writes applied mid-query cannot affect it.
class overlay_snapshot {
 public:
  std::uint64_t epoch() const { return epoch_; }
  bool empty() const { return by_hop_.empty(); }

  bool hop_annotated(hop_id h) const { return by_hop_.count(h) != 0; }
  const std::vector<annotation>* annotations_for(hop_id h) const {
    const auto it = by_hop_.find(h);
    return it == by_hop_.end() ? nullptr : &it->second;
  }

  // Applies every annotation matching (hop, ordinal) whose validity window
  // contains the baseline departure.
  effective_event apply_to(const network& net, const event& baseline) const;

  std::optional<effective_event> effective_by_ordinal(const network& net, hop_id h,
                                                      std::uint32_t ordinal) const;

 private:
  friend class overlay;
  std::uint64_t epoch_ = 0;
  std::unordered_map<hop_id, std::vector<annotation>> by_hop_;
};

using overlay_view = std::shared_ptr<const overlay_snapshot>;

// Copy-on-write annotation store. Writers serialize; epoch advance is atomic
// from the readers' perspective (they keep whole snapshots).
class overlay {
 public:
  overlay() : current_(std::make_shared<overlay_snapshot>()) {}

  // Validates the target event exists; same-key re-apply replaces.
  std::uint64_t apply(const network& net, const annotation& a);

  // Removes annotations for one hop, or all when hop == invalid_hop.
  std::uint64_t clear(hop_id h = invalid_hop);

  overlay_view snapshot() const;

 private:
  mutable std::mutex mu_;
  overlay_view current_;
};

// Line format: `hop ordinal kind [args] valid_from valid_to` with '-' for an
// unbounded validity endpoint. Kinds: `delay <dep_delta> <arr_delta>`,
// `cancelled`, `fare <amount> <currency>`, `seats <0|1>`.
annotation parse_annotation_line(const std::string& line);

std::size_t load_annotation_file(const std::string& path, const network& net,
                                 overlay& ov);

}  // namespace bbtime
