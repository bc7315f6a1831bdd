#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "bbtime/types.hpp"

namespace bbtime {

// One departure event of a hop. `ordinal` is the index within the hop's
// decoded departure list and is the stable identity used by the realtime
// overlay.
struct event {
  utc_seconds dep = 0;
  utc_seconds arr = 0;
  hop_id hop = invalid_hop;
  std::uint32_t ordinal = 0;

  std::uint32_t duration() const { return static_cast<std::uint32_t>(arr - dep); }
};

// A maximal run of departures with constant inter-departure gap and constant
// ride duration. count == 1 encodes a single irregular departure; periodicity
// is only exploited where the data shows it.
struct departure_block {
  utc_seconds base = 0;
  std::uint32_t period = 0;
  std::uint32_t count = 0;
  std::uint32_t duration = 0;

  utc_seconds last_dep() const {
    return base + static_cast<utc_seconds>(period) * (count - 1);
  }
  bool operator==(const departure_block&) const = default;
};

// (departure utc, ride duration seconds)
using raw_event = std::pair<utc_seconds, std::uint32_t>;

// Repetition-compressed list of departure events, strictly increasing in
// departure time. Lossless: decode(encode(L)) == L for every valid L.
class departure_list {
 public:
  departure_list() = default;

  // Events must be strictly ascending by departure time; durations > 0.
  // Throws validation_error otherwise. Runs shorter than three events stay
  // as single-departure blocks (a pair does not evidence a period).
  static departure_list encode(const std::vector<raw_event>& events);

  static departure_list from_blocks(std::vector<departure_block> blocks);

  std::vector<raw_event> decode() const;

  // Earliest event with dep >= t, or nullopt past the last departure.
  std::optional<event> at_or_after(utc_seconds t) const;

  std::optional<event> by_ordinal(std::uint32_t ordinal) const;

  // All events with t0 <= dep < t1, ascending. Decodes only touched blocks.
  void for_each_in_window(utc_seconds t0, utc_seconds t1,
                          const std::function<void(const event&)>& fn) const;

  std::uint32_t total_count() const { return total_; }
  bool empty() const { return total_ == 0; }
  utc_seconds first_departure() const;
  utc_seconds last_departure() const;
  utc_seconds last_arrival() const;
  std::uint32_t min_duration() const;

  const std::vector<departure_block>& blocks() const { return blocks_; }

  bool operator==(const departure_list& o) const { return blocks_ == o.blocks_; }

 private:
  void rebuild_ordinals();

  std::vector<departure_block> blocks_;
  std::vector<std::uint32_t> first_ordinal_;  // per block, prefix event count
  std::uint32_t total_ = 0;
};

}  // namespace bbtime
