#include "bbtime/departures.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace bbtime {

departure_list departure_list::encode(const std::vector<raw_event>& events) {
  departure_list out;
  if (events.empty()) return out;

  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].second == 0) {
      throw validation_error("departure with zero duration");
    }
    if (i > 0 && events[i].first <= events[i - 1].first) {
      throw validation_error("departure times must be strictly ascending");
    }
  }

  std::size_t i = 0;
  const std::size_t n = events.size();
  while (i < n) {
    std::size_t run = 1;
    if (i + 1 < n && events[i + 1].second == events[i].second) {
      const utc_seconds gap = events[i + 1].first - events[i].first;
      run = 2;
      while (i + run < n && events[i + run].second == events[i].second &&
             events[i + run].first - events[i + run - 1].first == gap) {
        ++run;
      }
    }
    if (run >= 3) {
      const auto gap = static_cast<std::uint32_t>(events[i + 1].first - events[i].first);
      out.blocks_.push_back({events[i].first, gap, static_cast<std::uint32_t>(run),
                             events[i].second});
      i += run;
    } else {
      out.blocks_.push_back({events[i].first, 0, 1, events[i].second});
      i += 1;
    }
  }
  out.rebuild_ordinals();
  return out;
}

departure_list departure_list::from_blocks(std::vector<departure_block> blocks) {
  departure_list out;
  out.blocks_ = std::move(blocks);
  out.rebuild_ordinals();
  return out;
}

void departure_list::rebuild_ordinals() {
  first_ordinal_.clear();
  first_ordinal_.reserve(blocks_.size());
  std::uint32_t acc = 0;
  for (const auto& b : blocks_) {
    first_ordinal_.push_back(acc);
    acc += b.count;
  }
  total_ = acc;
}

std::vector<raw_event> departure_list::decode() const {
  std::vector<raw_event> out;
  out.reserve(total_);
  for (const auto& b : blocks_) {
    for (std::uint32_t k = 0; k < b.count; ++k) {
      out.emplace_back(b.base + static_cast<utc_seconds>(b.period) * k, b.duration);
    }
  }
  return out;
}

std::optional<event> departure_list::at_or_after(utc_seconds t) const {
  // first block whose last departure is >= t
  const auto it = std::partition_point(
      blocks_.begin(), blocks_.end(),
      [t](const departure_block& b) { return b.last_dep() < t; });
  if (it == blocks_.end()) return std::nullopt;
  const auto bi = static_cast<std::size_t>(it - blocks_.begin());
  const auto& b = *it;
  std::uint32_t k = 0;
  if (b.base < t) {
    // b.period > 0 here: a count==1 block with base < t has last_dep < t.
    k = static_cast<std::uint32_t>((t - b.base + b.period - 1) / b.period);
  }
  const utc_seconds dep = b.base + static_cast<utc_seconds>(b.period) * k;
  return event{dep, dep + b.duration, invalid_hop, first_ordinal_[bi] + k};
}

std::optional<event> departure_list::by_ordinal(std::uint32_t ordinal) const {
  if (ordinal >= total_) return std::nullopt;
  const auto it = std::partition_point(
      first_ordinal_.begin(), first_ordinal_.end(),
      [ordinal](std::uint32_t first) { return first <= ordinal; });
  const auto bi = static_cast<std::size_t>(it - first_ordinal_.begin()) - 1;
  const auto& b = blocks_[bi];
  const std::uint32_t k = ordinal - first_ordinal_[bi];
  const utc_seconds dep = b.base + static_cast<utc_seconds>(b.period) * k;
  return event{dep, dep + b.duration, invalid_hop, ordinal};
}

void departure_list::for_each_in_window(
    utc_seconds t0, utc_seconds t1,
    const std::function<void(const event&)>& fn) const {
  if (t0 >= t1) return;
  auto it = std::partition_point(
      blocks_.begin(), blocks_.end(),
      [t0](const departure_block& b) { return b.last_dep() < t0; });
  for (; it != blocks_.end() && it->base < t1; ++it) {
    const auto bi = static_cast<std::size_t>(it - blocks_.begin());
    const auto& b = *it;
    std::uint32_t k = 0;
    if (b.base < t0 && b.period > 0) {
      k = static_cast<std::uint32_t>((t0 - b.base + b.period - 1) / b.period);
    }
    for (; k < b.count; ++k) {
      const utc_seconds dep = b.base + static_cast<utc_seconds>(b.period) * k;
      if (dep >= t1) break;
      fn(event{dep, dep + b.duration, invalid_hop, first_ordinal_[bi] + k});
    }
  }
}

utc_seconds departure_list::first_departure() const {
  return blocks_.empty() ? 0 : blocks_.front().base;
}

utc_seconds departure_list::last_departure() const {
  return blocks_.empty() ? 0 : blocks_.back().last_dep();
}

utc_seconds departure_list::last_arrival() const {
  utc_seconds last = 0;
  for (const auto& b : blocks_) {
    last = std::max(last, b.last_dep() + static_cast<utc_seconds>(b.duration));
  }
  return last;
}

std::uint32_t departure_list::min_duration() const {
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  for (const auto& b : blocks_) best = std::min(best, b.duration);
  return best;
}

}  // namespace bbtime
