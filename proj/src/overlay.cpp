#include "bbtime/overlay.hpp"

#include <fstream>
#include <sstream>

namespace bbtime {

effective_event overlay_snapshot::apply_to(const network&,
                                           const event& baseline) const {
  effective_event out;
  out.ev = baseline;
  const auto* anns = annotations_for(baseline.hop);
  if (!anns) return out;
  for (const auto& a : anns[0]) {
    if (a.ordinal != baseline.ordinal) continue;
    if (baseline.dep < a.valid_from || baseline.dep >= a.valid_to) continue;
    switch (a.kind) {
      case annotation_kind::delay:
        out.ev.dep += a.dep_delta_s;
        out.ev.arr += a.arr_delta_s;
        break;
      case annotation_kind::cancelled:
        out.rejected = true;
        break;
      case annotation_kind::fare:
        out.fare = a.fare_amount;
        break;
      case annotation_kind::seats:
        if (!a.seats_available) out.rejected = true;
        break;
    }
  }
  return out;
}

std::optional<effective_event> overlay_snapshot::effective_by_ordinal(
    const network& net, hop_id h, std::uint32_t ordinal) const {
  const auto base = net.event_by_ordinal(h, ordinal);
  if (!base) return std::nullopt;
  return apply_to(net, *base);
}

std::uint64_t overlay::apply(const network& net, const annotation& a) {
  if (a.hop >= net.hops.size()) throw validation_error("annotation on unknown hop");
  const auto& h = net.hops[a.hop];
  if (!h.scheduled() || a.ordinal >= h.departures.total_count()) {
    throw validation_error("annotation on unknown departure ordinal");
  }
  if (a.kind == annotation_kind::delay) {
    const auto base = *h.departures.by_ordinal(a.ordinal);
    if (base.arr + a.arr_delta_s <= base.dep + a.dep_delta_s) {
      throw validation_error("delay would make arrival precede departure");
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto next = std::make_shared<overlay_snapshot>(*current_);
  next->epoch_ = current_->epoch() + 1;
  auto& anns = next->by_hop_[a.hop];
  bool replaced = false;
  for (auto& existing : anns) {
    if (existing.ordinal == a.ordinal && existing.kind == a.kind) {
      existing = a;
      replaced = true;
      break;
    }
  }
  if (!replaced) anns.push_back(a);
  current_ = std::move(next);
  return current_->epoch();
}

std::uint64_t overlay::clear(hop_id h) {
  std::lock_guard<std::mutex> lock(mu_);
  auto next = std::make_shared<overlay_snapshot>(*current_);
  next->epoch_ = current_->epoch() + 1;
  if (h == invalid_hop) {
    next->by_hop_.clear();
  } else {
    next->by_hop_.erase(h);
  }
  current_ = std::move(next);
  return current_->epoch();
}

overlay_view overlay::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_;
}

namespace {

utc_seconds parse_valid_endpoint(const std::string& tok, bool from) {
  if (tok == "-") {
    return from ? std::numeric_limits<utc_seconds>::min()
                : std::numeric_limits<utc_seconds>::max();
  }
  return std::stoll(tok);
}

}  // namespace

annotation parse_annotation_line(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tok;
  std::string t;
  while (is >> t) tok.push_back(t);
  if (tok.size() < 4) throw validation_error("annotation line too short: " + line);

  annotation a;
  a.hop = static_cast<hop_id>(std::stoul(tok[0]));
  a.ordinal = static_cast<std::uint32_t>(std::stoul(tok[1]));
  const auto& kind = tok[2];
  std::size_t arg = 3;
  if (kind == "delay") {
    if (tok.size() != 7) throw validation_error("delay needs: dep_delta arr_delta from to");
    a.kind = annotation_kind::delay;
    a.dep_delta_s = static_cast<std::int32_t>(std::stol(tok[arg++]));
    a.arr_delta_s = static_cast<std::int32_t>(std::stol(tok[arg++]));
  } else if (kind == "cancelled") {
    if (tok.size() != 5) throw validation_error("cancelled needs: from to");
    a.kind = annotation_kind::cancelled;
  } else if (kind == "fare") {
    if (tok.size() != 7) throw validation_error("fare needs: amount currency from to");
    a.kind = annotation_kind::fare;
    a.fare_amount = std::stod(tok[arg++]);
    a.currency = tok[arg++];
  } else if (kind == "seats") {
    if (tok.size() != 6) throw validation_error("seats needs: 0|1 from to");
    a.kind = annotation_kind::seats;
    a.seats_available = tok[arg++] != "0";
  } else {
    throw validation_error("unknown annotation kind: " + kind);
  }
  a.valid_from = parse_valid_endpoint(tok[arg++], true);
  a.valid_to = parse_valid_endpoint(tok[arg++], false);
  return a;
}

std::size_t load_annotation_file(const std::string& path, const network& net,
                                 overlay& ov) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open annotation feed: " + path);
  std::size_t applied = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ov.apply(net, parse_annotation_line(line));
    ++applied;
  }
  return applied;
}

}  // namespace bbtime
