#include "bbtime/render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "bbtime/timeutil.hpp"

namespace bbtime {

std::string format_duration(std::int64_t seconds) {
  if (seconds < 0) seconds = 0;
  const auto days = seconds / 86400;
  const auto hours = (seconds % 86400) / 3600;
  const auto mins = (seconds % 3600) / 60;
  char buf[64];
  if (days > 0) {
    std::snprintf(buf, sizeof(buf), "%lldd %lldh %lld min", static_cast<long long>(days),
                  static_cast<long long>(hours), static_cast<long long>(mins));
  } else if (hours > 0) {
    std::snprintf(buf, sizeof(buf), "%lld hour%s %lld min", static_cast<long long>(hours),
                  hours == 1 ? "" : "s", static_cast<long long>(mins));
  } else {
    std::snprintf(buf, sizeof(buf), "%lld min", static_cast<long long>(mins));
  }
  return buf;
}

std::string format_distance_m(double meters) {
  char buf[32];
  if (meters < 1000.0) {
    std::snprintf(buf, sizeof(buf), "%d m", static_cast<int>(std::lround(meters)));
    return buf;
  }
  const double km = meters / 1000.0;
  std::snprintf(buf, sizeof(buf), km < 10.0 ? "%.2f" : "%.1f", km);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s + " Km";
}

std::string format_count(std::uint64_t n) {
  char buf[32];
  if (n >= 1000000) {
    std::snprintf(buf, sizeof(buf), "%.2f M", static_cast<double>(n) / 1e6);
  } else if (n >= 1000) {
    std::snprintf(buf, sizeof(buf), "%.2f K", static_cast<double>(n) / 1e3);
  } else {
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(n));
  }
  return buf;
}

std::string format_local_stamp(utc_seconds t, std::int32_t tz_offset_s) {
  const utc_seconds local = t + tz_offset_s;
  std::int64_t days = local / 86400;
  std::int64_t rem = local % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  const auto d = civil_from_days(days);
  const int hm = static_cast<int>(rem / 3600) * 100 + static_cast<int>((rem / 60) % 60);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02u.%d", d.year, d.month, d.day, hm);
  return buf;
}

namespace {

std::string coord_text(const station& s) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.7f,%.7f", s.lat, s.lon);
  return buf;
}

std::string route_label(const network& net, const hop& h) {
  const auto it = net.routes.find(h.route);
  if (it == net.routes.end()) return {};
  std::string label = it->second.label;
  if (!it->second.agency.empty()) label += " " + it->second.agency;
  return label;
}

}  // namespace

std::string render_itinerary(const network& net, const query& q,
                             const plan_result& result) {
  std::ostringstream os;
  const auto& from = net.stations[q.dep];
  const auto& to = net.stations[q.arr];
  os << "From: " << from.name << "\n" << coord_text(from) << "\n";
  os << "To: " << to.name << "\n" << coord_text(to) << "\n\n";

  if (!result.best) {
    os << "no route found";
    if (result.no_route) os << ": " << result.no_route->explanation;
    os << "\n";
    return os.str();
  }

  const auto& it = *result.best;
  double total_km = 0.0;
  for (const auto& leg : it.legs) total_km += leg.distance_m;
  os << "summary: " << format_duration(it.elapsed_s) << " "
     << format_distance_m(total_km) << " " << it.transfers << " stops";
  if (result.next_departure) {
    os << " next in "
       << format_duration(result.next_departure->depart - it.depart);
  }
  os << "\n";
  os << "modes: " << it.signature() << "\n\n";

  if (it.initial_wait_s > 60) {
    os << "departing " << format_duration(it.initial_wait_s)
       << " after the requested time\n\n";
  }

  for (std::size_t i = 0; i < it.legs.size(); ++i) {
    const auto& leg = it.legs[i];
    const auto& hp = net.hops[leg.hop];
    const auto& board = net.stations[leg.board_station];
    const auto& alight = net.stations[leg.alight_station];

    if (i > 0) {
      const auto& prev_alight = net.stations[it.legs[i - 1].alight_station];
      if (prev_alight.id != board.id) {
        const auto within = great_circle_m(prev_alight.lat, prev_alight.lon, board.lat,
                                           board.lon);
        os << board.name << " " << coord_text(board) << " within "
           << static_cast<int>(std::lround(within)) << " m\n";
      }
    }

    os << (i + 1) << ". " << format_local_stamp(leg.dep, board.tz_offset_s) << " ";
    if (i == 0) {
      os << board.name << " " << coord_text(board);
    } else if (leg.wait_before_s > 60) {
      os << "continue with " << format_duration(leg.wait_before_s) << " transfer time";
    } else {
      os << "continue";
    }
    os << "\n";

    os << mode_name(leg.md);
    const auto label = route_label(net, hp);
    if (!label.empty() && leg.md != mode::walk && leg.md != mode::taxi) {
      os << " " << label;
    }
    os << " " << format_duration(leg.arr - leg.dep) << " "
       << format_distance_m(leg.distance_m);
    if (leg.md == mode::walk || leg.md == mode::taxi) {
      const auto direct = great_circle_m(board.lat, board.lon, alight.lat, alight.lon);
      os << " (direct " << format_distance_m(direct) << ")";
    }
    if (leg.fare) {
      os << " fare " << *leg.fare;
    }
    os << "\n";
    os << format_local_stamp(leg.arr, alight.tz_offset_s) << " " << alight.name << " "
       << coord_text(alight) << "\n\n";
  }

  os << "evaluated " << format_count(result.stats.alternatives_evaluated)
     << " alternatives with " << format_count(result.stats.departures_scanned)
     << " departure times in " << result.stats.elapsed_ms << " milliseconds\n";
  if (result.stats.time_limited) os << "(search was time limited)\n";
  return os.str();
}

nlohmann::json plan_payload(const network&, const query& q,
                            const plan_result& result) {
  nlohmann::json j;
  j["query"] = {{"from", q.dep},
                {"to", q.arr},
                {"dep_after_utc", q.earliest_dep},
                {"max_transfers", q.max_transfers},
                {"max_walk_m", q.max_walk_m},
                {"flexible_window", q.flexible_window}};
  j["status"] = result.best ? "ok" : "no_route";

  if (result.best) {
    const auto& it = *result.best;
    nlohmann::json legs = nlohmann::json::array();
    for (const auto& leg : it.legs) {
      nlohmann::json l;
      l["hop"] = leg.hop;
      if (leg.event_ordinal) {
        l["ordinal"] = *leg.event_ordinal;
      } else {
        l["ordinal"] = nullptr;
      }
      l["board"] = leg.board_station;
      l["alight"] = leg.alight_station;
      l["dep_utc"] = leg.dep;
      l["arr_utc"] = leg.arr;
      l["wait_before_s"] = leg.wait_before_s;
      l["distance_m"] = leg.distance_m;
      l["mode"] = mode_name(leg.md);
      if (leg.fare) l["fare"] = *leg.fare;
      legs.push_back(std::move(l));
    }
    j["itinerary"] = {{"legs", std::move(legs)},
                      {"depart_utc", it.depart},
                      {"arrive_utc", it.arrive},
                      {"elapsed_s", it.elapsed_s},
                      {"cost", it.cost},
                      {"transfers", it.transfers},
                      {"scheduled_transfers", it.scheduled_transfers},
                      {"walk_m", it.walk_m},
                      {"initial_wait_s", it.initial_wait_s},
                      {"fares", it.fares},
                      {"signature", it.signature()}};
    j["cost_decomposition"] = {
        {"elapsed_s", it.elapsed_s},
        {"transfer_penalty", q.weights.transfer_s * it.scheduled_transfers},
        {"walk_penalty", q.weights.walk_s_per_m * it.walk_m},
        {"fare_penalty", q.weights.fare_s_per_unit * it.fares},
        {"initial_wait_penalty", q.weights.wait_initial *
                                     static_cast<double>(it.initial_wait_s)}};
  }
  if (result.next_departure) {
    j["next_departure_utc"] = result.next_departure->depart;
  }
  if (result.no_route) {
    nlohmann::json info;
    info["reachable"] = result.no_route->reachable;
    if (result.no_route->mesh_min_transfers) {
      info["mesh_min_transfers"] = *result.no_route->mesh_min_transfers;
    }
    info["explanation"] = result.no_route->explanation;
    j["no_route"] = std::move(info);
  }
  j["stats"] = {{"alternatives_evaluated", result.stats.alternatives_evaluated},
                {"departures_scanned", result.stats.departures_scanned},
                {"candidates_generated", result.stats.candidates_generated},
                {"pruned_bound", result.stats.pruned_bound},
                {"pruned_geo", result.stats.pruned_geo},
                {"time_limited", result.stats.time_limited},
                {"geo_pruned", result.stats.geo_pruned},
                {"sweeps", result.stats.sweeps},
                {"final_window_s", result.stats.final_window_s},
                {"elapsed_ms", result.stats.elapsed_ms},
                {"overlay_epoch", result.stats.overlay_epoch}};
  return j;
}

itinerary parse_itinerary(const network&, const nlohmann::json& payload) {
  if (!payload.contains("itinerary")) {
    throw validation_error("payload carries no itinerary");
  }
  const auto& ji = payload.at("itinerary");
  itinerary it;
  for (const auto& l : ji.at("legs")) {
    itinerary_leg leg;
    leg.hop = l.at("hop").get<hop_id>();
    if (!l.at("ordinal").is_null()) {
      leg.event_ordinal = l.at("ordinal").get<std::uint32_t>();
    }
    leg.board_station = l.at("board").get<station_id>();
    leg.alight_station = l.at("alight").get<station_id>();
    leg.dep = l.at("dep_utc").get<utc_seconds>();
    leg.arr = l.at("arr_utc").get<utc_seconds>();
    leg.wait_before_s = l.at("wait_before_s").get<std::int64_t>();
    leg.distance_m = l.at("distance_m").get<double>();
    mode m;
    if (!mode_from_name(l.at("mode").get<std::string>(), m)) {
      throw validation_error("unknown mode in payload");
    }
    leg.md = m;
    if (l.contains("fare")) leg.fare = l.at("fare").get<double>();
    it.legs.push_back(std::move(leg));
  }
  it.depart = ji.at("depart_utc").get<utc_seconds>();
  it.arrive = ji.at("arrive_utc").get<utc_seconds>();
  it.elapsed_s = ji.at("elapsed_s").get<std::int64_t>();
  it.cost = ji.at("cost").get<double>();
  it.transfers = ji.at("transfers").get<int>();
  it.scheduled_transfers = ji.at("scheduled_transfers").get<int>();
  it.walk_m = ji.at("walk_m").get<double>();
  it.initial_wait_s = ji.at("initial_wait_s").get<std::int64_t>();
  it.fares = ji.at("fares").get<double>();
  return it;
}

}  // namespace bbtime
