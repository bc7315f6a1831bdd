#include "bbtime/gtfs.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bbtime/timeutil.hpp"

namespace bbtime {

namespace {

// Minimal CSV: header row, quoted fields, CRLF and BOM tolerant.
class csv_file {
 public:
  explicit csv_file(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw io_error("missing GTFS file: " + path);
    std::string header;
    if (!std::getline(in_, header)) throw io_error("empty GTFS file: " + path);
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF &&
        static_cast<unsigned char>(header[1]) == 0xBB &&
        static_cast<unsigned char>(header[2]) == 0xBF) {
      header.erase(0, 3);
    }
    split(header, cols_);
    for (std::size_t i = 0; i < cols_.size(); ++i) index_[cols_[i]] = i;
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      if (line.empty() || line == "\r") continue;
      split(line, fields_);
      return true;
    }
    return false;
  }

  bool has(const std::string& col) const { return index_.count(col) != 0; }

  std::string get(const std::string& col) const {
    const auto it = index_.find(col);
    if (it == index_.end() || it->second >= fields_.size()) return {};
    return fields_[it->second];
  }

  const std::string& path() const { return path_; }

 private:
  static void split(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
  }

  std::ifstream in_;
  std::string path_;
  std::vector<std::string> cols_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> fields_;
};

mode mode_from_route_type(int rt) {
  if (rt >= 1100 && rt < 1200) return mode::plane;
  if (rt == 0 || rt == 1 || rt == 2 || rt == 5 || rt == 6 || rt == 7 || rt == 12) {
    return mode::train;
  }
  if (rt >= 100 && rt < 200) return mode::train;
  return mode::bus;
}

struct service_pattern {
  bool weekday[7] = {false, false, false, false, false, false, false};
  std::int64_t start_day = 0;
  std::int64_t end_day = 0;
  std::vector<std::int64_t> added;    // service days from calendar_dates
  std::vector<std::int64_t> removed;
};

struct stop_time_rec {
  std::int64_t arr = -1;
  std::int64_t dep = -1;
  station_id stop = invalid_station;
  int seq = 0;
};

struct frequency_rec {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t headway = 0;
};

// Converts a feed-local timestamp to UTC under the piecewise-constant offset
// sequence. Each rule segment is tried; out-of-segment candidates fall back
// to the base offset.
utc_seconds local_to_utc(std::int64_t local, const feed_config& cfg) {
  if (cfg.dst_rules.empty()) return local - cfg.utc_offset_s;
  std::int32_t offset = cfg.utc_offset_s;
  utc_seconds seg_start = std::numeric_limits<utc_seconds>::min();
  for (std::size_t i = 0; i <= cfg.dst_rules.size(); ++i) {
    const utc_seconds seg_end = i < cfg.dst_rules.size()
                                    ? cfg.dst_rules[i].switch_utc
                                    : std::numeric_limits<utc_seconds>::max();
    const utc_seconds candidate = local - offset;
    if (candidate >= seg_start && candidate < seg_end) return candidate;
    if (i < cfg.dst_rules.size()) {
      seg_start = cfg.dst_rules[i].switch_utc;
      offset = cfg.dst_rules[i].new_offset_s;
    }
  }
  return local - cfg.utc_offset_s;
}

void note_error(ingest_stats& stats, const std::string& what) {
  ++stats.record_errors;
  if (stats.error_samples.size() < 20) stats.error_samples.push_back(what);
}

}  // namespace

void load_gtfs(const feed_config& cfg, network_builder& builder, ingest_stats& stats) {
  const std::string dir = cfg.path;
  if (cfg.service_horizon_days < 1) throw validation_error("feed horizon must be >= 1 day");

  // stops
  std::unordered_map<std::string, station_id> stop_ids;
  {
    csv_file f(dir + "/stops.txt");
    while (f.next()) {
      const auto id = f.get("stop_id");
      if (id.empty()) {
        note_error(stats, "stops.txt: record without stop_id");
        continue;
      }
      double lat = 0.0, lon = 0.0;
      try {
        lat = std::stod(f.get("stop_lat"));
        lon = std::stod(f.get("stop_lon"));
      } catch (const std::exception&) {
        note_error(stats, "stops.txt: bad coordinates for stop " + id);
        continue;
      }
      auto name = f.get("stop_name");
      if (name.empty()) name = id;
      stop_ids[id] = builder.add_station(std::move(name), lat, lon, cfg.utc_offset_s);
      ++stats.stations;
    }
  }

  // routes: feed-local ids mapped onto dense global route ids
  std::unordered_map<std::string, route_id> route_ids;
  std::unordered_map<std::string, mode> route_modes;
  {
    csv_file f(dir + "/routes.txt");
    while (f.next()) {
      const auto rid = f.get("route_id");
      if (rid.empty()) continue;
      int rt = 3;
      try {
        if (!f.get("route_type").empty()) rt = std::stoi(f.get("route_type"));
      } catch (const std::exception&) {
      }
      const auto global = builder.allocate_route();
      route_ids[rid] = global;
      route_modes[rid] = mode_from_route_type(rt);
      std::string label = f.get("route_short_name");
      if (label.empty()) label = f.get("route_long_name");
      if (label.empty()) label = rid;
      builder.set_route(global, label, f.get("agency_id"));
    }
  }

  // calendar / calendar_dates
  std::unordered_map<std::string, service_pattern> services;
  {
    csv_file f(dir + "/calendar.txt");
    static const char* names[7] = {"monday", "tuesday",  "wednesday", "thursday",
                                   "friday", "saturday", "sunday"};
    while (f.next()) {
      const auto sid = f.get("service_id");
      if (sid.empty()) continue;
      service_pattern p;
      for (int i = 0; i < 7; ++i) p.weekday[i] = f.get(names[i]) == "1";
      try {
        p.start_day = days_from_civil(parse_yyyymmdd(f.get("start_date")));
        p.end_day = days_from_civil(parse_yyyymmdd(f.get("end_date")));
      } catch (const std::exception& e) {
        note_error(stats, std::string("calendar.txt: ") + e.what());
        continue;
      }
      services[sid] = p;
    }
  }
  {
    std::ifstream probe(dir + "/calendar_dates.txt");
    if (probe) {
      csv_file f(dir + "/calendar_dates.txt");
      while (f.next()) {
        const auto sid = f.get("service_id");
        if (sid.empty()) continue;
        std::int64_t day = 0;
        try {
          day = days_from_civil(parse_yyyymmdd(f.get("date")));
        } catch (const std::exception& e) {
          note_error(stats, std::string("calendar_dates.txt: ") + e.what());
          continue;
        }
        auto& p = services[sid];  // service may exist via calendar_dates only
        if (f.get("exception_type") == "1") {
          p.added.push_back(day);
        } else {
          p.removed.push_back(day);
        }
      }
    }
  }

  // trips
  struct trip_rec {
    std::string route;
    std::string service;
  };
  std::unordered_map<std::string, trip_rec> trips;
  std::vector<std::string> trip_order;
  {
    csv_file f(dir + "/trips.txt");
    while (f.next()) {
      const auto tid = f.get("trip_id");
      if (tid.empty()) continue;
      trips[tid] = {f.get("route_id"), f.get("service_id")};
      trip_order.push_back(tid);
    }
  }

  // stop_times grouped per trip
  std::unordered_map<std::string, std::vector<stop_time_rec>> stop_times;
  {
    csv_file f(dir + "/stop_times.txt");
    while (f.next()) {
      const auto tid = f.get("trip_id");
      if (tid.empty() || trips.find(tid) == trips.end()) {
        note_error(stats, "stop_times.txt: unknown trip " + tid);
        continue;
      }
      const auto sid = f.get("stop_id");
      const auto stop_it = stop_ids.find(sid);
      if (stop_it == stop_ids.end()) {
        note_error(stats, "stop_times.txt: unknown stop " + sid);
        continue;
      }
      stop_time_rec rec;
      rec.stop = stop_it->second;
      rec.arr = parse_gtfs_time(f.get("arrival_time"));
      rec.dep = parse_gtfs_time(f.get("departure_time"));
      if (rec.dep < 0) rec.dep = rec.arr;
      if (rec.arr < 0) rec.arr = rec.dep;
      if (rec.dep < 0) {
        note_error(stats, "stop_times.txt: bad time for trip " + tid);
        continue;
      }
      try {
        rec.seq = std::stoi(f.get("stop_sequence"));
      } catch (const std::exception&) {
        note_error(stats, "stop_times.txt: bad stop_sequence for trip " + tid);
        continue;
      }
      stop_times[tid].push_back(rec);
    }
  }
  for (auto& [tid, recs] : stop_times) {
    std::sort(recs.begin(), recs.end(),
              [](const stop_time_rec& a, const stop_time_rec& b) { return a.seq < b.seq; });
  }

  // frequencies (optional): expand template trips into explicit departures
  std::unordered_map<std::string, std::vector<frequency_rec>> frequencies;
  {
    std::ifstream probe(dir + "/frequencies.txt");
    if (probe) {
      csv_file f(dir + "/frequencies.txt");
      while (f.next()) {
        const auto tid = f.get("trip_id");
        const auto start = parse_gtfs_time(f.get("start_time"));
        const auto end = parse_gtfs_time(f.get("end_time"));
        std::int64_t headway = 0;
        try {
          headway = std::stoll(f.get("headway_secs"));
        } catch (const std::exception&) {
        }
        if (tid.empty() || start < 0 || end < 0 || headway <= 0) {
          note_error(stats, "frequencies.txt: bad record for trip " + tid);
          continue;
        }
        frequencies[tid].push_back({start, end, headway});
      }
    }
  }

  // horizon
  std::int64_t day0 = std::numeric_limits<std::int64_t>::max();
  if (!cfg.horizon_start.empty()) {
    day0 = days_from_civil(parse_yyyymmdd(cfg.horizon_start));
  } else {
    for (const auto& [sid, p] : services) {
      if (p.end_day > 0) day0 = std::min(day0, p.start_day);
      for (const auto d : p.added) day0 = std::min(day0, d);
    }
    if (day0 == std::numeric_limits<std::int64_t>::max()) day0 = 0;
  }
  const std::int64_t day_end = day0 + cfg.service_horizon_days;

  // expand service days and accumulate hop events
  std::map<std::tuple<route_id, station_id, station_id>, std::vector<raw_event>> hop_events;
  std::map<std::tuple<route_id, station_id, station_id>, mode> hop_mode;

  for (const auto& tid : trip_order) {
    const auto& tr = trips.at(tid);
    const auto st_it = stop_times.find(tid);
    if (st_it == stop_times.end() || st_it->second.size() < 2) continue;
    const auto svc_it = services.find(tr.service);
    if (svc_it == services.end()) {
      note_error(stats, "trips.txt: unknown service " + tr.service);
      continue;
    }
    const auto route_it = route_ids.find(tr.route);
    if (route_it == route_ids.end()) {
      note_error(stats, "trips.txt: unknown route " + tr.route);
      continue;
    }
    const auto& pattern = svc_it->second;
    const auto md = route_modes.at(tr.route);

    std::vector<std::int64_t> active_days;
    for (std::int64_t day = day0; day < day_end; ++day) {
      bool active = pattern.end_day > 0 && day >= pattern.start_day &&
                    day <= pattern.end_day && pattern.weekday[weekday_from_days(day)];
      if (std::find(pattern.added.begin(), pattern.added.end(), day) !=
          pattern.added.end()) {
        active = true;
      }
      if (std::find(pattern.removed.begin(), pattern.removed.end(), day) !=
          pattern.removed.end()) {
        active = false;
      }
      if (active) active_days.push_back(day);
    }
    if (active_days.empty()) continue;

    // departure offsets of this trip within a service day
    std::vector<std::int64_t> trip_starts{0};
    const auto freq_it = frequencies.find(tid);
    if (freq_it != frequencies.end()) {
      trip_starts.clear();
      const std::int64_t base = st_it->second.front().dep;
      for (const auto& fr : freq_it->second) {
        for (std::int64_t s = fr.start; s < fr.end; s += fr.headway) {
          trip_starts.push_back(s - base);
        }
      }
    }

    for (const auto day : active_days) {
      const std::int64_t midnight_local = day * 86400;
      for (const auto start_shift : trip_starts) {
        ++stats.trips_expanded;
        const auto& recs = st_it->second;
        for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
          const auto& a = recs[i];
          const auto& b = recs[i + 1];
          if (a.stop == b.stop) continue;
          const std::int64_t dep_local = midnight_local + a.dep + start_shift;
          const std::int64_t arr_local = midnight_local + b.arr + start_shift;
          if (arr_local <= dep_local) {
            note_error(stats, "stop_times.txt: non-increasing times in trip " + tid);
            continue;
          }
          const auto dep_utc = local_to_utc(dep_local, cfg);
          const auto arr_utc = local_to_utc(arr_local, cfg);
          if (arr_utc <= dep_utc) {
            note_error(stats, "offset switch collapses a ride in trip " + tid);
            continue;
          }
          hop_events[{route_it->second, a.stop, b.stop}].emplace_back(
              dep_utc, static_cast<std::uint32_t>(arr_utc - dep_utc));
          hop_mode[{route_it->second, a.stop, b.stop}] = md;
        }
      }
    }
  }

  for (auto& [key, events] : hop_events) {
    std::sort(events.begin(), events.end());
    // duplicate departure times across trips: keep the shortest ride
    std::vector<raw_event> merged;
    merged.reserve(events.size());
    for (const auto& e : events) {
      if (!merged.empty() && merged.back().first == e.first) {
        ++stats.duplicate_departures;
        merged.back().second = std::min(merged.back().second, e.second);
      } else {
        merged.push_back(e);
      }
    }
    const auto [route, from, to] = key;
    builder.add_scheduled_hop(from, to, route, hop_mode.at(key), merged);
    ++stats.hops;
    stats.events += merged.size();
  }

  // transfers.txt (optional): same-stop rows become station overrides
  {
    std::ifstream probe(dir + "/transfers.txt");
    if (probe) {
      csv_file f(dir + "/transfers.txt");
      while (f.next()) {
        const auto from = f.get("from_stop_id");
        const auto to = f.get("to_stop_id");
        if (from != to) continue;  // station-pair walk transfers live elsewhere
        const auto it = stop_ids.find(from);
        if (it == stop_ids.end()) {
          note_error(stats, "transfers.txt: unknown stop " + from);
          continue;
        }
        try {
          const auto secs = std::stoul(f.get("min_transfer_time"));
          builder.set_transfer_override(it->second, static_cast<std::uint32_t>(secs));
        } catch (const std::exception&) {
          note_error(stats, "transfers.txt: bad min_transfer_time for " + from);
        }
      }
    }
  }
}

feed_config parse_feed_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open feed config: " + path);
  feed_config cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "path") {
      cfg.path = value;
    } else if (key == "utc_offset_seconds") {
      cfg.utc_offset_s = std::stoi(value);
    } else if (key == "horizon_days") {
      cfg.service_horizon_days = std::stoi(value);
    } else if (key == "horizon_start") {
      cfg.horizon_start = value;
    } else if (key == "dst_rule") {
      const auto comma = value.find(',');
      if (comma == std::string::npos) {
        throw validation_error("dst_rule wants: switch_utc,new_offset");
      }
      cfg.dst_rules.push_back({std::stoll(value.substr(0, comma)),
                               std::stoi(value.substr(comma + 1))});
    } else if (!key.empty()) {
      throw validation_error("unknown feed config key: " + key);
    }
  }
  if (cfg.path.empty()) throw validation_error("feed config misses path=");
  std::sort(cfg.dst_rules.begin(), cfg.dst_rules.end(),
            [](const dst_rule& a, const dst_rule& b) { return a.switch_utc < b.switch_utc; });
  return cfg;
}

}  // namespace bbtime
