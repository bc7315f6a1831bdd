#include "bbtime/timeutil.hpp"

#include <cstdio>

namespace bbtime {

std::int64_t days_from_civil(civil_date d) {
  const int y = d.year - (d.month <= 2);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

civil_date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned month = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (month <= 2)), month, day};
}

int weekday_from_days(std::int64_t days) {
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

civil_date parse_yyyymmdd(const std::string& s) {
  if (s.size() != 8) throw validation_error("bad date (want YYYYMMDD): " + s);
  civil_date d;
  d.year = std::stoi(s.substr(0, 4));
  d.month = static_cast<unsigned>(std::stoi(s.substr(4, 2)));
  d.day = static_cast<unsigned>(std::stoi(s.substr(6, 2)));
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
    throw validation_error("bad date: " + s);
  }
  return d;
}

utc_seconds parse_iso8601(const std::string& s) {
  int y = 0, mo = 0, da = 0, h = 0, mi = 0, se = 0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%n", &y, &mo, &da, &h, &mi, &se, &n) != 6 ||
      n == 0) {
    se = 0;
    n = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d%n", &y, &mo, &da, &h, &mi, &n) != 5 ||
        n == 0) {
      throw validation_error("bad timestamp (want YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM]): " + s);
    }
  }
  utc_seconds t = utc_midnight({y, static_cast<unsigned>(mo), static_cast<unsigned>(da)}) +
                  h * 3600 + mi * 60 + se;
  const std::string rest = s.substr(static_cast<std::size_t>(n));
  if (rest.empty() || rest == "Z") return t;
  int oh = 0, om = 0;
  char sign = 0;
  if (std::sscanf(rest.c_str(), "%c%d:%d", &sign, &oh, &om) == 3 &&
      (sign == '+' || sign == '-')) {
    const int off = oh * 3600 + om * 60;
    return sign == '+' ? t - off : t + off;
  }
  throw validation_error("bad timestamp offset: " + s);
}

std::int64_t parse_gtfs_time(const std::string& s) {
  int h = 0, m = 0, sec = 0;
  if (std::sscanf(s.c_str(), "%d:%d:%d", &h, &m, &sec) != 3) return -1;
  if (h < 0 || m < 0 || m > 59 || sec < 0 || sec > 59) return -1;
  return static_cast<std::int64_t>(h) * 3600 + m * 60 + sec;
}

std::string format_iso8601_utc(utc_seconds t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  const auto d = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", d.year, d.month,
                d.day, static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

}  // namespace bbtime
