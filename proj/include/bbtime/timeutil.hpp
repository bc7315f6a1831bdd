#pragma once

#include <cstdint>
#include <string>

#include "bbtime/types.hpp"

namespace bbtime {

struct civil_date {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31
};

// Days since the epoch for a proleptic Gregorian date (Hinnant's algorithm).
std::int64_t days_from_civil(civil_date d);
civil_date civil_from_days(std::int64_t days);

// 0 = Monday .. 6 = Sunday
int weekday_from_days(std::int64_t days);

inline utc_seconds utc_midnight(civil_date d) { return days_from_civil(d) * 86400; }

// "YYYYMMDD" (GTFS calendar dates)
civil_date parse_yyyymmdd(const std::string& s);

// "YYYY-MM-DDTHH:MM[:SS]" with optional trailing "Z" or "+HH:MM"/"-HH:MM"
// offset; no offset means UTC.
utc_seconds parse_iso8601(const std::string& s);

// "HH:MM:SS" or "H:MM:SS"; hours may exceed 23 (service-day overflow rolls
// into the next day). Returns seconds since local service midnight, or -1.
std::int64_t parse_gtfs_time(const std::string& s);

std::string format_iso8601_utc(utc_seconds t);

}  // namespace bbtime
