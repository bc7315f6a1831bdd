#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bbtime {

using station_id = std::uint32_t;
using hop_id = std::uint32_t;
using route_id = std::uint32_t;
using utc_seconds = std::int64_t;  // seconds since Unix epoch, UTC

constexpr station_id invalid_station = 0xffffffffu;
constexpr hop_id invalid_hop = 0xffffffffu;

enum class mode : std::uint8_t { bus = 0, train, plane, walk, taxi, bicycle };

constexpr bool is_unscheduled_mode(mode m) {
  return m == mode::walk || m == mode::taxi || m == mode::bicycle;
}

// Compact mode letters used in trip signatures (bicycle has no letter in the
// canonical set; 'C' is ours).
constexpr char mode_letter(mode m) {
  switch (m) {
    case mode::bus: return 'B';
    case mode::train: return 'T';
    case mode::plane: return 'P';
    case mode::walk: return 'W';
    case mode::taxi: return 'X';
    case mode::bicycle: return 'C';
  }
  return '?';
}

const char* mode_name(mode m);
bool mode_from_name(const std::string& s, mode& out);

// Contract/IO error taxonomy. CLI maps these to distinct exit codes.
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic 64-bit mixer for deriving per-task RNG seeds from stable keys.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ mix64(v));
}

}  // namespace bbtime
