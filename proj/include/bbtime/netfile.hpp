#pragma once

#include <optional>
#include <string>

#include "bbtime/connectivity.hpp"
#include "bbtime/network.hpp"
#include "bbtime/triplets.hpp"

namespace bbtime {

// Sectioned binary container, magic "BBT1", little-endian. Sections are
// tagged and length-prefixed; readers skip unknown tags. The trailing magic
// digit is the format version.
//
//   file    := "BBT1" section*
//   section := tag[4] payload_len:u64 payload
//
// Section tags: STAT (station table), ROUT (route labels), HOPS (hop
// table), DEPB (departure blocks), XFER (transfer-time overrides), HRZN
// (horizon), TRP0/TRP1/TRP2 (fragment matrices per T), MESH (transfer
// lower-bound mesh). Fields are written in fixed order with no padding, so
// identical inputs produce byte-identical files.
struct network_file {
  network net;
  triplet_store store;
  std::optional<mesh_table> mesh;
};

void save_network_file(const std::string& path, const network& net,
                       const triplet_store* store = nullptr,
                       const mesh_table* mesh = nullptr);

network_file load_network_file(const std::string& path);

}  // namespace bbtime
