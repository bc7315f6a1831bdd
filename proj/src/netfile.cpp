#include "bbtime/netfile.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace bbtime {

namespace {

constexpr char magic[4] = {'B', 'B', 'T', '1'};

class byte_writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  const std::string& data() const { return buf_; }

 private:
  void raw(const void* p, std::size_t n) {
    // Little-endian hosts only; byte order is part of the format.
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class byte_reader {
 public:
  byte_reader(const char* p, std::size_t n) : p_(p), end_(p + n) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(*take(1)); }
  std::uint16_t u16() { return read<std::uint16_t>(); }
  std::uint32_t u32() { return read<std::uint32_t>(); }
  std::uint64_t u64() { return read<std::uint64_t>(); }
  std::int32_t i32() { return read<std::int32_t>(); }
  std::int64_t i64() { return read<std::int64_t>(); }
  double f64() { return read<double>(); }
  std::string str() {
    const auto n = u32();
    return std::string(take(n), n);
  }
  bool done() const { return p_ == end_; }

 private:
  template <typename T>
  T read() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (p_ + n > end_) throw io_error("truncated network file section");
    const char* r = p_;
    p_ += n;
    return r;
  }
  const char* p_;
  const char* end_;
};

void write_section(std::ofstream& out, const char (&tag)[5], const byte_writer& w) {
  out.write(tag, 4);
  const std::uint64_t len = w.data().size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(w.data().data(), static_cast<std::streamsize>(len));
}

void write_triplet_section(std::ofstream& out, int t, const triplet_store& store) {
  byte_writer w;
  w.u64(store.pair_count(t));
  store.for_each_cell(t, [&](std::uint32_t dep, std::uint32_t arr,
                             const std::vector<triplet>& cell) {
    w.u32(dep);
    w.u32(arr);
    w.u16(static_cast<std::uint16_t>(cell.size()));
    for (const auto& tp : cell) {
      w.u8(static_cast<std::uint8_t>(tp.vias.size()));
      for (const auto v : tp.vias) w.u32(v);
      w.u8(static_cast<std::uint8_t>(tp.hop_seq.size()));
      for (const auto h : tp.hop_seq) w.u32(h);
      w.i64(tp.typical_s);
      w.i64(tp.min_s);
    }
  });
  const char tags[3][5] = {"TRP0", "TRP1", "TRP2"};
  write_section(out, tags[t], w);
}

}  // namespace

void save_network_file(const std::string& path, const network& net,
                       const triplet_store* store, const mesh_table* mesh) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write network file: " + path);
  out.write(magic, 4);

  {
    byte_writer w;
    w.u32(static_cast<std::uint32_t>(net.stations.size()));
    for (const auto& s : net.stations) {
      w.str(s.name);
      w.f64(s.lat);
      w.f64(s.lon);
      w.i32(s.tz_offset_s);
      w.u32(s.cluster);
    }
    write_section(out, "STAT", w);
  }
  {
    byte_writer w;
    std::vector<route_id> ids;
    ids.reserve(net.routes.size());
    for (const auto& [r, info] : net.routes) ids.push_back(r);
    std::sort(ids.begin(), ids.end());
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (const auto r : ids) {
      const auto& info = net.routes.at(r);
      w.u32(r);
      w.str(info.label);
      w.str(info.agency);
    }
    write_section(out, "ROUT", w);
  }
  {
    // Hop table references block ranges in the departure-block section.
    byte_writer hw;
    byte_writer bw;
    std::uint32_t block_cursor = 0;
    std::uint32_t total_blocks = 0;
    for (const auto& h : net.hops) total_blocks += h.departures.blocks().size();
    bw.u32(total_blocks);
    hw.u32(static_cast<std::uint32_t>(net.hops.size()));
    for (const auto& h : net.hops) {
      hw.u32(h.from);
      hw.u32(h.to);
      hw.u32(h.route);
      hw.u8(static_cast<std::uint8_t>(h.md));
      hw.i64(h.fixed_duration_s);
      hw.f64(h.route_distance_m);
      hw.f64(h.fare_estimate);
      hw.u32(block_cursor);
      hw.u32(static_cast<std::uint32_t>(h.departures.blocks().size()));
      for (const auto& b : h.departures.blocks()) {
        bw.i64(b.base);
        bw.u32(b.period);
        bw.u32(b.count);
        bw.u32(b.duration);
        ++block_cursor;
      }
    }
    write_section(out, "HOPS", hw);
    write_section(out, "DEPB", bw);
  }
  {
    byte_writer w;
    std::vector<std::pair<station_id, std::uint32_t>> overrides(
        net.transfer_override_s.begin(), net.transfer_override_s.end());
    std::sort(overrides.begin(), overrides.end());
    w.u32(static_cast<std::uint32_t>(overrides.size()));
    for (const auto& [s, secs] : overrides) {
      w.u32(s);
      w.u32(secs);
    }
    write_section(out, "XFER", w);
  }
  {
    byte_writer w;
    w.i64(net.horizon_begin);
    w.i64(net.horizon_end);
    write_section(out, "HRZN", w);
  }
  if (store) {
    for (int t = 0; t <= triplet_store::max_t; ++t) {
      if (store->has_slice(t)) write_triplet_section(out, t, *store);
    }
  }
  if (mesh) {
    byte_writer w;
    w.f64(mesh->cell_deg());
    std::vector<std::pair<std::uint64_t, std::uint16_t>> entries(
        mesh->entries().begin(), mesh->entries().end());
    std::sort(entries.begin(), entries.end());
    w.u64(entries.size());
    for (const auto& [k, v] : entries) {
      w.u64(k);
      w.u16(v);
    }
    write_section(out, "MESH", w);
  }
  if (!out) throw io_error("write failed: " + path);
}

network_file load_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open network file: " + path);
  char m[4];
  in.read(m, 4);
  if (!in || std::memcmp(m, magic, 4) != 0) {
    throw io_error("not a BBT1 network file: " + path);
  }

  network_file nf;
  std::vector<departure_block> blocks;
  struct hop_ref {
    std::uint32_t block_off;
    std::uint32_t block_count;
  };
  std::vector<hop_ref> hop_refs;
  bool have_stations = false;
  bool have_hops = false;
  bool have_horizon = false;

  for (;;) {
    char tag[4];
    in.read(tag, 4);
    if (!in) break;
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 8);
    if (!in) throw io_error("truncated section header");
    std::string payload(len, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(len));
    if (!in) throw io_error("truncated section payload");
    byte_reader r(payload.data(), payload.size());

    if (std::memcmp(tag, "STAT", 4) == 0) {
      const auto n = r.u32();
      nf.net.stations.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        auto& s = nf.net.stations[i];
        s.id = i;
        s.name = r.str();
        s.lat = r.f64();
        s.lon = r.f64();
        s.tz_offset_s = r.i32();
        s.cluster = r.u32();
      }
      have_stations = true;
    } else if (std::memcmp(tag, "ROUT", 4) == 0) {
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto id = r.u32();
        route_info info;
        info.label = r.str();
        info.agency = r.str();
        nf.net.routes[id] = std::move(info);
      }
    } else if (std::memcmp(tag, "HOPS", 4) == 0) {
      const auto n = r.u32();
      nf.net.hops.resize(n);
      hop_refs.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        auto& h = nf.net.hops[i];
        h.id = i;
        h.from = r.u32();
        h.to = r.u32();
        h.route = r.u32();
        h.md = static_cast<mode>(r.u8());
        h.fixed_duration_s = r.i64();
        h.route_distance_m = r.f64();
        h.fare_estimate = r.f64();
        hop_refs[i] = {r.u32(), r.u32()};
      }
      have_hops = true;
    } else if (std::memcmp(tag, "DEPB", 4) == 0) {
      const auto n = r.u32();
      blocks.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        blocks[i].base = r.i64();
        blocks[i].period = r.u32();
        blocks[i].count = r.u32();
        blocks[i].duration = r.u32();
      }
    } else if (std::memcmp(tag, "XFER", 4) == 0) {
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto s = r.u32();
        nf.net.transfer_override_s[s] = r.u32();
      }
    } else if (std::memcmp(tag, "HRZN", 4) == 0) {
      nf.net.horizon_begin = r.i64();
      nf.net.horizon_end = r.i64();
      have_horizon = true;
    } else if (std::memcmp(tag, "TRP", 3) == 0) {
      const int t = tag[3] - '0';
      if (t < 0 || t > triplet_store::max_t) continue;
      const auto cells = r.u64();
      for (std::uint64_t c = 0; c < cells; ++c) {
        const auto dep = r.u32();
        const auto arr = r.u32();
        const auto count = r.u16();
        for (std::uint16_t i = 0; i < count; ++i) {
          triplet tp;
          const auto vn = r.u8();
          tp.vias.resize(vn);
          for (auto& v : tp.vias) v = r.u32();
          const auto hn = r.u8();
          tp.hop_seq.resize(hn);
          for (auto& h : tp.hop_seq) h = r.u32();
          tp.typical_s = r.i64();
          tp.min_s = r.i64();
          nf.store.insert(t, dep, arr, std::move(tp));
        }
      }
      nf.store.mark_built(t);
    } else if (std::memcmp(tag, "MESH", 4) == 0) {
      mesh_table table(r.f64());
      const auto n = r.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto k = r.u64();
        const auto v = r.u16();
        table.fold_min(static_cast<std::uint32_t>(k >> 32),
                       static_cast<std::uint32_t>(k & 0xffffffffu), v);
      }
      nf.mesh = std::move(table);
    }
    // Unknown tags are skipped for forward compatibility.
  }

  if (!have_stations || !have_hops || !have_horizon) {
    throw io_error("network file misses required sections: " + path);
  }
  for (std::size_t i = 0; i < nf.net.hops.size(); ++i) {
    const auto& ref = hop_refs[i];
    if (ref.block_off + ref.block_count > blocks.size()) {
      throw io_error("hop references departure blocks out of range");
    }
    if (ref.block_count > 0) {
      nf.net.hops[i].departures = departure_list::from_blocks(std::vector<departure_block>(
          blocks.begin() + ref.block_off, blocks.begin() + ref.block_off + ref.block_count));
    }
  }
  nf.net.finalize();
  // Cells arrive pre-sorted and pre-capped; re-finalize only orders rows.
  nf.store.finalize(nf.net, false);
  return nf;
}

}  // namespace bbtime
