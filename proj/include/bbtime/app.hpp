#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "bbtime/netfile.hpp"
#include "bbtime/overlay.hpp"
#include "bbtime/search.hpp"

namespace bbtime::app {

// Exit codes: 0 success, 2 validation error, 3 no route, 4 internal error.
constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_no_route = 3;
constexpr int exit_internal = 4;

struct build_args {
  std::vector<std::string> feed_configs;  // key-value feed config files
  std::vector<std::string> gtfs_dirs;     // shorthand: offset 0, 14 days
  std::string synth_spec;
  bool add_walk = false;
  double max_walk_pair_m = 1500.0;
  std::string taxi_config;
  bool auto_taxi = false;
  double cluster_radius_m = 0.0;
  std::uint64_t seed = 1;
  std::string out_file;
};

struct precompute_args {
  std::string net_file;
  std::vector<int> t_list{1, 2};
  std::uint32_t samples = 64;
  std::uint64_t seed = 1;
  double geo_ratio_ground = 2.5;  // <= 0 disables the gate
  double geo_ratio_air = 4.0;
  double mesh_cell_deg = 0.5;
  unsigned threads = 0;  // 0 = hardware
  std::string out_file;  // empty = rewrite in place
};

struct plan_args {
  std::string net_file;
  std::string from;
  std::string to;
  std::string dep_after;  // ISO 8601
  std::optional<double> max_walk_m;
  std::optional<std::int64_t> budget_ms;
  std::optional<int> tmax;
  std::optional<bool> flex;
  bool json = false;
  std::string weights;  // k=v,...
  std::string overlay_file;
  double geo_ratio_ground = 2.5;
  double geo_ratio_air = 4.0;
};

int cmd_build(const build_args& args, std::ostream& out, std::ostream& err);
int cmd_precompute(const precompute_args& args, std::ostream& out, std::ostream& err);
int cmd_plan(const plan_args& args, std::ostream& out, std::ostream& err);
int cmd_diagnose(const std::string& net_file, std::ostream& out, std::ostream& err);

// Resolution precedence: exact numeric id, then unique case-insensitive name
// substring, then "lat,lon" nearest station. Ambiguity is an error carrying
// the candidate list.
station_id resolve_station(const network& net, const std::string& text);

cost_weights parse_weights(const std::string& spec);

query build_query(const network& net, const plan_args& args);

// Newline-delimited JSON protocol on a local TCP socket. Requests:
//   {"cmd":"plan", "from":..., "to":..., "dep_after":..., ...}
//   {"cmd":"overlay", "line":"<annotation feed line>"}
//   {"cmd":"overlay_clear"} | {"cmd":"overlay_clear","hop":N}
// One JSON response per request; plan responses equal cmd_plan --json
// payloads. Malformed requests get {"status":"error",...} and the
// connection stays open.
class query_server {
 public:
  query_server(network_file nf, search_options opts);
  ~query_server();

  // Binds 127.0.0.1:port (0 picks a free port) and serves until stop().
  std::uint16_t start(std::uint16_t port);
  void stop();

  overlay& live_overlay() { return overlay_; }

 private:
  void accept_loop();
  void handle_connection(int fd);
  std::string handle_request(const std::string& line);

  network_file nf_;
  search_options opts_;
  overlay overlay_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::vector<std::thread> workers_;
  std::mutex clients_mu_;
  std::vector<int> client_fds_;
};

}  // namespace bbtime::app
