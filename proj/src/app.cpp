#include "bbtime/app.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstring>
#include <sstream>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "bbtime/gtfs.hpp"
#include "bbtime/multimodal.hpp"
#include "bbtime/render.hpp"
#include "bbtime/synth.hpp"
#include "bbtime/timeutil.hpp"

namespace bbtime::app {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

geo_gate make_gate(double ground, double air) {
  if (ground <= 0.0 || air <= 0.0) return geo_gate::disabled();
  return geo_gate{ground, air, true};
}

}  // namespace

station_id resolve_station(const network& net, const std::string& text) {
  if (text.empty()) throw validation_error("empty station reference");

  // exact numeric id
  if (std::all_of(text.begin(), text.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    const auto id = static_cast<station_id>(std::stoul(text));
    if (id >= net.station_count()) {
      throw validation_error("unknown station id: " + text);
    }
    return id;
  }

  // "lat,lon" -> nearest station
  {
    double lat = 0.0, lon = 0.0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf%c", &lat, &lon, &extra) == 2) {
      station_id best = invalid_station;
      double best_d = std::numeric_limits<double>::max();
      for (const auto& s : net.stations) {
        const double d = great_circle_m(lat, lon, s.lat, s.lon);
        if (d < best_d) {
          best_d = d;
          best = s.id;
        }
      }
      if (best == invalid_station) throw validation_error("network has no stations");
      return best;
    }
  }

  // unique name substring (case-insensitive)
  const auto needle = lower(text);
  std::vector<station_id> matches;
  for (const auto& s : net.stations) {
    if (lower(s.name).find(needle) != std::string::npos) matches.push_back(s.id);
  }
  if (matches.size() == 1) return matches[0];
  if (matches.empty()) throw validation_error("no station matches '" + text + "'");
  std::string msg = "ambiguous station '" + text + "', candidates:";
  for (std::size_t i = 0; i < std::min<std::size_t>(matches.size(), 8); ++i) {
    msg += " [" + std::to_string(matches[i]) + "] " + net.stations[matches[i]].name + ";";
  }
  throw validation_error(msg);
}

cost_weights parse_weights(const std::string& spec) {
  cost_weights w;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw validation_error("weights want k=v pairs");
    const auto key = item.substr(0, eq);
    const double value = std::stod(item.substr(eq + 1));
    if (value < 0.0) throw validation_error("weights must be >= 0");
    if (key == "transfer_s") w.transfer_s = value;
    else if (key == "walk_s_per_m") w.walk_s_per_m = value;
    else if (key == "taxi_s_per_km") w.taxi_s_per_km = value;
    else if (key == "fare_s_per_unit") w.fare_s_per_unit = value;
    else if (key == "wait_initial") w.wait_initial = value;
    else throw validation_error("unknown weight key: " + key);
  }
  return w;
}

query build_query(const network& net, const plan_args& args) {
  query q;
  q.dep = resolve_station(net, args.from);
  q.arr = resolve_station(net, args.to);
  q.earliest_dep = args.dep_after.empty() ? net.horizon_begin
                                          : parse_iso8601(args.dep_after);
  if (args.max_walk_m) q.max_walk_m = *args.max_walk_m;
  if (args.budget_ms) q.budget_ms = *args.budget_ms;
  if (args.tmax) q.max_transfers = *args.tmax;
  if (args.flex) q.flexible_window = *args.flex;
  if (!args.weights.empty()) q.weights = parse_weights(args.weights);
  return q;
}

int cmd_build(const build_args& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.out_file.empty()) throw validation_error("build needs an output file");
    network net;
    bool have_net = false;

    if (!args.synth_spec.empty()) {
      auto spec = parse_generator_spec(args.synth_spec);
      spec.seed = args.seed;
      net = generate_synthetic(spec);
      have_net = true;
    }
    if (!args.feed_configs.empty() || !args.gtfs_dirs.empty()) {
      network_builder b;
      ingest_stats stats;
      for (const auto& cfg_path : args.feed_configs) {
        load_gtfs(parse_feed_config(cfg_path), b, stats);
      }
      for (const auto& dir : args.gtfs_dirs) {
        feed_config cfg;
        cfg.path = dir;
        load_gtfs(cfg, b, stats);
      }
      net = b.build();
      have_net = true;
      if (stats.record_errors > 0) {
        err << stats.record_errors << " record error(s) while loading feeds\n";
        for (const auto& e : stats.error_samples) err << "  " << e << "\n";
      }
    }
    if (!have_net) throw validation_error("build needs --synth or GTFS input");

    if (!args.taxi_config.empty() || args.auto_taxi) {
      multimodal_config cfg;
      if (!args.taxi_config.empty()) cfg = parse_multimodal_config(args.taxi_config);
      if (args.auto_taxi) cfg.auto_taxi = true;
      net = add_taxi_edges(net, cfg);
    }
    if (args.add_walk) {
      multimodal_config cfg;
      cfg.max_walk_pair_m = args.max_walk_pair_m;
      net = add_walk_edges(net, cfg);
    }
    if (args.cluster_radius_m > 0.0) {
      net = cluster_stations(net, args.cluster_radius_m);
    }

    save_network_file(args.out_file, net);
    std::uint64_t events = 0;
    for (const auto& h : net.hops) events += h.departures.total_count();
    out << "wrote " << args.out_file << ": " << net.station_count() << " stations, "
        << net.hop_count() << " hops, " << events << " departures\n";
    return exit_ok;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const io_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
}

int cmd_precompute(const precompute_args& args, std::ostream& out, std::ostream& err) {
  try {
    auto nf = load_network_file(args.net_file);
    const auto started = std::chrono::steady_clock::now();

    precompute_config cfg;
    cfg.est.sample_count = args.samples;
    cfg.est.rng_seed = args.seed;
    cfg.est.horizon_start = nf.net.horizon_begin;
    cfg.gate = make_gate(args.geo_ratio_ground, args.geo_ratio_air);
    cfg.threads = args.threads == 0 ? std::thread::hardware_concurrency() : args.threads;
    if (cfg.threads == 0) cfg.threads = 1;

    triplet_store store;
    build_direct_matrix(nf.net, cfg, store);
    auto ts = args.t_list;
    std::sort(ts.begin(), ts.end());
    for (const auto t : ts) build_triplets(nf.net, t, cfg, store);

    const auto mesh = build_mesh_table(nf.net, args.mesh_cell_deg);
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();

    const auto& target = args.out_file.empty() ? args.net_file : args.out_file;
    save_network_file(target, nf.net, &store, &mesh);
    out << precompute_report(nf.net, store, wall);
    out << "wrote " << target << "\n";
    return exit_ok;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const io_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
}

int cmd_plan(const plan_args& args, std::ostream& out, std::ostream& err) {
  try {
    auto nf = load_network_file(args.net_file);
    overlay ov;
    if (!args.overlay_file.empty()) {
      load_annotation_file(args.overlay_file, nf.net, ov);
    }
    const auto q = build_query(nf.net, args);
    search_options opts;
    opts.gate = make_gate(args.geo_ratio_ground, args.geo_ratio_air);
    const auto result = plan(nf.net, nf.store, nf.mesh ? &*nf.mesh : nullptr,
                             ov.snapshot(), q, opts);
    if (args.json) {
      out << plan_payload(nf.net, q, result).dump() << "\n";
    } else {
      out << render_itinerary(nf.net, q, result);
    }
    return result.best ? exit_ok : exit_no_route;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const io_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
}

int cmd_diagnose(const std::string& net_file, std::ostream& out, std::ostream& err) {
  try {
    const auto nf = load_network_file(net_file);
    out << connectivity_report(nf.net);
    return exit_ok;
  } catch (const io_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
}

query_server::query_server(network_file nf, search_options opts)
    : nf_(std::move(nf)), opts_(opts) {}

query_server::~query_server() { stop(); }

std::uint16_t query_server::start(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw io_error("cannot create server socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw io_error("cannot bind server port " + std::to_string(port));
  }
  if (::listen(listen_fd_, 16) != 0) throw io_error("cannot listen on server socket");
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return ntohs(addr.sin_port);
}

void query_server::stop() {
  if (!running_.exchange(false)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  {
    // unblock workers stuck in recv on open connections
    std::lock_guard<std::mutex> lock(clients_mu_);
    for (const int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  if (acceptor_.joinable()) acceptor_.join();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
}

void query_server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;
    {
      std::lock_guard<std::mutex> lock(clients_mu_);
      client_fds_.push_back(fd);
    }
    workers_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void query_server::handle_connection(int fd) {
  std::string buffer;
  char chunk[4096];
  while (running_) {
    const auto n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    for (;;) {
      const auto nl = buffer.find('\n');
      if (nl == std::string::npos) break;
      const auto line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.empty()) continue;
      const auto response = handle_request(line) + "\n";
      std::size_t sent = 0;
      while (sent < response.size()) {
        const auto m = ::send(fd, response.data() + sent, response.size() - sent, 0);
        if (m <= 0) break;
        sent += static_cast<std::size_t>(m);
      }
    }
  }
  ::close(fd);
}

std::string query_server::handle_request(const std::string& line) {
  try {
    const auto req = nlohmann::json::parse(line);
    const auto cmd = req.value("cmd", "");
    if (cmd == "plan") {
      plan_args args;
      args.from = req.value("from", "");
      args.to = req.value("to", "");
      args.dep_after = req.value("dep_after", "");
      if (req.contains("max_walk_m")) args.max_walk_m = req["max_walk_m"].get<double>();
      if (req.contains("budget_ms")) {
        args.budget_ms = req["budget_ms"].get<std::int64_t>();
      }
      if (req.contains("tmax")) args.tmax = req["tmax"].get<int>();
      if (req.contains("flex")) args.flex = req["flex"].get<bool>();
      if (req.contains("weights")) args.weights = req["weights"].get<std::string>();
      const auto q = build_query(nf_.net, args);
      const auto result = plan(nf_.net, nf_.store, nf_.mesh ? &*nf_.mesh : nullptr,
                               overlay_.snapshot(), q, opts_);
      return plan_payload(nf_.net, q, result).dump();
    }
    if (cmd == "overlay") {
      const auto epoch =
          overlay_.apply(nf_.net, parse_annotation_line(req.at("line").get<std::string>()));
      return nlohmann::json{{"status", "ok"}, {"epoch", epoch}}.dump();
    }
    if (cmd == "overlay_clear") {
      const auto epoch = req.contains("hop")
                             ? overlay_.clear(req["hop"].get<hop_id>())
                             : overlay_.clear();
      return nlohmann::json{{"status", "ok"}, {"epoch", epoch}}.dump();
    }
    return nlohmann::json{{"status", "error"}, {"error", "unknown cmd"}}.dump();
  } catch (const std::exception& e) {
    return nlohmann::json{{"status", "error"}, {"error", e.what()}}.dump();
  }
}

}  // namespace bbtime::app
