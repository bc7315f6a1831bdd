#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "bbtime/app.hpp"

using namespace bbtime;

int main(int argc, char** argv) {
  CLI::App cli{"bbtime - integrated ground and air journey planning"};
  cli.require_subcommand(1);

  std::uint64_t seed = 1;
  cli.add_option("--seed", seed, "RNG seed for build and precompute");

  const char* env_net = std::getenv("BBTIME_NET");
  const std::string default_net = env_net ? env_net : "";

  // build
  app::build_args build;
  auto* cb = cli.add_subcommand("build", "build a network file from feeds or a generator");
  cb->add_option("--feed", build.feed_configs, "feed config file (repeatable)");
  cb->add_option("--gtfs", build.gtfs_dirs, "GTFS directory, UTC offset 0 (repeatable)");
  cb->add_option("--synth", build.synth_spec, "generator spec file");
  cb->add_flag("--walk", build.add_walk, "synthesize walk edges");
  cb->add_option("--walk-max", build.max_walk_pair_m, "max walk pair distance [m]");
  cb->add_option("--taxi", build.taxi_config, "taxi/multimodal config file");
  cb->add_flag("--auto-taxi", build.auto_taxi, "generate airport and isolation taxi links");
  cb->add_option("--cluster-radius", build.cluster_radius_m,
                 "single-linkage clustering radius [m]");
  cb->add_option("--out", build.out_file, "output network file")->required();

  // precompute
  app::precompute_args pre;
  pre.net_file = default_net;
  auto* cp = cli.add_subcommand("precompute", "add fragment matrices and the mesh table");
  cp->add_option("net", pre.net_file, "network file")->required(default_net.empty());
  cp->add_option("--t", pre.t_list, "transfer counts to precompute (1 2)");
  cp->add_option("--samples", pre.samples, "estimator samples per fragment");
  cp->add_option("--geo-ratio", pre.geo_ratio_ground, "ground route/geo gate (<=0 off)");
  cp->add_option("--geo-ratio-air", pre.geo_ratio_air, "air route/geo gate");
  cp->add_option("--mesh-cell-deg", pre.mesh_cell_deg, "mesh cell pitch [deg]");
  cp->add_option("--threads", pre.threads, "worker threads (0 = all cores)");
  cp->add_option("--out", pre.out_file, "output file (default: rewrite input)");

  // plan
  app::plan_args planp;
  planp.net_file = default_net;
  auto* cq = cli.add_subcommand("plan", "plan a trip");
  cq->add_option("net", planp.net_file, "network file")->required(default_net.empty());
  cq->add_option("--from", planp.from, "origin: id, name part, or lat,lon")->required();
  cq->add_option("--to", planp.to, "destination: id, name part, or lat,lon")->required();
  cq->add_option("--dep-after", planp.dep_after, "earliest departure (ISO 8601)");
  double max_walk = 0.0;
  auto* ow = cq->add_option("--max-walk", max_walk, "max total walk [m]");
  std::int64_t budget = 0;
  auto* ob = cq->add_option("--budget-ms", budget, "search budget [ms], negative = unlimited");
  int tmax = 0;
  auto* ot = cq->add_option("--tmax", tmax, "max transfers (0..7)");
  bool flex = true;
  auto* of = cq->add_flag("--flex,!--no-flex", flex, "flexible departure window");
  cq->add_flag("--json", planp.json, "machine-readable output");
  cq->add_option("--weights", planp.weights, "cost weights k=v,...");
  cq->add_option("--overlay", planp.overlay_file, "annotation feed file");
  cq->add_option("--geo-ratio", planp.geo_ratio_ground, "ground route/geo gate (<=0 off)");
  cq->add_option("--geo-ratio-air", planp.geo_ratio_air, "air route/geo gate");

  // diagnose
  std::string diag_net = default_net;
  auto* cd = cli.add_subcommand("diagnose", "connectivity report");
  cd->add_option("net", diag_net, "network file")->required(default_net.empty());

  // serve
  std::string serve_net = default_net;
  std::uint16_t port = 8723;
  auto* cs = cli.add_subcommand("serve", "newline-delimited JSON query endpoint");
  cs->add_option("net", serve_net, "network file")->required(default_net.empty());
  cs->add_option("--port", port, "TCP port (127.0.0.1)");

  CLI11_PARSE(cli, argc, argv);

  if (cb->parsed()) {
    build.seed = seed;
    return app::cmd_build(build, std::cout, std::cerr);
  }
  if (cp->parsed()) {
    pre.seed = seed;
    return app::cmd_precompute(pre, std::cout, std::cerr);
  }
  if (cq->parsed()) {
    if (ow->count()) planp.max_walk_m = max_walk;
    if (ob->count()) planp.budget_ms = budget;
    if (ot->count()) planp.tmax = tmax;
    if (of->count()) planp.flex = flex;
    return app::cmd_plan(planp, std::cout, std::cerr);
  }
  if (cd->parsed()) {
    return app::cmd_diagnose(diag_net, std::cout, std::cerr);
  }
  if (cs->parsed()) {
    try {
      auto nf = load_network_file(serve_net);
      app::query_server server(std::move(nf), search_options{});
      const auto bound = server.start(port);
      std::cout << "serving on 127.0.0.1:" << bound << "\n" << std::flush;
      // runs until the process is terminated
      for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return app::exit_validation;
    }
  }
  return app::exit_ok;
}
