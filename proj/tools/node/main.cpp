#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "server.hpp"
#include "service.hpp"
#include "valori/error.hpp"

namespace {

valori::node::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"valori-node: HTTP front end for a deterministic vector memory", "valori-node"};
  valori::node::NodeOptions opts;
  std::string host = "127.0.0.1";
  int port = 7070;
  std::string sync = "per-record";
  app.add_option("--host", host, "Listen address");
  app.add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  app.add_option("--log-path", opts.log_path, "Command log (created if missing)");
  app.add_option("--snapshot-dir", opts.snapshot_dir, "Directory for the restore base snapshot");
  app.add_option("--dim", opts.config.dim, "Vector dimension")->check(CLI::Range(1, 65536));
  app.add_option("--m", opts.config.hnsw.m, "HNSW neighbours per node per layer")
      ->check(CLI::PositiveNumber);
  app.add_option("--ef-construction", opts.config.hnsw.ef_construction)
      ->check(CLI::PositiveNumber);
  app.add_option("--ef-search", opts.config.hnsw.ef_search)->check(CLI::PositiveNumber);
  std::string precision = "q16.16";
  app.add_option("--precision", precision)->check(CLI::IsMember({"q16.16"}));
  app.add_option("--sync", sync, "fsync policy")->check(CLI::IsMember({"per-record", "batched"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }
  opts.sync = sync == "batched" ? valori::replay::SyncPolicy::kBatched
                                : valori::replay::SyncPolicy::kPerRecord;

  try {
    valori::node::NodeService service(opts);
    valori::node::HttpServer server(service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::fprintf(stderr, "valori-node listening on %s:%d clock=%llu state_hash=%s\n",
                 host.c_str(), port, static_cast<unsigned long long>(service.clock()),
                 service.current_hash().hex().c_str());
    if (!server.listen(host, port)) {
      std::fprintf(stderr, "valori-node: cannot listen on %s:%d\n", host.c_str(), port);
      return 2;
    }
  } catch (const valori::Error& e) {
    std::fprintf(stderr, "valori-node: %s\n", e.what());
    return 2;
  }
  return 0;
}
