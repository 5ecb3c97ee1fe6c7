#pragma once

#include <memory>
#include <string>

#include "service.hpp"

namespace httplib {
class Server;
}

namespace valori::node {

// HTTP/1.1 front end for a NodeService.
class HttpServer {
 public:
  explicit HttpServer(NodeService& service);
  ~HttpServer();

  // Binds and serves until stop(); returns false if the bind fails.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it (or -1); call serve() next.
  int bind_any_port(const std::string& host);
  bool serve();
  void stop();

 private:
  NodeService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace valori::node
