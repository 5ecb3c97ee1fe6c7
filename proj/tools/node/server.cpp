#include "server.hpp"

#include "httplib.h"

namespace valori::node {

namespace {

void send(httplib::Response& out, const Response& r) {
  out.status = r.status;
  for (const auto& [k, v] : r.headers) out.set_header(k, v);
  out.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(NodeService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Post("/v1/insert", [this](const httplib::Request& q, httplib::Response& r) {
    send(r, service_.insert(q.body));
  });
  s.Post("/v1/delete", [this](const httplib::Request& q, httplib::Response& r) {
    send(r, service_.remove(q.body));
  });
  s.Post("/v1/link", [this](const httplib::Request& q, httplib::Response& r) {
    send(r, service_.link(q.body));
  });
  s.Post("/v1/query", [this](const httplib::Request& q, httplib::Response& r) {
    send(r, service_.query(q.body));
  });
  s.Post("/v1/restore", [this](const httplib::Request& q, httplib::Response& r) {
    const auto* data = reinterpret_cast<const std::uint8_t*>(q.body.data());
    send(r, service_.restore({data, q.body.size()}));
  });
  s.Get("/v1/snapshot", [this](const httplib::Request&, httplib::Response& r) {
    send(r, service_.snapshot());
  });
  s.Get("/v1/hash", [this](const httplib::Request&, httplib::Response& r) {
    send(r, service_.hash());
  });
  s.Get("/v1/health", [this](const httplib::Request&, httplib::Response& r) {
    send(r, service_.health());
  });
  s.set_payload_max_length(std::size_t{1} << 31);
}

HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

}  // namespace valori::node
