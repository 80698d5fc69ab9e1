#include <cctype>

#include <fmt/format.h>
#include <httplib.h>

#include "cevoi/error.hpp"
#include "cevoi/service.hpp"

namespace cevoi::service {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    auto forward = [this](const httplib::Request& in, httplib::Response& out) {
      Request req;
      req.method = in.method;
      req.path = in.path;
      for (const auto& [key, value] : in.params) req.query.emplace(key, value);
      for (const auto& [key, value] : in.headers) {
        std::string lower = key;
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        req.headers.emplace(std::move(lower), value);
      }
      req.body = in.body;
      const Response res = service.handle(req);
      out.status = res.status;
      for (const auto& [key, value] : res.headers) out.set_header(key, value);
      if (res.status != 204) out.set_content(res.body, res.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Patch(".*", forward);
    server.Delete(".*", forward);
    server.Options(".*", forward);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError(fmt::format("cannot bind to {}", host));
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError(fmt::format("cannot bind to {}:{}", host, port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace cevoi::service
