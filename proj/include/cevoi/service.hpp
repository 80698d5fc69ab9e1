#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cevoi::service {

/// Transport-independent request. Header names are lower case.
struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct ServiceOptions {
  /// Value of Access-Control-Allow-Origin.
  std::string cors_origin = "*";
  std::size_t max_sessions = 256;
};

/// In-memory session store behind the JSON API. Thread-safe: any number of
/// concurrent handle() calls; mutations of one session are serialised and
/// readers always see a complete snapshot. EVPPI jobs run on a background
/// worker thread.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response handle(const Request& request);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP/1.1 front end forwarding every request to a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to host:port; port 0 picks a free port. Returns the bound port.
  /// Throws IoError when binding fails.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks the calling thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cevoi::service
