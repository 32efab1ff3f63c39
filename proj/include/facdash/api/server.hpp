#pragma once

#include <memory>
#include <string>

#include "facdash/api/api.hpp"

namespace facdash::api {

// Serves an Api over HTTP/1.1 with cpp-httplib.
class HttpServer {
 public:
  HttpServer(const Api& api, const Config& config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  // run() on a background thread; returns once the socket is accepting.
  void start();
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

}  // namespace facdash::api
