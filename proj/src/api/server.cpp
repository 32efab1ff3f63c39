#include "facdash/api/server.hpp"

#include <httplib.h>

#include <cctype>
#include <thread>

namespace facdash::api {

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
};

namespace {

ApiRequest to_api(const httplib::Request& req) {
  ApiRequest out;
  out.method = req.method;
  out.path = req.path;
  for (const auto& [k, v] : req.params) out.query.emplace(k, v);
  for (const auto& [k, v] : req.headers) {
    std::string name;
    for (char c : k) name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.headers[name] = v;
  }
  out.body = req.body;
  for (const auto& [name, file] : req.files) {
    out.parts.push_back({file.name, file.filename, file.content_type, file.content});
  }
  return out;
}

}  // namespace

HttpServer::HttpServer(const Api& api, const Config& config) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  // Leave headroom for multipart framing around a maximal file.
  srv.set_payload_max_length(static_cast<std::size_t>(config.max_upload_bytes) + 1024 * 1024);
  auto handler = [&api](const httplib::Request& req, httplib::Response& res) {
    auto r = api.handle(to_api(req));
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_header("Cache-Control", "no-store");
    res.set_header("X-Content-Type-Options", "nosniff");
    if (!r.content_type.empty()) res.set_content(std::move(r.body), r.content_type);
  };
  const std::string any = R"(/.*)";
  srv.Get(any, handler);
  srv.Post(any, handler);
  srv.Put(any, handler);
  srv.Patch(any, handler);
  srv.Delete(any, handler);
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 413) {
      res.set_content(R"({"status":413,"code":"payload-too-large","message":"request body too large"})",
                      "application/json");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  port_ = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  return port_;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace facdash::api
