#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "facdash/api/api.hpp"

namespace facdash::testing {

// Drives an Api in-process the way a browser would: keeps the session cookie
// and echoes the CSRF token on every request.
class ApiClient {
 public:
  using json = nlohmann::json;

  struct Reply {
    int status = 0;
    std::string raw;
    std::string content_type;
    std::vector<std::pair<std::string, std::string>> headers;

    json body() const { return raw.empty() ? json() : json::parse(raw); }
    std::string code() const {
      if (content_type != "application/json" || raw.empty()) return "";
      auto b = body();
      return b.is_object() ? b.value("code", "") : "";
    }
  };

  explicit ApiClient(const api::Api& a) : api_(a) {}

  Reply call(const std::string& method, const std::string& path, const json& body = nullptr,
             std::multimap<std::string, std::string> query = {}) {
    api::ApiRequest req;
    req.method = method;
    req.path = path;
    req.query = std::move(query);
    if (!body.is_null()) {
      req.body = body.dump();
      req.headers["content-type"] = "application/json";
    }
    return send(std::move(req));
  }

  Reply upload(const std::string& path, std::vector<api::MultipartPart> parts,
               std::multimap<std::string, std::string> query = {}) {
    api::ApiRequest req;
    req.method = path.ends_with("/photo") ? "PUT" : "POST";
    req.path = path;
    req.query = std::move(query);
    req.headers["content-type"] = "multipart/form-data; boundary=x";
    req.parts = std::move(parts);
    return send(std::move(req));
  }

  Reply send(api::ApiRequest req) {
    if (!session_.empty()) req.headers["cookie"] = std::string(api::kSessionCookie) + "=" + session_;
    if (!csrf_.empty() && !req.headers.contains(std::string(api::kCsrfHeader))) {
      req.headers[std::string(api::kCsrfHeader)] = csrf_;
    }
    auto r = api_.handle(req);
    Reply reply{r.status, r.body, r.content_type, r.headers};
    for (const auto& [k, v] : r.headers) {
      if (k != "Set-Cookie") continue;
      auto eq = v.find('=');
      session_ = v.substr(eq + 1, v.find(';') - eq - 1);
    }
    if (reply.status == 200 && reply.content_type == "application/json") {
      auto b = reply.body();
      if (b.is_object() && b.contains("csrf_token")) csrf_ = b["csrf_token"];
    }
    return reply;
  }

  Reply login(const std::string& email, const std::string& password) {
    return call("POST", "/api/session", {{"email", email}, {"password", password}});
  }

  void forget() {
    session_.clear();
    csrf_.clear();
  }
  void set_csrf(std::string token) { csrf_ = std::move(token); }
  const std::string& session() const { return session_; }

 private:
  const api::Api& api_;
  std::string session_;
  std::string csrf_;
};

}  // namespace facdash::testing
