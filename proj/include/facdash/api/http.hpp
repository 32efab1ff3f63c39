#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facdash::api {

struct MultipartPart {
  std::string name;
  std::string filename;
  std::string content_type;
  std::string content;
};

// Transport-neutral request. Header names are lowercase.
struct ApiRequest {
  std::string method;
  std::string path;
  std::multimap<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
  std::vector<MultipartPart> parts;

  std::optional<std::string> param(std::string_view name) const;
  std::optional<std::string> header(std::string_view lowercase_name) const;
  std::optional<std::string> cookie(std::string_view name) const;
  const MultipartPart* part(std::string_view name) const;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

inline constexpr std::string_view kSessionCookie = "facdash_session";
inline constexpr std::string_view kCsrfHeader = "x-csrf-token";

}  // namespace facdash::api
