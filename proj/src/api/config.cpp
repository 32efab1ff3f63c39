#include "facdash/api/config.hpp"

#include <charconv>
#include <cstdlib>

#include "facdash/error.hpp"

namespace facdash::api {

namespace {

std::int64_t positive_integer(const std::string& name, const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v < 1) {
    throw Error(ErrorCode::bad_request, name + " must be a positive integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

Config Config::from_env(const Lookup& lookup) {
  Config c;
  auto get = [&](const char* name, std::string& into) {
    if (auto v = lookup(name); v && !v->empty()) into = *v;
  };
  get("BASE_URL", c.base_url);
  while (c.base_url.size() > 1 && c.base_url.back() == '/') c.base_url.pop_back();
  get("DB_URL", c.db_url);
  get("SMTP_URL", c.smtp_url);
  get("SMTP_FROM", c.smtp_from);
  if (auto v = lookup("COHORT_MIN"); v && !v->empty()) {
    c.cohort_min = static_cast<int>(std::min<std::int64_t>(positive_integer("COHORT_MIN", *v), 1000));
  }
  if (auto v = lookup("MAX_UPLOAD_BYTES"); v && !v->empty()) {
    c.max_upload_bytes = positive_integer("MAX_UPLOAD_BYTES", *v);
  }
  return c;
}

Config Config::from_env() {
  return from_env([](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  });
}

}  // namespace facdash::api
