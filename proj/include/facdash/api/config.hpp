#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace facdash::api {

struct Config {
  std::string base_url = "http://localhost:8080";
  std::string db_url = "sqlite:facdash.db";
  // Empty: invites are written to the log instead of mailed.
  std::string smtp_url;
  std::string smtp_from = "facdash@localhost";
  int cohort_min = 4;
  std::int64_t max_upload_bytes = 10 * 1024 * 1024;

  using Lookup = std::function<std::optional<std::string>(const std::string&)>;

  // Reads BASE_URL, DB_URL, SMTP_URL, SMTP_FROM, COHORT_MIN and
  // MAX_UPLOAD_BYTES. Unset variables keep their defaults; malformed numbers
  // throw Error{bad_request}.
  static Config from_env(const Lookup& lookup);
  static Config from_env();
};

}  // namespace facdash::api
