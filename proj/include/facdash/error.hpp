#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace facdash {

// Closed set of failure codes. Each maps to one stable kebab-case string and
// one HTTP status (see api/errors.cpp).
enum class ErrorCode {
  invariant_violation,
  duplicate_email,
  unknown_kind,
  unknown_user,
  not_found,
  weak_password,
  invalid_credentials,
  account_pending,
  invalid_token,
  not_authenticated,
  wrong_role,
  out_of_scope,
  csrf_mismatch,
  unreadable_payload,
  missing_header,
  empty_batch,
  field_errors,
  mixed_section,
  value_not_member,
  degenerate_sample,
  insufficient_cohort,
  payload_too_large,
  unsupported_media_type,
  bad_request,
  method_not_allowed,
  mail_failure,
  storage_failure,
  internal,
};

std::string_view to_string(ErrorCode code) noexcept;

struct FieldError {
  std::string field;
  std::string message;

  friend bool operator==(const FieldError&, const FieldError&) = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::vector<FieldError> fields = {})
      : std::runtime_error(std::move(message)), code_(code), fields_(std::move(fields)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<FieldError>& fields() const noexcept { return fields_; }

 private:
  ErrorCode code_;
  std::vector<FieldError> fields_;
};

}  // namespace facdash
