#include "facdash/error.hpp"

namespace facdash {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invariant_violation: return "invariant-violation";
    case ErrorCode::duplicate_email: return "duplicate-email";
    case ErrorCode::unknown_kind: return "unknown-kind";
    case ErrorCode::unknown_user: return "unknown-user";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::weak_password: return "weak-password";
    case ErrorCode::invalid_credentials: return "invalid-credentials";
    case ErrorCode::account_pending: return "account-pending";
    case ErrorCode::invalid_token: return "invalid-token";
    case ErrorCode::not_authenticated: return "not-authenticated";
    case ErrorCode::wrong_role: return "wrong-role";
    case ErrorCode::out_of_scope: return "out-of-scope";
    case ErrorCode::csrf_mismatch: return "csrf-mismatch";
    case ErrorCode::unreadable_payload: return "unreadable-payload";
    case ErrorCode::missing_header: return "missing-header";
    case ErrorCode::empty_batch: return "empty-batch";
    case ErrorCode::field_errors: return "field-errors";
    case ErrorCode::mixed_section: return "mixed-section";
    case ErrorCode::value_not_member: return "value-not-member";
    case ErrorCode::degenerate_sample: return "degenerate-sample";
    case ErrorCode::insufficient_cohort: return "insufficient-cohort";
    case ErrorCode::payload_too_large: return "payload-too-large";
    case ErrorCode::unsupported_media_type: return "unsupported-media-type";
    case ErrorCode::bad_request: return "bad-request";
    case ErrorCode::method_not_allowed: return "method-not-allowed";
    case ErrorCode::mail_failure: return "mail-failure";
    case ErrorCode::storage_failure: return "storage-failure";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace facdash
