#pragma once

#include <string>
#include <string_view>

namespace facdash::domain {

// Opaque identifier: prefix, underscore, 24 random hex digits.
std::string new_opaque_id(std::string_view prefix);

// 256 random bits, base64url without padding (43 characters).
std::string new_secret_token();

}  // namespace facdash::domain
