#include "facdash/domain/ids.hpp"

#include <sodium.h>

#include <array>
#include <stdexcept>

namespace facdash::domain {
namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialise");
    return true;
  }();
  (void)ready;
}

}  // namespace

std::string new_opaque_id(std::string_view prefix) {
  ensure_sodium();
  std::array<unsigned char, 12> raw{};
  randombytes_buf(raw.data(), raw.size());
  std::array<char, raw.size() * 2 + 1> hex{};
  sodium_bin2hex(hex.data(), hex.size(), raw.data(), raw.size());
  std::string id(prefix);
  id += '_';
  id += hex.data();
  return id;
}

std::string new_secret_token() {
  ensure_sodium();
  std::array<unsigned char, 32> raw{};
  randombytes_buf(raw.data(), raw.size());
  constexpr int variant = sodium_base64_VARIANT_URLSAFE_NO_PADDING;
  std::array<char, sodium_base64_ENCODED_LEN(32, variant)> out{};
  sodium_bin2base64(out.data(), out.size(), raw.data(), raw.size(), variant);
  return out.data();
}

}  // namespace facdash::domain
