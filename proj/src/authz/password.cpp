#include "facdash/authz/password.hpp"

#include <sodium.h>

#include <stdexcept>

#include "facdash/error.hpp"

namespace facdash::authz {
namespace {

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string hash_unchecked(std::string_view plaintext, const HashCost& cost) {
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str(out, plaintext.data(), plaintext.size(), cost.opslimit, cost.memlimit) !=
      0) {
    throw std::runtime_error("password hashing ran out of memory");
  }
  return out;
}

}  // namespace

HashCost HashCost::interactive() {
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

HashCost HashCost::minimal() {
  return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN};
}

void check_password_strength(std::string_view plaintext) {
  if (utf8_length(plaintext) < kMinPasswordLength) {
    throw Error(ErrorCode::weak_password, "password must be at least 10 characters",
                {{"password", "must be at least 10 characters"}});
  }
}

PasswordHasher::PasswordHasher(HashCost cost) : cost_(cost) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialise");
  decoy_ = hash_unchecked("decoy-password-never-used", cost_);
}

std::string PasswordHasher::hash(std::string_view plaintext) const {
  check_password_strength(plaintext);
  return hash_unchecked(plaintext, cost_);
}

bool PasswordHasher::verify(std::string_view plaintext, std::string_view encoded) const {
  std::string hash(encoded);
  return crypto_pwhash_str_verify(hash.c_str(), plaintext.data(), plaintext.size()) == 0;
}

void PasswordHasher::burn_verify(std::string_view plaintext) const {
  (void)verify(plaintext, decoy_);
}

}  // namespace facdash::authz
