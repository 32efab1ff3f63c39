#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace facdash::authz {

inline constexpr std::size_t kMinPasswordLength = 10;

// Argon2id work factors. interactive() is the production default; minimal()
// exists so test suites can create hundreds of accounts quickly.
struct HashCost {
  unsigned long long opslimit;
  std::size_t memlimit;

  static HashCost interactive();
  static HashCost minimal();
};

// Throws Error{weak_password} when the password has fewer than
// kMinPasswordLength code points.
void check_password_strength(std::string_view plaintext);

class PasswordHasher {
 public:
  explicit PasswordHasher(HashCost cost = HashCost::interactive());

  // Salted Argon2id hash in PHC string form. Enforces the strength policy.
  std::string hash(std::string_view plaintext) const;
  bool verify(std::string_view plaintext, std::string_view encoded) const;

  // Spends the same effort as verify() against a throwaway hash, so a login
  // for an unknown email costs as much as one with a wrong password.
  void burn_verify(std::string_view plaintext) const;

 private:
  HashCost cost_;
  std::string decoy_;
};

}  // namespace facdash::authz
