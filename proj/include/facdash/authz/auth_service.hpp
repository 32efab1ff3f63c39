#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "facdash/authz/access.hpp"
#include "facdash/authz/mail.hpp"
#include "facdash/authz/password.hpp"
#include "facdash/clock.hpp"
#include "facdash/domain/store.hpp"

namespace facdash::authz {

struct AuthOptions {
  std::string base_url = "http://localhost:8080";
  HashCost hash_cost = HashCost::interactive();
  std::chrono::seconds session_ttl = std::chrono::hours{24};
  std::chrono::seconds invite_ttl = std::chrono::hours{72};
};

// An authenticated caller: the live session and the account behind it.
struct Principal {
  domain::Session session;
  domain::UserAccount user;

  bool is_chair() const noexcept { return user.role == domain::Role::chair; }
};

struct NewUserProfile {
  std::string email;
  std::string first_name;
  std::string last_name;
  domain::Role role = domain::Role::faculty;
};

enum class CreationMode { manual, invite };

struct CreatedUser {
  domain::UserAccount account;
  std::optional<domain::InviteToken> invite;
};

struct UserPatch {
  std::optional<std::string> email;
  std::optional<std::string> first_name;
  std::optional<std::string> last_name;
  std::optional<domain::Role> role;
};

class AuthService {
 public:
  AuthService(domain::Store& store, const Clock& clock, MailTransport& mail,
              AuthOptions options = {});

  const AuthOptions& options() const noexcept { return options_; }

  std::string hash_credential(std::string_view plaintext) const { return hasher_.hash(plaintext); }
  bool verify_credential(std::string_view plaintext, std::string_view hash) const {
    return hasher_.verify(plaintext, hash);
  }

  // Unknown email and wrong password both raise the same invalid-credentials
  // error with the same message.
  domain::Session login(std::string_view email, std::string_view plaintext);
  void logout(const std::string& session_id);

  // Throws Error{not_authenticated} for unknown or expired sessions.
  Principal authenticate(const std::string& session_id) const;

  SubjectRelation relation_of(const Principal& who, const std::optional<std::string>& subject) const;

  AccessDecision authorize(const std::string& session_id, Action action,
                           const std::optional<std::string>& subject = std::nullopt) const;
  AccessDecision authorize(const Principal& who, Action action,
                           const std::optional<std::string>& subject = std::nullopt) const;

  // authorize() that throws Error{wrong_role | out_of_scope} on denial.
  void require(const Principal& who, Action action,
               const std::optional<std::string>& subject = std::nullopt) const;

  CreatedUser create_user(const Principal& chair, const NewUserProfile& profile, CreationMode mode,
                          const std::optional<std::string>& manual_password = std::nullopt);

  // Creates a department chair without a session; for bootstrapping an empty
  // installation from the command line.
  domain::UserAccount bootstrap_chair(const std::string& department_id,
                                      const NewUserProfile& profile, std::string_view password);

  domain::UserAccount redeem_invite(const std::string& token, std::string_view new_password);

  void change_password(const Principal& who, std::string_view old_plaintext,
                       std::string_view new_plaintext);

  domain::UserAccount update_user(const Principal& chair, const std::string& user_id,
                                  const UserPatch& patch);
  domain::DeletionReport delete_user(const Principal& chair, const std::string& user_id);
  domain::DeletionReport delete_own_account(const Principal& who);

  std::string invite_link(const std::string& token) const;

 private:
  domain::Session open_session(const std::string& user_id);

  domain::Store& store_;
  const Clock& clock_;
  MailTransport& mail_;
  AuthOptions options_;
  PasswordHasher hasher_;
};

}  // namespace facdash::authz
