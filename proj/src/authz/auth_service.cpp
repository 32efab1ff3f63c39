#include "facdash/authz/auth_service.hpp"

#include "facdash/domain/ids.hpp"

namespace facdash::authz {

using domain::Role;
using domain::Session;
using domain::UserAccount;

namespace {

constexpr const char* kInvalidCredentials = "invalid email or password";
constexpr const char* kInvalidToken = "invite link is invalid or has expired";

[[noreturn]] void deny(AccessReason reason) {
  switch (reason) {
    case AccessReason::not_authenticated:
      throw Error(ErrorCode::not_authenticated, "sign in required");
    case AccessReason::wrong_role:
      throw Error(ErrorCode::wrong_role, "this action requires the chair role");
    case AccessReason::out_of_scope:
    case AccessReason::ok:
      break;
  }
  throw Error(ErrorCode::out_of_scope, "the requested subject is outside your scope");
}

}  // namespace

AuthService::AuthService(domain::Store& store, const Clock& clock, MailTransport& mail,
                         AuthOptions options)
    : store_(store), clock_(clock), mail_(mail), options_(std::move(options)),
      hasher_(options_.hash_cost) {}

Session AuthService::open_session(const std::string& user_id) {
  auto now = clock_.now();
  Session s{domain::new_secret_token(), user_id, domain::new_secret_token(), now,
            now + options_.session_ttl};
  store_.put_session(s);
  return s;
}

Session AuthService::login(std::string_view email, std::string_view plaintext) {
  auto user = store_.find_user_by_email(email);
  if (!user) {
    hasher_.burn_verify(plaintext);
    throw Error(ErrorCode::invalid_credentials, kInvalidCredentials);
  }
  if (user->pending()) {
    throw Error(ErrorCode::account_pending, "account is waiting for its invite to be redeemed");
  }
  if (!hasher_.verify(plaintext, *user->password_hash)) {
    throw Error(ErrorCode::invalid_credentials, kInvalidCredentials);
  }
  store_.delete_expired_sessions(clock_.now());
  return open_session(user->id);
}

void AuthService::logout(const std::string& session_id) { store_.delete_session(session_id); }

Principal AuthService::authenticate(const std::string& session_id) const {
  if (!session_id.empty()) {
    auto session = store_.find_session(session_id);
    if (session && clock_.now() < session->expires_at) {
      if (auto user = store_.find_user(session->user_id)) return {*session, *user};
    }
  }
  throw Error(ErrorCode::not_authenticated, "sign in required");
}

SubjectRelation AuthService::relation_of(const Principal& who,
                                         const std::optional<std::string>& subject) const {
  if (!subject || subject->empty()) return SubjectRelation::none;
  if (*subject == who.user.id) return SubjectRelation::self;
  auto other = store_.find_user(*subject);
  if (other && other->department_id == who.user.department_id) {
    return SubjectRelation::same_department;
  }
  return SubjectRelation::other_department;
}

AccessDecision AuthService::authorize(const std::string& session_id, Action action,
                                      const std::optional<std::string>& subject) const {
  try {
    return authorize(authenticate(session_id), action, subject);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::not_authenticated) throw;
    return decide(std::nullopt, action, SubjectRelation::none);
  }
}

AccessDecision AuthService::authorize(const Principal& who, Action action,
                                      const std::optional<std::string>& subject) const {
  return decide(who.user.role, action, relation_of(who, subject));
}

void AuthService::require(const Principal& who, Action action,
                          const std::optional<std::string>& subject) const {
  auto decision = authorize(who, action, subject);
  if (!decision.allowed()) deny(decision.reason());
}

std::string AuthService::invite_link(const std::string& token) const {
  auto base = options_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/set-password?token=" + token;
}

CreatedUser AuthService::create_user(const Principal& chair, const NewUserProfile& profile,
                                     CreationMode mode,
                                     const std::optional<std::string>& manual_password) {
  require(chair, Action::manage_users);

  UserAccount account;
  account.email = profile.email;
  account.first_name = profile.first_name;
  account.last_name = profile.last_name;
  account.role = profile.role;
  account.department_id = chair.user.department_id;

  if (mode == CreationMode::manual) {
    if (!manual_password) {
      throw Error(ErrorCode::weak_password, "manual creation needs a password",
                  {{"password", "is required in manual mode"}});
    }
    account.password_hash = hasher_.hash(*manual_password);
    account.id = store_.put_user(account);
    return {account, std::nullopt};
  }

  auto now = clock_.now();
  domain::InviteToken invite{domain::new_secret_token(), {}, chair.user.id, now,
                             now + options_.invite_ttl, false};
  store_.transact([&] {
    account.id = store_.put_user(account);
    invite.user_id = account.id;
    store_.put_invite(invite);
  });

  MailMessage message{
      account.email, "Your Faculty Dashboard account",
      "Hello " + account.first_name + ",\n\n" + chair.user.display_name() +
          " created a Faculty Dashboard account for you.\n"
          "Choose your password within 72 hours using this link:\n\n" +
          invite_link(invite.token) + "\n\nThe link works once.\n"};
  try {
    mail_.send(message);
  } catch (...) {
    store_.delete_user_cascade(account.id);
    throw;
  }
  return {store_.find_user(account.id).value(), invite};
}

UserAccount AuthService::bootstrap_chair(const std::string& department_id,
                                         const NewUserProfile& profile,
                                         std::string_view password) {
  UserAccount account;
  account.email = profile.email;
  account.first_name = profile.first_name;
  account.last_name = profile.last_name;
  account.role = Role::chair;
  account.department_id = department_id;
  account.password_hash = hasher_.hash(password);
  account.id = store_.put_user(account);
  return account;
}

UserAccount AuthService::redeem_invite(const std::string& token, std::string_view new_password) {
  auto hash = hasher_.hash(new_password);
  return store_.transact([&] {
    auto invite = store_.find_invite(token);
    if (!invite || invite->consumed || clock_.now() >= invite->expires_at) {
      throw Error(ErrorCode::invalid_token, kInvalidToken);
    }
    auto user = store_.find_user(invite->user_id);
    if (!user || !user->pending() || !store_.consume_invite(token)) {
      throw Error(ErrorCode::invalid_token, kInvalidToken);
    }
    store_.set_credential(user->id, hash);
    user->password_hash = hash;
    return *user;
  });
}

void AuthService::change_password(const Principal& who, std::string_view old_plaintext,
                                  std::string_view new_plaintext) {
  require(who, Action::change_password);
  check_password_strength(new_plaintext);
  auto current = store_.find_user(who.user.id);
  if (!current || current->pending() || !hasher_.verify(old_plaintext, *current->password_hash)) {
    throw Error(ErrorCode::invalid_credentials, kInvalidCredentials);
  }
  auto hash = hasher_.hash(new_plaintext);
  store_.transact([&] {
    // Compare-and-set: a concurrent change must not be silently overwritten.
    auto latest = store_.find_user(who.user.id);
    if (!latest || latest->password_hash != current->password_hash) {
      throw Error(ErrorCode::invalid_credentials, kInvalidCredentials);
    }
    store_.set_credential(who.user.id, hash);
    store_.delete_sessions_of(who.user.id, who.session.id);
  });
}

UserAccount AuthService::update_user(const Principal& chair, const std::string& user_id,
                                     const UserPatch& patch) {
  require(chair, Action::manage_users);
  return store_.transact([&] {
    auto user = store_.find_user(user_id);
    if (!user) throw Error(ErrorCode::not_found, "no such user");
    require(chair, Action::manage_users, user_id);
    if (patch.email) user->email = *patch.email;
    if (patch.first_name) user->first_name = *patch.first_name;
    if (patch.last_name) user->last_name = *patch.last_name;
    if (patch.role) user->role = *patch.role;
    store_.put_user(*user);
    return store_.find_user(user_id).value();
  });
}

domain::DeletionReport AuthService::delete_user(const Principal& chair,
                                                const std::string& user_id) {
  require(chair, Action::manage_users);
  return store_.transact([&] {
    if (!store_.find_user(user_id)) throw Error(ErrorCode::not_found, "no such user");
    require(chair, Action::manage_users, user_id);
    return store_.delete_user_cascade(user_id);
  });
}

domain::DeletionReport AuthService::delete_own_account(const Principal& who) {
  require(who, Action::delete_own_data);
  return store_.delete_user_cascade(who.user.id);
}

}  // namespace facdash::authz
