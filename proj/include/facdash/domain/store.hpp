#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "facdash/domain/types.hpp"

struct sqlite3;

namespace facdash::domain {

struct ResearchScope {
  // nullopt matches every owner; an empty list matches none.
  std::optional<std::vector<std::string>> owners;
  // Case-insensitive substring over title (grant, publication) or
  // description (expenditure). Empty means no filter.
  std::string text_query;
  std::optional<TermWindow> window;
};

struct EvaluationScope {
  std::optional<std::vector<std::string>> instructors;
  std::optional<std::string> department_id;
  std::optional<CourseId> course;
  std::optional<std::string> section;
  std::optional<TermWindow> window;
};

struct UserScope {
  std::optional<std::string> department_id;
  // Matches "first last" or email, case-insensitively.
  std::string text_query;
};

enum class PutOutcome { inserted, replaced };

struct UpsertSummary {
  std::int64_t inserted = 0;
  std::int64_t replaced = 0;
  friend bool operator==(const UpsertSummary&, const UpsertSummary&) = default;
};

struct Migration {
  int version;
  std::string_view name;
  std::string_view sql;
};

// The migrations compiled in from migrations/*.sql, ascending by version.
std::span<const Migration> bundled_migrations();

// Relational store over SQLite. Every public member function is atomic; calls
// made inside transact() join the enclosing transaction.
class Store {
 public:
  // Accepts "sqlite::memory:", "sqlite://<path>", "sqlite:<path>" or a bare
  // filesystem path. Applies pending migrations.
  static std::unique_ptr<Store> open(const std::string& url);

  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  int schema_version() const;

  template <typename Fn>
  decltype(auto) transact(Fn&& fn) {
    std::lock_guard lock(mutex_);
    TxScope scope(*this);
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      scope.commit();
    } else {
      decltype(auto) result = fn();
      scope.commit();
      return result;
    }
  }

  // Departments.
  std::string create_department(const std::string& name);
  std::optional<Department> find_department(const std::string& id);

  // Users. put_user inserts when id is empty (assigning one) and otherwise
  // updates profile fields; the credential is only written on insert.
  std::string put_user(UserAccount user);
  std::optional<UserAccount> find_user(const std::string& id);
  std::optional<UserAccount> find_user_by_email(std::string_view email);
  std::vector<UserAccount> query_users(const UserScope& scope);
  void set_credential(const std::string& user_id, const std::optional<std::string>& password_hash);
  void set_profile_image(const std::string& user_id, const ProfileImage& image);
  std::optional<ProfileImage> profile_image(const std::string& user_id);
  DeletionReport delete_user_cascade(const std::string& user_id);

  // Evaluations: upsert on (instructor, course key, question).
  PutOutcome put_evaluation(const EvaluationRecord& record, const std::string& department_id);
  UpsertSummary put_evaluations(std::span<const EvaluationRecord> records,
                                const std::string& department_id);
  std::vector<EvaluationRecord> query_evaluations(const EvaluationScope& scope);

  // Research items are insert-only; returns the new item id.
  std::string put_research_item(ResearchItem item);
  std::vector<ResearchItem> query_research(ResearchKind kind, const ResearchScope& scope);

  // Invites.
  void put_invite(const InviteToken& invite);
  std::optional<InviteToken> find_invite(const std::string& token);
  std::optional<InviteToken> find_invite_for_user(const std::string& user_id);
  // Marks consumed; returns false when it already was.
  bool consume_invite(const std::string& token);
  std::int64_t count_open_invites(const std::string& issued_by, Timestamp now);

  // Sessions.
  void put_session(const Session& session);
  std::optional<Session> find_session(const std::string& id);
  void delete_session(const std::string& id);
  std::int64_t delete_sessions_of(const std::string& user_id,
                                  const std::optional<std::string>& except = std::nullopt);
  std::int64_t delete_expired_sessions(Timestamp now);

 private:
  explicit Store(sqlite3* db);

  class TxScope {
   public:
    explicit TxScope(Store& store);
    ~TxScope();
    void commit();
    TxScope(const TxScope&) = delete;
    TxScope& operator=(const TxScope&) = delete;

   private:
    Store& store_;
    bool outermost_;
    bool done_ = false;
  };

  void migrate();
  void exec(const char* sql);

  sqlite3* db_;
  mutable std::recursive_mutex mutex_;
  int depth_ = 0;
};

}  // namespace facdash::domain
