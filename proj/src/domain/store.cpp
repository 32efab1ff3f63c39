#include "facdash/domain/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>

#include "facdash/domain/ids.hpp"
#include "statement.hpp"

namespace facdash::domain {

using detail::Statement;

namespace {

std::int64_t to_epoch(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp from_epoch(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

std::string resolve_path(const std::string& url) {
  if (url == "sqlite::memory:" || url == ":memory:" || url.empty()) return ":memory:";
  if (url.starts_with("sqlite://")) return url.substr(9);
  if (url.starts_with("sqlite:")) return url.substr(7);
  return url;
}

// "?, ?, ?" with n placeholders.
std::string placeholders(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += i == 0 ? "?" : ", ?";
  return out;
}

constexpr const char* kUserColumns =
    "id, email, first_name, last_name, role, department_id, password_hash, "
    "EXISTS (SELECT 1 FROM profile_images p WHERE p.user_id = users.id)";

UserAccount read_user(const Statement& s) {
  UserAccount u;
  u.id = s.text(0);
  u.email = s.text(1);
  u.first_name = s.text(2);
  u.last_name = s.text(3);
  u.role = parse_role(s.text(4)).value_or(Role::faculty);
  u.department_id = s.text(5);
  u.password_hash = s.opt_text(6);
  u.has_profile_image = s.integer(7) != 0;
  return u;
}

constexpr const char* kEvalColumns =
    "instructor_id, course_prefix, course_number, section, term, year, question_id, "
    "question_text, question_category, n1, n2, n3, n4, n5, enrollment";

EvaluationRecord read_evaluation(const Statement& s) {
  EvaluationRecord r;
  r.instructor_id = s.text(0);
  r.course_key.prefix = s.text(1);
  r.course_key.number = s.text(2);
  r.course_key.section = s.text(3);
  r.course_key.term = static_cast<Term>(s.integer(4));
  r.course_key.year = static_cast<int>(s.integer(5));
  r.question_id = s.text(6);
  r.question_text = s.text(7);
  r.category = parse_question_category(s.text(8)).value_or(QuestionCategory::other);
  for (int k = 0; k < 5; ++k) r.responses[static_cast<std::size_t>(k)] = s.integer(9 + k);
  r.enrollment = s.opt_integer(14);
  return r;
}

constexpr const char* kResearchColumns =
    "id, owner_id, kind, title, funding_agency, venue, author_list, amount_cents, start_date, "
    "end_date, year";

ResearchItem read_research(const Statement& s) {
  ResearchItem item;
  item.item_id = s.text(0);
  item.owner_id = s.text(1);
  auto kind = parse_research_kind(s.text(2)).value_or(ResearchKind::grant);
  switch (kind) {
    case ResearchKind::grant: {
      Grant g;
      g.title = s.text(3);
      g.funding_agency = s.text(4);
      g.amount = Cents{s.integer(7)};
      g.start_date = parse_iso_date(s.text(8)).value_or(Date{});
      g.end_date = parse_iso_date(s.text(9)).value_or(Date{});
      item.body = g;
      break;
    }
    case ResearchKind::publication: {
      Publication p;
      p.title = s.text(3);
      p.venue = s.text(5);
      p.author_list = s.text(6);
      p.publication_year = static_cast<int>(s.integer(10));
      item.body = p;
      break;
    }
    case ResearchKind::expenditure: {
      Expenditure e;
      e.description = s.text(3);
      e.amount = Cents{s.integer(7)};
      e.fiscal_year = static_cast<int>(s.integer(10));
      item.body = e;
      break;
    }
  }
  return item;
}

InviteToken read_invite(const Statement& s) {
  return InviteToken{s.text(0),           s.text(1),        s.text(2),
                     from_epoch(s.integer(3)), from_epoch(s.integer(4)), s.integer(5) != 0};
}

Session read_session(const Statement& s) {
  return Session{s.text(0), s.text(1), s.text(2), from_epoch(s.integer(3)),
                 from_epoch(s.integer(4))};
}

}  // namespace

// ---------------------------------------------------------------------------
// lifecycle

std::unique_ptr<Store> Store::open(const std::string& url) {
  sqlite3* db = nullptr;
  auto path = resolve_path(url);
  int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db, flags, nullptr) != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(ErrorCode::storage_failure, "cannot open database '" + path + "': " + msg);
  }
  std::unique_ptr<Store> store(new Store(db));
  store->exec("PRAGMA foreign_keys = ON");
  sqlite3_busy_timeout(db, 5000);
  if (path != ":memory:") store->exec("PRAGMA journal_mode = WAL");
  store->migrate();
  return store;
}

Store::Store(sqlite3* db) : db_(db) {}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::storage_failure, msg);
  }
}

Store::TxScope::TxScope(Store& store) : store_(store), outermost_(store.depth_ == 0) {
  if (outermost_) store_.exec("BEGIN IMMEDIATE");
  ++store_.depth_;
}

void Store::TxScope::commit() {
  if (outermost_) store_.exec("COMMIT");
  done_ = true;
}

Store::TxScope::~TxScope() {
  --store_.depth_;
  if (outermost_ && !done_) {
    sqlite3_exec(store_.db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
}

void Store::migrate() {
  exec(
      "CREATE TABLE IF NOT EXISTS schema_migrations ("
      " version INTEGER PRIMARY KEY, name TEXT NOT NULL)");
  int current = schema_version();
  for (const auto& m : bundled_migrations()) {
    if (m.version <= current) continue;
    transact([&] {
      exec(std::string(m.sql).c_str());
      Statement(db_, "INSERT INTO schema_migrations (version, name) VALUES (?, ?)")
          .bind(1, m.version)
          .bind(2, m.name)
          .run();
    });
  }
}

int Store::schema_version() const {
  std::lock_guard lock(mutex_);
  Statement s(db_, "SELECT COALESCE(MAX(version), 0) FROM schema_migrations");
  s.step();
  return static_cast<int>(s.integer(0));
}

// ---------------------------------------------------------------------------
// departments

std::string Store::create_department(const std::string& name) {
  if (name.empty()) {
    throw Error(ErrorCode::invariant_violation, "department needs a name",
                {{"name", "must not be empty"}});
  }
  return transact([&] {
    auto id = new_opaque_id("dep");
    Statement(db_, "INSERT INTO departments (id, name) VALUES (?, ?)").bind(1, id).bind(2, name).run();
    return id;
  });
}

std::optional<Department> Store::find_department(const std::string& id) {
  return transact([&]() -> std::optional<Department> {
    Statement s(db_, "SELECT id, name FROM departments WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return Department{s.text(0), s.text(1)};
  });
}

// ---------------------------------------------------------------------------
// users

std::string Store::put_user(UserAccount user) {
  user.email = lowercase(user.email);
  require_valid(user);
  return transact([&] {
    if (!find_department(user.department_id)) {
      throw Error(ErrorCode::invariant_violation, "unknown department",
                  {{"department_id", "does not name a department"}});
    }
    auto holder = find_user_by_email(user.email);
    if (holder && holder->id != user.id) {
      throw Error(ErrorCode::duplicate_email, "an account with this email already exists",
                  {{"email", "already in use"}});
    }
    if (user.id.empty()) {
      user.id = new_opaque_id("usr");
      Statement(db_,
                "INSERT INTO users (id, email, first_name, last_name, role, department_id, "
                "password_hash) VALUES (?, ?, ?, ?, ?, ?, ?)")
          .bind(1, user.id)
          .bind(2, user.email)
          .bind(3, user.first_name)
          .bind(4, user.last_name)
          .bind(5, to_string(user.role))
          .bind(6, user.department_id)
          .bind(7, user.password_hash)
          .run();
    } else {
      if (!find_user(user.id)) throw Error(ErrorCode::unknown_user, "unknown user");
      Statement(db_,
                "UPDATE users SET email = ?, first_name = ?, last_name = ?, role = ?, "
                "department_id = ? WHERE id = ?")
          .bind(1, user.email)
          .bind(2, user.first_name)
          .bind(3, user.last_name)
          .bind(4, to_string(user.role))
          .bind(5, user.department_id)
          .bind(6, user.id)
          .run();
    }
    return user.id;
  });
}

std::optional<UserAccount> Store::find_user(const std::string& id) {
  return transact([&]() -> std::optional<UserAccount> {
    Statement s(db_, std::string("SELECT ") + kUserColumns + " FROM users WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_user(s);
  });
}

std::optional<UserAccount> Store::find_user_by_email(std::string_view email) {
  return transact([&]() -> std::optional<UserAccount> {
    Statement s(db_, std::string("SELECT ") + kUserColumns + " FROM users WHERE email = ?");
    s.bind(1, lowercase(email));
    if (!s.step()) return std::nullopt;
    return read_user(s);
  });
}

std::vector<UserAccount> Store::query_users(const UserScope& scope) {
  return transact([&] {
    std::string sql = std::string("SELECT ") + kUserColumns + " FROM users";
    if (scope.department_id) sql += " WHERE department_id = ?";
    sql += " ORDER BY last_name, first_name, id";
    Statement s(db_, sql);
    if (scope.department_id) s.bind(1, *scope.department_id);
    std::vector<UserAccount> out;
    while (s.step()) {
      auto u = read_user(s);
      if (contains_case_insensitive(u.display_name(), scope.text_query) ||
          contains_case_insensitive(u.email, scope.text_query)) {
        out.push_back(std::move(u));
      }
    }
    return out;
  });
}

void Store::set_credential(const std::string& user_id,
                           const std::optional<std::string>& password_hash) {
  transact([&] {
    Statement s(db_, "UPDATE users SET password_hash = ? WHERE id = ?");
    s.bind(1, password_hash).bind(2, user_id).run();
    if (sqlite3_changes(db_) == 0) throw Error(ErrorCode::unknown_user, "unknown user");
  });
}

void Store::set_profile_image(const std::string& user_id, const ProfileImage& image) {
  transact([&] {
    if (!find_user(user_id)) throw Error(ErrorCode::unknown_user, "unknown user");
    Statement(db_,
              "INSERT INTO profile_images (user_id, content_type, data) VALUES (?, ?, ?) "
              "ON CONFLICT (user_id) DO UPDATE SET content_type = excluded.content_type, "
              "data = excluded.data")
        .bind(1, user_id)
        .bind(2, image.content_type)
        .bind_blob(3, image.bytes)
        .run();
  });
}

std::optional<ProfileImage> Store::profile_image(const std::string& user_id) {
  return transact([&]() -> std::optional<ProfileImage> {
    Statement s(db_, "SELECT content_type, data FROM profile_images WHERE user_id = ?");
    s.bind(1, user_id);
    if (!s.step()) return std::nullopt;
    return ProfileImage{s.text(0), s.blob(1)};
  });
}

DeletionReport Store::delete_user_cascade(const std::string& user_id) {
  return transact([&] {
    if (!find_user(user_id)) throw Error(ErrorCode::unknown_user, "unknown user");
    DeletionReport report;
    {
      Statement s(db_, "SELECT kind, COUNT(*) FROM research_items WHERE owner_id = ? GROUP BY kind");
      s.bind(1, user_id);
      while (s.step()) {
        switch (parse_research_kind(s.text(0)).value_or(ResearchKind::grant)) {
          case ResearchKind::grant: report.grants = s.integer(1); break;
          case ResearchKind::publication: report.publications = s.integer(1); break;
          case ResearchKind::expenditure: report.expenditures = s.integer(1); break;
        }
      }
    }
    auto remove = [&](const char* sql) {
      Statement(db_, sql).bind(1, user_id).run();
      return static_cast<std::int64_t>(sqlite3_changes(db_));
    };
    remove("DELETE FROM research_items WHERE owner_id = ?");
    report.invite_tokens = remove("DELETE FROM invite_tokens WHERE user_id = ?");
    report.sessions = remove("DELETE FROM sessions WHERE user_id = ?");
    report.profile_images = remove("DELETE FROM profile_images WHERE user_id = ?");

    auto tombstone = std::string(kTombstonePrefix) + new_opaque_id("del");
    Statement(db_, "UPDATE evaluations SET instructor_id = ? WHERE instructor_id = ?")
        .bind(1, tombstone)
        .bind(2, user_id)
        .run();
    report.evaluations_tombstoned = sqlite3_changes(db_);

    remove("DELETE FROM users WHERE id = ?");
    return report;
  });
}

// ---------------------------------------------------------------------------
// evaluations

PutOutcome Store::put_evaluation(const EvaluationRecord& record, const std::string& department_id) {
  require_valid(record);
  return transact([&] {
    if (is_tombstone(record.instructor_id) || !find_user(record.instructor_id)) {
      throw Error(ErrorCode::invariant_violation, "unknown instructor",
                  {{"instructor_id", "does not name an existing user"}});
    }
    const auto& k = record.course_key;
    Statement exists(db_,
                     "SELECT 1 FROM evaluations WHERE instructor_id = ? AND course_prefix = ? AND "
                     "course_number = ? AND section = ? AND term = ? AND year = ? AND "
                     "question_id = ?");
    exists.bind(1, record.instructor_id)
        .bind(2, k.prefix)
        .bind(3, k.number)
        .bind(4, k.section)
        .bind(5, static_cast<int>(k.term))
        .bind(6, k.year)
        .bind(7, record.question_id);
    bool replaced = exists.step();

    Statement(db_,
              "INSERT INTO evaluations (instructor_id, department_id, course_prefix, "
              "course_number, section, term, year, question_id, question_text, "
              "question_category, n1, n2, n3, n4, n5, enrollment) "
              "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?) "
              "ON CONFLICT (instructor_id, course_prefix, course_number, section, term, year, "
              "question_id) DO UPDATE SET department_id = excluded.department_id, "
              "question_text = excluded.question_text, "
              "question_category = excluded.question_category, n1 = excluded.n1, "
              "n2 = excluded.n2, n3 = excluded.n3, n4 = excluded.n4, n5 = excluded.n5, "
              "enrollment = excluded.enrollment")
        .bind(1, record.instructor_id)
        .bind(2, department_id)
        .bind(3, k.prefix)
        .bind(4, k.number)
        .bind(5, k.section)
        .bind(6, static_cast<int>(k.term))
        .bind(7, k.year)
        .bind(8, record.question_id)
        .bind(9, record.question_text)
        .bind(10, to_string(record.category))
        .bind(11, record.responses[0])
        .bind(12, record.responses[1])
        .bind(13, record.responses[2])
        .bind(14, record.responses[3])
        .bind(15, record.responses[4])
        .bind(16, record.enrollment)
        .run();
    return replaced ? PutOutcome::replaced : PutOutcome::inserted;
  });
}

UpsertSummary Store::put_evaluations(std::span<const EvaluationRecord> records,
                                     const std::string& department_id) {
  return transact([&] {
    UpsertSummary summary;
    for (const auto& r : records) {
      if (put_evaluation(r, department_id) == PutOutcome::inserted) {
        ++summary.inserted;
      } else {
        ++summary.replaced;
      }
    }
    return summary;
  });
}

std::vector<EvaluationRecord> Store::query_evaluations(const EvaluationScope& scope) {
  return transact([&] {
    std::string sql = std::string("SELECT ") + kEvalColumns + " FROM evaluations WHERE 1 = 1";
    if (scope.instructors) sql += " AND instructor_id IN (" + placeholders(scope.instructors->size()) + ")";
    if (scope.department_id) sql += " AND department_id = ?";
    if (scope.course) sql += " AND course_prefix = ? AND course_number = ?";
    if (scope.section) sql += " AND section = ?";
    if (scope.window) sql += " AND year * 3 + term BETWEEN ? AND ?";
    sql +=
        " ORDER BY year DESC, term DESC, course_prefix, course_number, section, instructor_id, "
        "question_id";
    Statement s(db_, sql);
    int i = 1;
    if (scope.instructors) {
      for (const auto& id : *scope.instructors) s.bind(i++, id);
    }
    if (scope.department_id) s.bind(i++, *scope.department_id);
    if (scope.course) {
      s.bind(i++, scope.course->prefix);
      s.bind(i++, scope.course->number);
    }
    if (scope.section) s.bind(i++, *scope.section);
    if (scope.window) {
      s.bind(i++, scope.window->first.ordinal());
      s.bind(i++, scope.window->last.ordinal());
    }
    std::vector<EvaluationRecord> out;
    while (s.step()) out.push_back(read_evaluation(s));
    return out;
  });
}

// ---------------------------------------------------------------------------
// research

std::string Store::put_research_item(ResearchItem item) {
  require_valid(item);
  return transact([&] {
    if (!find_user(item.owner_id)) {
      throw Error(ErrorCode::invariant_violation, "unknown owner",
                  {{"owner_id", "does not name an existing user"}});
    }
    item.item_id = new_opaque_id("res");
    Statement s(db_,
                "INSERT INTO research_items (id, owner_id, kind, title, funding_agency, venue, "
                "author_list, amount_cents, start_date, end_date, year) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
    s.bind(1, item.item_id).bind(2, item.owner_id).bind(3, to_string(item.kind()));
    s.bind(4, item.headline()).bind(11, item.year());
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Grant>) {
            s.bind(5, b.funding_agency).bind_null(6).bind_null(7).bind(8, b.amount.value);
            s.bind(9, format_date(b.start_date)).bind(10, format_date(b.end_date));
          } else if constexpr (std::is_same_v<T, Publication>) {
            s.bind_null(5).bind(6, b.venue).bind(7, b.author_list).bind_null(8);
            s.bind_null(9).bind_null(10);
          } else {
            s.bind_null(5).bind_null(6).bind_null(7).bind(8, b.amount.value);
            s.bind_null(9).bind_null(10);
          }
        },
        item.body);
    s.run();
    return item.item_id;
  });
}

std::vector<ResearchItem> Store::query_research(ResearchKind kind, const ResearchScope& scope) {
  return transact([&] {
    std::string sql =
        std::string("SELECT ") + kResearchColumns + " FROM research_items WHERE kind = ?";
    if (scope.owners) sql += " AND owner_id IN (" + placeholders(scope.owners->size()) + ")";
    if (!scope.text_query.empty()) sql += " AND instr(lower(title), lower(?)) > 0";
    if (scope.window) sql += " AND year BETWEEN ? AND ?";
    sql += " ORDER BY year DESC, start_date DESC, id ASC";
    Statement s(db_, sql);
    int i = 1;
    s.bind(i++, to_string(kind));
    if (scope.owners) {
      for (const auto& id : *scope.owners) s.bind(i++, id);
    }
    if (!scope.text_query.empty()) s.bind(i++, scope.text_query);
    if (scope.window) {
      s.bind(i++, scope.window->first.year);
      s.bind(i++, scope.window->last.year);
    }
    std::vector<ResearchItem> out;
    while (s.step()) out.push_back(read_research(s));
    return out;
  });
}

// ---------------------------------------------------------------------------
// invites

void Store::put_invite(const InviteToken& invite) {
  transact([&] {
    Statement(db_,
              "INSERT INTO invite_tokens (token, user_id, issued_by, issued_at, expires_at, "
              "consumed) VALUES (?, ?, ?, ?, ?, ?)")
        .bind(1, invite.token)
        .bind(2, invite.user_id)
        .bind(3, invite.issued_by)
        .bind(4, to_epoch(invite.issued_at))
        .bind(5, to_epoch(invite.expires_at))
        .bind(6, invite.consumed ? 1 : 0)
        .run();
  });
}

std::optional<InviteToken> Store::find_invite(const std::string& token) {
  return transact([&]() -> std::optional<InviteToken> {
    Statement s(db_,
                "SELECT token, user_id, issued_by, issued_at, expires_at, consumed "
                "FROM invite_tokens WHERE token = ?");
    s.bind(1, token);
    if (!s.step()) return std::nullopt;
    return read_invite(s);
  });
}

std::optional<InviteToken> Store::find_invite_for_user(const std::string& user_id) {
  return transact([&]() -> std::optional<InviteToken> {
    Statement s(db_,
                "SELECT token, user_id, issued_by, issued_at, expires_at, consumed "
                "FROM invite_tokens WHERE user_id = ? ORDER BY issued_at DESC, token LIMIT 1");
    s.bind(1, user_id);
    if (!s.step()) return std::nullopt;
    return read_invite(s);
  });
}

bool Store::consume_invite(const std::string& token) {
  return transact([&] {
    Statement(db_, "UPDATE invite_tokens SET consumed = 1 WHERE token = ? AND consumed = 0")
        .bind(1, token)
        .run();
    return sqlite3_changes(db_) == 1;
  });
}

std::int64_t Store::count_open_invites(const std::string& issued_by, Timestamp now) {
  return transact([&] {
    Statement s(db_,
                "SELECT COUNT(*) FROM invite_tokens t JOIN users u ON u.id = t.user_id "
                "WHERE t.issued_by = ? AND t.consumed = 0 AND t.expires_at > ? "
                "AND u.password_hash IS NULL");
    s.bind(1, issued_by).bind(2, to_epoch(now));
    s.step();
    return s.integer(0);
  });
}

// ---------------------------------------------------------------------------
// sessions

void Store::put_session(const Session& session) {
  transact([&] {
    Statement(db_,
              "INSERT INTO sessions (id, user_id, csrf_token, created_at, expires_at) "
              "VALUES (?, ?, ?, ?, ?)")
        .bind(1, session.id)
        .bind(2, session.user_id)
        .bind(3, session.csrf_token)
        .bind(4, to_epoch(session.created_at))
        .bind(5, to_epoch(session.expires_at))
        .run();
  });
}

std::optional<Session> Store::find_session(const std::string& id) {
  return transact([&]() -> std::optional<Session> {
    Statement s(db_,
                "SELECT id, user_id, csrf_token, created_at, expires_at FROM sessions "
                "WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_session(s);
  });
}

void Store::delete_session(const std::string& id) {
  transact([&] { Statement(db_, "DELETE FROM sessions WHERE id = ?").bind(1, id).run(); });
}

std::int64_t Store::delete_sessions_of(const std::string& user_id,
                                       const std::optional<std::string>& except) {
  return transact([&] {
    Statement s(db_, "DELETE FROM sessions WHERE user_id = ? AND id IS NOT ?");
    s.bind(1, user_id).bind(2, except).run();
    return static_cast<std::int64_t>(sqlite3_changes(db_));
  });
}

std::int64_t Store::delete_expired_sessions(Timestamp now) {
  return transact([&] {
    Statement(db_, "DELETE FROM sessions WHERE expires_at <= ?").bind(1, to_epoch(now)).run();
    return static_cast<std::int64_t>(sqlite3_changes(db_));
  });
}

}  // namespace facdash::domain
