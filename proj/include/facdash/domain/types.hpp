#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "facdash/clock.hpp"
#include "facdash/error.hpp"

namespace facdash::domain {

enum class Role { chair, faculty };

// Declaration order is chronological order within a calendar year.
enum class Term { spring, summer, fall };

enum class QuestionCategory { course, instructor, other };

enum class ResearchKind { grant, publication, expenditure };

enum class RecordKind { user, evaluation, grant, publication, expenditure };

std::string_view to_string(Role r) noexcept;
std::string_view to_string(Term t) noexcept;
std::string_view to_string(QuestionCategory c) noexcept;
std::string_view to_string(ResearchKind k) noexcept;
std::string_view to_string(RecordKind k) noexcept;

// Parsers are case-insensitive and return nullopt on unknown input.
std::optional<Role> parse_role(std::string_view s);
std::optional<Term> parse_term(std::string_view s);
std::optional<QuestionCategory> parse_question_category(std::string_view s);
std::optional<ResearchKind> parse_research_kind(std::string_view s);

// Throws Error{unknown_kind}.
RecordKind parse_record_kind(std::string_view s);

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2200;

struct TermRef {
  Term term = Term::spring;
  int year = kMinYear;

  int ordinal() const noexcept { return year * 3 + static_cast<int>(term); }
  friend bool operator==(const TermRef&, const TermRef&) = default;
  friend auto operator<=>(const TermRef& a, const TermRef& b) noexcept {
    return a.ordinal() <=> b.ordinal();
  }
};

// Inclusive range of terms.
struct TermWindow {
  TermRef first{Term::spring, kMinYear};
  TermRef last{Term::fall, kMaxYear};

  static TermWindow all_time() { return {}; }
  static TermWindow years(int from, int to) { return {{Term::spring, from}, {Term::fall, to}}; }

  bool empty() const noexcept { return last < first; }
  bool contains(TermRef t) const noexcept { return first <= t && t <= last; }
  bool contains_year(int year) const noexcept { return first.year <= year && year <= last.year; }
  friend bool operator==(const TermWindow&, const TermWindow&) = default;
};

struct CourseId {
  std::string prefix;
  std::string number;

  std::string display() const { return prefix + " " + number; }
  friend bool operator==(const CourseId&, const CourseId&) = default;
  friend auto operator<=>(const CourseId&, const CourseId&) = default;
};

struct CourseKey {
  std::string prefix;
  std::string number;
  std::string section;
  Term term = Term::spring;
  int year = kMinYear;

  CourseId course() const { return {prefix, number}; }
  TermRef when() const { return {term, year}; }
  friend bool operator==(const CourseKey&, const CourseKey&) = default;
};

// Newest term first, then course and section ascending.
bool newest_first(const CourseKey& a, const CourseKey& b);

struct Cents {
  std::int64_t value = 0;
  friend bool operator==(const Cents&, const Cents&) = default;
  friend auto operator<=>(const Cents&, const Cents&) = default;
};

// "1234.50" style rendering with exactly two fraction digits.
std::string format_cents(Cents c);

using Date = std::chrono::year_month_day;

std::string format_date(Date d);
std::optional<Date> parse_iso_date(std::string_view s);

inline constexpr std::string_view kTombstonePrefix = "tombstone:";
inline bool is_tombstone(std::string_view instructor_id) noexcept {
  return instructor_id.starts_with(kTombstonePrefix);
}

struct ProfileImage {
  std::string content_type;
  std::string bytes;
};

struct UserAccount {
  std::string id;
  std::string email;
  std::string first_name;
  std::string last_name;
  Role role = Role::faculty;
  std::string department_id;
  // Absent while the account waits for its invite to be redeemed.
  std::optional<std::string> password_hash;
  bool has_profile_image = false;

  bool pending() const noexcept { return !password_hash.has_value(); }
  std::string display_name() const { return first_name + " " + last_name; }
  friend bool operator==(const UserAccount&, const UserAccount&) = default;
};

struct Department {
  std::string id;
  std::string name;
};

struct EvaluationRecord {
  std::string instructor_id;
  CourseKey course_key;
  std::string question_id;
  std::string question_text;
  QuestionCategory category = QuestionCategory::other;
  // responses[k-1] is the number of students answering k.
  std::array<std::int64_t, 5> responses{};
  std::optional<std::int64_t> enrollment;

  std::int64_t respondents() const noexcept;
  friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

struct Grant {
  std::string title;
  std::string funding_agency;
  Cents amount;
  Date start_date;
  Date end_date;
  friend bool operator==(const Grant&, const Grant&) = default;
};

struct Publication {
  std::string title;
  std::string venue;
  int publication_year = kMinYear;
  std::string author_list;
  friend bool operator==(const Publication&, const Publication&) = default;
};

struct Expenditure {
  std::string description;
  Cents amount;
  int fiscal_year = kMinYear;
  friend bool operator==(const Expenditure&, const Expenditure&) = default;
};

struct ResearchItem {
  std::string item_id;
  std::string owner_id;
  std::variant<Grant, Publication, Expenditure> body;

  ResearchKind kind() const noexcept { return static_cast<ResearchKind>(body.index()); }
  // Year used for windowing and ordering: grant start year, publication
  // year, or fiscal year.
  int year() const;
  const std::string& headline() const;
  friend bool operator==(const ResearchItem&, const ResearchItem&) = default;
};

struct InviteToken {
  std::string token;
  std::string user_id;
  std::string issued_by;
  Timestamp issued_at;
  Timestamp expires_at;
  bool consumed = false;
};

struct Session {
  std::string id;
  std::string user_id;
  std::string csrf_token;
  Timestamp created_at;
  Timestamp expires_at;
};

struct DeletionReport {
  std::int64_t grants = 0;
  std::int64_t publications = 0;
  std::int64_t expenditures = 0;
  std::int64_t invite_tokens = 0;
  std::int64_t sessions = 0;
  std::int64_t profile_images = 0;
  std::int64_t evaluations_tombstoned = 0;
  friend bool operator==(const DeletionReport&, const DeletionReport&) = default;
};

// Field-level invariant checks. Empty result means valid.
std::vector<FieldError> validate(const UserAccount& u);
std::vector<FieldError> validate(const CourseKey& k);
std::vector<FieldError> validate(const EvaluationRecord& r);
std::vector<FieldError> validate(const ResearchItem& item);

// Throws Error{invariant_violation} carrying the field errors, if any.
template <typename T>
void require_valid(const T& value) {
  if (auto errors = validate(value); !errors.empty()) {
    throw Error(ErrorCode::invariant_violation, "record violates invariants", std::move(errors));
  }
}

std::string lowercase(std::string_view s);
bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

}  // namespace facdash::domain
