#include "facdash/domain/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <numeric>

namespace facdash::domain {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, const std::array<Enum, N>& values) {
  for (Enum v : values) {
    if (iequals(s, to_string(v))) return v;
  }
  return std::nullopt;
}

void check_text(std::vector<FieldError>& errors, const char* field, std::string_view value,
                std::size_t max_len) {
  if (value.empty()) {
    errors.push_back({field, "must not be empty"});
  } else if (value.size() > max_len) {
    errors.push_back({field, "must be at most " + std::to_string(max_len) + " characters"});
  }
}

void check_year(std::vector<FieldError>& errors, const char* field, int year) {
  if (year < kMinYear || year > kMaxYear) {
    errors.push_back({field, "must be within [1900, 2200]"});
  }
}

bool valid_email(std::string_view e) {
  auto at = e.find('@');
  if (at == std::string_view::npos || at == 0 || e.find('@', at + 1) != std::string_view::npos)
    return false;
  auto domain = e.substr(at + 1);
  auto dot = domain.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == domain.size()) return false;
  return std::none_of(e.begin(), e.end(),
                      [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

std::string_view to_string(Role r) noexcept {
  return r == Role::chair ? "chair" : "faculty";
}

std::string_view to_string(Term t) noexcept {
  switch (t) {
    case Term::spring: return "Spring";
    case Term::summer: return "Summer";
    case Term::fall: return "Fall";
  }
  return "Spring";
}

std::string_view to_string(QuestionCategory c) noexcept {
  switch (c) {
    case QuestionCategory::course: return "course";
    case QuestionCategory::instructor: return "instructor";
    case QuestionCategory::other: return "other";
  }
  return "other";
}

std::string_view to_string(ResearchKind k) noexcept {
  switch (k) {
    case ResearchKind::grant: return "grant";
    case ResearchKind::publication: return "publication";
    case ResearchKind::expenditure: return "expenditure";
  }
  return "grant";
}

std::string_view to_string(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::user: return "user";
    case RecordKind::evaluation: return "evaluation";
    case RecordKind::grant: return "grant";
    case RecordKind::publication: return "publication";
    case RecordKind::expenditure: return "expenditure";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view s) {
  return parse_enum(s, std::array{Role::chair, Role::faculty});
}

std::optional<Term> parse_term(std::string_view s) {
  return parse_enum(s, std::array{Term::spring, Term::summer, Term::fall});
}

std::optional<QuestionCategory> parse_question_category(std::string_view s) {
  return parse_enum(s, std::array{QuestionCategory::course, QuestionCategory::instructor,
                                  QuestionCategory::other});
}

std::optional<ResearchKind> parse_research_kind(std::string_view s) {
  return parse_enum(s,
                    std::array{ResearchKind::grant, ResearchKind::publication,
                               ResearchKind::expenditure});
}

RecordKind parse_record_kind(std::string_view s) {
  auto kind = parse_enum(s, std::array{RecordKind::user, RecordKind::evaluation, RecordKind::grant,
                                       RecordKind::publication, RecordKind::expenditure});
  if (!kind) throw Error(ErrorCode::unknown_kind, "unknown record kind '" + std::string(s) + "'");
  return *kind;
}

bool newest_first(const CourseKey& a, const CourseKey& b) {
  if (a.when() != b.when()) return a.when() > b.when();
  return std::tie(a.prefix, a.number, a.section) < std::tie(b.prefix, b.number, b.section);
}

std::string format_cents(Cents c) {
  auto v = c.value;
  bool negative = v < 0;
  unsigned long long mag = negative ? 0ULL - static_cast<unsigned long long>(v)
                                    : static_cast<unsigned long long>(v);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%llu.%02llu", negative ? "-" : "", mag / 100, mag % 100);
  return buf;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<Date> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    auto first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || ptr != first + len) return std::nullopt;
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::int64_t EvaluationRecord::respondents() const noexcept {
  return std::accumulate(responses.begin(), responses.end(), std::int64_t{0});
}

int ResearchItem::year() const {
  return std::visit(
      [](const auto& b) -> int {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Grant>) {
          return static_cast<int>(b.start_date.year());
        } else if constexpr (std::is_same_v<T, Publication>) {
          return b.publication_year;
        } else {
          return b.fiscal_year;
        }
      },
      body);
}

const std::string& ResearchItem::headline() const {
  return std::visit(
      [](const auto& b) -> const std::string& {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Expenditure>) {
          return b.description;
        } else {
          return b.title;
        }
      },
      body);
}

std::vector<FieldError> validate(const UserAccount& u) {
  std::vector<FieldError> errors;
  if (!valid_email(u.email)) errors.push_back({"email", "must be a valid email address"});
  check_text(errors, "first_name", u.first_name, 100);
  check_text(errors, "last_name", u.last_name, 100);
  if (u.department_id.empty()) errors.push_back({"department_id", "must not be empty"});
  return errors;
}

std::vector<FieldError> validate(const CourseKey& k) {
  std::vector<FieldError> errors;
  if (k.prefix.empty() || k.prefix.size() > 8 ||
      !std::all_of(k.prefix.begin(), k.prefix.end(),
                   [](char c) { return c >= 'A' && c <= 'Z'; })) {
    errors.push_back({"course_prefix", "must be 1-8 uppercase letters"});
  }
  check_text(errors, "course_number", k.number, 16);
  check_text(errors, "section", k.section, 16);
  check_year(errors, "year", k.year);
  return errors;
}

std::vector<FieldError> validate(const EvaluationRecord& r) {
  std::vector<FieldError> errors;
  if (r.instructor_id.empty()) errors.push_back({"instructor_id", "must not be empty"});
  auto key_errors = validate(r.course_key);
  errors.insert(errors.end(), key_errors.begin(), key_errors.end());
  check_text(errors, "question_id", r.question_id, 64);
  check_text(errors, "question_text", r.question_text, 1000);
  for (std::size_t k = 0; k < r.responses.size(); ++k) {
    if (r.responses[k] < 0) {
      errors.push_back({"n" + std::to_string(k + 1), "must be a non-negative integer"});
    }
  }
  if (r.enrollment) {
    if (*r.enrollment < 0) {
      errors.push_back({"enrollment", "must be a non-negative integer"});
    } else if (r.respondents() > *r.enrollment) {
      errors.push_back({"enrollment", "is smaller than the number of responses"});
    }
  }
  return errors;
}

std::vector<FieldError> validate(const ResearchItem& item) {
  std::vector<FieldError> errors;
  if (item.owner_id.empty()) errors.push_back({"owner_id", "must not be empty"});
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Grant>) {
          check_text(errors, "title", b.title, 500);
          check_text(errors, "funding_agency", b.funding_agency, 200);
          if (b.amount.value < 0) errors.push_back({"amount", "must not be negative"});
          if (!b.start_date.ok()) errors.push_back({"start_date", "must be a valid date"});
          if (!b.end_date.ok()) {
            errors.push_back({"end_date", "must be a valid date"});
          } else if (b.start_date.ok() && b.end_date < b.start_date) {
            errors.push_back({"end_date", "must not be before start_date"});
          }
          if (b.start_date.ok()) check_year(errors, "start_date", static_cast<int>(b.start_date.year()));
        } else if constexpr (std::is_same_v<T, Publication>) {
          check_text(errors, "title", b.title, 500);
          check_text(errors, "venue", b.venue, 300);
          check_year(errors, "publication_year", b.publication_year);
          check_text(errors, "author_list", b.author_list, 2000);
        } else {
          check_text(errors, "description", b.description, 500);
          if (b.amount.value < 0) errors.push_back({"amount", "must not be negative"});
          check_year(errors, "fiscal_year", b.fiscal_year);
        }
      },
      item.body);
  return errors;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  return lowercase(haystack).find(lowercase(needle)) != std::string::npos;
}

}  // namespace facdash::domain
