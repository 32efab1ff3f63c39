#include "facdash/ingest/workbook.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

namespace facdash::ingest {

using domain::EvaluationRecord;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Whole number; tolerates a zero fraction ("12.0") since spreadsheet tools
// often store integers that way.
std::optional<std::int64_t> parse_integer(std::string_view s) {
  s = trim(s);
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto frac = s.substr(dot + 1);
    if (frac.empty() || !std::all_of(frac.begin(), frac.end(), [](char c) { return c == '0'; }))
      return std::nullopt;
    s = s.substr(0, dot);
  }
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool blank(const Row& row) {
  return std::all_of(row.begin(), row.end(), [](const std::string& c) { return trim(c).empty(); });
}

std::map<std::string, std::size_t, std::less<>> header_index(const Row& header) {
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<FieldError> problems;
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto name = domain::lowercase(trim(header[i]));
    if (name.empty()) continue;
    if (!index.emplace(name, i).second) problems.push_back({name, "column appears twice"});
  }
  for (auto col : kEvaluationColumns) {
    if (!index.contains(col)) problems.push_back({std::string(col), "column is missing"});
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::missing_header, "header row does not match the evaluation schema",
                std::move(problems));
  }
  return index;
}

}  // namespace

std::optional<WorkbookFormat> parse_workbook_format(std::string_view s) {
  auto lower = domain::lowercase(s);
  if (lower == "xlsx") return WorkbookFormat::xlsx;
  if (lower == "csv") return WorkbookFormat::csv;
  return std::nullopt;
}

InstructorResolver store_resolver(domain::Store& store, std::optional<std::string> department_id) {
  return [&store, dept = std::move(department_id)](std::string_view email)
             -> std::optional<std::string> {
    auto user = store.find_user_by_email(email);
    if (!user || (dept && user->department_id != *dept)) return std::nullopt;
    return user->id;
  };
}

ParseReport parse_eval_workbook(std::string_view payload, WorkbookFormat format,
                                const InstructorResolver& resolve) {
  if (payload.empty()) throw Error(ErrorCode::unreadable_payload, "payload is empty");
  Table table = format == WorkbookFormat::xlsx ? read_xlsx(payload) : read_csv(payload);
  return parse_eval_table(table, resolve);
}

ParseReport parse_eval_table(const Table& table, const InstructorResolver& resolve) {
  auto first = std::find_if(table.begin(), table.end(), [](const Row& r) { return !blank(r); });
  if (first == table.end()) throw Error(ErrorCode::unreadable_payload, "no header row found");
  auto index = header_index(*first);

  ParseReport report;
  std::size_t row_number = 0;
  for (auto it = std::next(first); it != table.end(); ++it) {
    ++row_number;
    const Row& row = *it;
    if (blank(row)) continue;
    ++report.totals.rows_read;

    auto cell = [&](std::string_view column) -> std::string_view {
      auto pos = index.find(column)->second;
      return pos < row.size() ? trim(row[pos]) : std::string_view{};
    };

    std::vector<RowRejection> errors;
    auto reject = [&](std::string_view field, std::string message) {
      errors.push_back({row_number, std::string(field), std::move(message)});
    };

    EvaluationRecord rec;
    auto email = cell("instructor_email");
    if (email.empty()) {
      reject("instructor_email", "must not be empty");
    } else if (auto id = resolve(email)) {
      rec.instructor_id = *id;
    } else {
      reject("instructor_email", "no instructor with this email");
    }

    std::string prefix;
    for (char c : cell("course_prefix")) prefix += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    rec.course_key.prefix = prefix;
    rec.course_key.number = cell("course_number");
    rec.course_key.section = cell("section");
    if (auto term = domain::parse_term(cell("term"))) {
      rec.course_key.term = *term;
    } else {
      reject("term", "must be Spring, Summer or Fall");
    }
    if (auto year = parse_integer(cell("year"))) {
      rec.course_key.year = static_cast<int>(std::clamp<std::int64_t>(*year, -1, 99999));
    } else {
      reject("year", "must be a whole number");
    }
    rec.question_id = cell("question_id");
    rec.question_text = cell("question_text");
    if (auto cat = domain::parse_question_category(cell("question_category"))) {
      rec.category = *cat;
    } else {
      reject("question_category", "must be course, instructor or other");
    }
    for (std::size_t k = 0; k < 5; ++k) {
      auto column = kEvaluationColumns[9 + k];
      auto count = parse_integer(cell(column));
      if (!count || *count < 0) {
        reject(column, "must be a non-negative integer");
      } else {
        rec.responses[k] = *count;
      }
    }
    if (auto enrollment = cell("enrollment"); !enrollment.empty()) {
      auto n = parse_integer(enrollment);
      if (!n || *n < 0) {
        reject("enrollment", "must be blank or a non-negative integer");
      } else {
        rec.enrollment = *n;
      }
    }

    // Remaining type invariants, without repeating fields already reported.
    for (auto& fe : domain::validate(rec)) {
      bool seen = std::any_of(errors.begin(), errors.end(),
                              [&](const RowRejection& r) { return r.field == fe.field; });
      // instructor_id is covered by instructor_email.
      if (!seen && fe.field != "instructor_id") reject(fe.field, fe.message);
    }

    if (errors.empty()) {
      report.accepted.push_back(std::move(rec));
      ++report.totals.accepted;
    } else {
      report.rejected.insert(report.rejected.end(), errors.begin(), errors.end());
      ++report.totals.rejected;
    }
  }
  return report;
}

domain::UpsertSummary commit_evals(const authz::AuthService& auth, domain::Store& store,
                                   const authz::Principal& chair, const ParseReport& report) {
  auth.require(chair, authz::Action::upload_evaluations);
  if (report.accepted.empty()) {
    throw Error(ErrorCode::empty_batch, "the upload contains no valid evaluation rows");
  }
  for (const auto& r : report.accepted) {
    auth.require(chair, authz::Action::upload_evaluations, r.instructor_id);
  }
  return store.put_evaluations(report.accepted, chair.user.department_id);
}

Table evaluation_table(
    const std::vector<std::pair<std::string, domain::EvaluationRecord>>& rows_with_email) {
  Table table;
  table.emplace_back(kEvaluationColumns.begin(), kEvaluationColumns.end());
  for (const auto& [email, r] : rows_with_email) {
    Row row{email,
            r.course_key.prefix,
            r.course_key.number,
            r.course_key.section,
            std::string(domain::to_string(r.course_key.term)),
            std::to_string(r.course_key.year),
            r.question_id,
            r.question_text,
            std::string(domain::to_string(r.category))};
    for (auto n : r.responses) row.push_back(std::to_string(n));
    row.push_back(r.enrollment ? std::to_string(*r.enrollment) : "");
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace facdash::ingest
