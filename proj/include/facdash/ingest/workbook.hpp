#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facdash/authz/auth_service.hpp"
#include "facdash/domain/store.hpp"
#include "facdash/domain/types.hpp"
#include "facdash/ingest/table.hpp"

namespace facdash::ingest {

enum class WorkbookFormat { xlsx, csv };

std::optional<WorkbookFormat> parse_workbook_format(std::string_view s);

// Header names of the evaluation upload sheet. Columns may appear in any
// order; every one must be present. enrollment values may be blank.
inline constexpr std::array<std::string_view, 15> kEvaluationColumns = {
    "instructor_email", "course_prefix", "course_number", "section",     "term",
    "year",             "question_id",   "question_text", "question_category",
    "n1",               "n2",            "n3",            "n4",          "n5",
    "enrollment",
};

struct RowRejection {
  // 1-based position among data rows; the header is not counted.
  std::size_t row_number = 0;
  std::string field;
  std::string message;
  friend bool operator==(const RowRejection&, const RowRejection&) = default;
};

struct ParseTotals {
  std::size_t rows_read = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  friend bool operator==(const ParseTotals&, const ParseTotals&) = default;
};

struct ParseReport {
  std::vector<domain::EvaluationRecord> accepted;
  // One entry per offending field; a row can contribute several.
  std::vector<RowRejection> rejected;
  ParseTotals totals;
  friend bool operator==(const ParseReport&, const ParseReport&) = default;
};

// Maps an instructor email to a user id; nullopt rejects the row.
using InstructorResolver = std::function<std::optional<std::string>(std::string_view email)>;

// Resolves against every account in the store, or only those of one
// department when department_id is given.
InstructorResolver store_resolver(domain::Store& store,
                                  std::optional<std::string> department_id = std::nullopt);

// Throws Error{unreadable_payload} for empty or undecodable payloads and
// Error{missing_header} when a canonical column is absent. Rows that are
// entirely blank are skipped and not counted.
ParseReport parse_eval_workbook(std::string_view payload, WorkbookFormat format,
                                const InstructorResolver& resolve);

ParseReport parse_eval_table(const Table& table, const InstructorResolver& resolve);

// Upserts every accepted record in one transaction. Requires the
// upload-evaluations permission; throws Error{empty_batch} when nothing was
// accepted.
domain::UpsertSummary commit_evals(const authz::AuthService& auth, domain::Store& store,
                                   const authz::Principal& chair, const ParseReport& report);

// Inverse of parse_eval_table for records whose instructors have emails.
Table evaluation_table(const std::vector<std::pair<std::string, domain::EvaluationRecord>>&
                           rows_with_email);

}  // namespace facdash::ingest
