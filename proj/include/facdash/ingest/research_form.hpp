#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "facdash/domain/types.hpp"

namespace facdash::ingest {

using FormFields = std::map<std::string, std::string, std::less<>>;

// Decimal currency text ("125000.50", "7", "0.5") to integer cents. At most
// two fraction digits, no sign, no grouping separators.
std::optional<domain::Cents> parse_cents(std::string_view text);

// Form field names per kind:
//   grant:       title, funding_agency, amount, start_date, end_date
//   publication: title, venue, publication_year, author_list
//   expenditure: description, amount, fiscal_year
// Dates are ISO-8601 (YYYY-MM-DD). Returns an item without id or owner, or
// throws Error{field_errors} listing every problem found.
domain::ResearchItem validate_research_item(domain::ResearchKind kind, const FormFields& fields);

}  // namespace facdash::ingest
