#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace facdash::ingest {

// A rectangular-ish grid of cell text; rows may be ragged.
using Row = std::vector<std::string>;
using Table = std::vector<Row>;

// RFC 4180 style: comma delimiter, '"' quoting with "" escapes, CRLF or LF
// line endings, quoted fields may span lines. A leading UTF-8 BOM is skipped.
// Throws Error{unreadable_payload} on NUL bytes, invalid UTF-8 or an
// unterminated quote.
Table read_csv(std::string_view text);

std::string write_csv(const Table& table);

// First worksheet of an Office Open XML workbook. Throws
// Error{unreadable_payload} when the bytes are not a readable workbook.
Table read_xlsx(std::string_view bytes);

// Minimal single-sheet workbook. Cells that look like plain integers or
// decimals are written as numbers, everything else as inline strings.
std::string write_xlsx(const Table& table, std::string_view sheet_name = "Sheet1");

}  // namespace facdash::ingest
