#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace scitab::csv {

using Row = std::vector<std::string>;

// Quotes a field when it contains a comma, quote, CR or LF; embedded quotes are doubled.
std::string escape_field(std::string_view field);

// Serializes rows with "\n" line endings and a trailing newline after every row.
std::string write(const std::vector<Row>& rows);

// Parses RFC 4180 style CSV. Accepts "\n" and "\r\n" line endings, quoted
// fields spanning lines, doubled quotes. A trailing newline does not produce
// an extra empty row. Throws FormatError on an unterminated quoted field.
std::vector<Row> parse(std::string_view text);

}  // namespace scitab::csv
