#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// String helpers shared across modules. Case folding is ASCII-only; bytes
// outside ASCII (UTF-8 sequences such as "µ") pass through unchanged.
namespace scitab::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// trim + case fold. Used by inconsistency and plan matching.
std::string fold(std::string_view s);

// trim + case fold + internal whitespace collapse. Used by the scorer.
std::string fold_collapse(std::string_view s);

bool is_space(char c) noexcept;
bool is_punct(char c) noexcept;

std::string to_snake_case(std::string_view s);
bool is_snake_case(std::string_view s);

// Lowercased runs of ASCII alphanumerics plus any non-ASCII bytes.
std::vector<std::string> words(std::string_view s);

// Sentence split on '.', '!', '?' or newline followed by whitespace. Empty pieces dropped.
std::vector<std::string> sentences(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// UTF-8 code point count and code-point-safe prefix.
std::size_t utf8_length(std::string_view s);
std::string utf8_prefix(std::string_view s, std::size_t max_codepoints);

// Backs up from `pos` to the closest code point boundary at or before it.
std::size_t utf8_floor(std::string_view s, std::size_t pos);

}  // namespace scitab::text
