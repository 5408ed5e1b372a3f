#pragma once

#include "scitab/ingest/document.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace scitab::ingest {

struct SectionMark {
    std::size_t offset = 0;
    std::string label;
};

inline constexpr std::size_t kMinSnippetChars = 200;

// Splits `raw_text` into snippets that partition it exactly: spans are ordered,
// disjoint and cover [0, size). No snippet crosses a section mark and none is
// longer than `max_snippet_chars` bytes. Within a section, cuts prefer the last
// whitespace in the second half of the window and never split a UTF-8 sequence.
// Throws UsageError when max_snippet_chars < 200. Empty input yields no snippets.
std::vector<TextSnippet> segment_text(std::string_view raw_text, std::size_t max_snippet_chars,
                                      std::vector<SectionMark> section_marks = {},
                                      std::string_view id_prefix = "s");

}  // namespace scitab::ingest
