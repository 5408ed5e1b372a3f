#include "scitab/ingest/segment.hpp"

#include "scitab/error.hpp"
#include "scitab/text.hpp"

#include <algorithm>

namespace scitab::ingest {

std::vector<TextSnippet> segment_text(std::string_view raw, std::size_t max_chars,
                                      std::vector<SectionMark> marks, std::string_view id_prefix) {
    if (max_chars < kMinSnippetChars)
        throw UsageError("max_snippet_chars must be at least " + std::to_string(kMinSnippetChars));
    std::vector<TextSnippet> out;
    if (raw.empty()) return out;

    std::stable_sort(marks.begin(), marks.end(),
                     [](const SectionMark& a, const SectionMark& b) { return a.offset < b.offset; });

    // Section boundaries: [0, m1), [m1, m2), ..., [mk, size).
    struct Section {
        std::size_t start;
        std::size_t end;
        std::optional<std::string> label;
    };
    std::vector<Section> sections;
    std::size_t cursor = 0;
    std::optional<std::string> label;
    for (const auto& m : marks) {
        auto at = text::utf8_floor(raw, std::min(m.offset, raw.size()));
        if (at > cursor) {
            sections.push_back({cursor, at, label});
            cursor = at;
        }
        label = m.label;
    }
    if (cursor < raw.size()) sections.push_back({cursor, raw.size(), label});

    for (const auto& sec : sections) {
        std::size_t pos = sec.start;
        while (pos < sec.end) {
            std::size_t end = sec.end;
            if (end - pos > max_chars) {
                std::size_t limit = text::utf8_floor(raw, pos + max_chars);
                std::size_t cut = limit;
                for (std::size_t i = limit; i > pos + max_chars / 2; --i) {
                    if (text::is_space(raw[i - 1])) {
                        cut = i;
                        break;
                    }
                }
                if (cut <= pos) cut = limit;
                if (cut <= pos) cut = pos + 1;  // degenerate: single oversized code point
                end = cut;
            }
            TextSnippet s;
            s.snippet_id = std::string(id_prefix) + std::to_string(out.size() + 1);
            s.section_label = sec.label;
            s.text = std::string(raw.substr(pos, end - pos));
            s.char_span = {pos, end};
            out.push_back(std::move(s));
            pos = end;
        }
    }
    return out;
}

}  // namespace scitab::ingest
