#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scitab::ingest {

inline constexpr std::string_view kNone = "none";

// Bibliographic record with exactly thirteen keys; unknown values are "none".
struct PaperMeta {
    std::string title{kNone};
    std::string abstract{kNone};
    std::string year{kNone};
    std::string author{kNone};
    std::string venue{kNone};
    std::string issn{kNone};
    std::string volume{kNone};
    std::string issue{kNone};
    std::string page{kNone};
    std::string doi{kNone};
    std::string link{kNone};
    std::string publisher{kNone};
    std::string language{kNone};

    static const std::array<std::string_view, 13>& keys();
    std::string& at(std::string_view key);
    const std::string& at(std::string_view key) const;

    friend bool operator==(const PaperMeta&, const PaperMeta&) = default;
};

// Maps a meta key as people or models write it ("Journal/Conference", "ISSN")
// onto a PaperMeta field name.
std::optional<std::string_view> meta_field_for(std::string_view raw_key);

struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t length() const noexcept { return end - start; }
    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct TextSnippet {
    std::string snippet_id;
    std::optional<std::string> section_label;
    std::string text;
    CharSpan char_span;
    friend bool operator==(const TextSnippet&, const TextSnippet&) = default;
};

struct StructuredTable {
    std::string table_id;
    std::string caption;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::optional<int> source_page;

    // Caption line followed by the CSV serialization of header + rows.
    std::string to_text() const;
    friend bool operator==(const StructuredTable&, const StructuredTable&) = default;
};

// Table text that still needs structuring, or that failed it and is kept verbatim.
struct RawTable {
    std::string table_id;
    std::string caption;
    std::string raw_text;
    std::optional<int> source_page;
    friend bool operator==(const RawTable&, const RawTable&) = default;
};

struct FigureInsight {
    std::string figure_id;
    std::string caption;
    std::string insight_text;
    std::optional<std::string> image_ref;  // path relative to the bundle file
    bool degraded = false;
    friend bool operator==(const FigureInsight&, const FigureInsight&) = default;
};

struct PageText {
    int page = 0;
    std::string text;
    friend bool operator==(const PageText&, const PageText&) = default;
};

struct DocumentBundle {
    std::string doc_id;
    PaperMeta meta;
    std::vector<TextSnippet> snippets;
    std::vector<StructuredTable> tables;
    std::vector<FigureInsight> figures;
    // Tables whose structure could not be recovered; indexed as text.
    std::vector<RawTable> unparsed_tables;

    // Work the gateway-backed ingestion step still has to do.
    std::vector<RawTable> pending_tables;
    std::vector<PageText> pages;
    bool meta_provided = true;
    std::filesystem::path base_dir;

    // Concatenated snippet text, in order.
    std::string full_text() const;

    friend bool operator==(const DocumentBundle&, const DocumentBundle&) = default;
};

}  // namespace scitab::ingest
