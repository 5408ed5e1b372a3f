#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace scitab {

enum class DeclaredKind { string, floating, integer, boolean, date };

std::string_view to_string(DeclaredKind kind) noexcept;
DeclaredKind declared_kind_from_string(std::string_view s);

// Reads the kind from a value description such as "Float: accuracy (0-100)".
// Descriptions without a recognised prefix are strings.
DeclaredKind kind_from_description(std::string_view description);

struct Column {
    std::string name;
    std::string value_description;
    DeclaredKind kind = DeclaredKind::string;

    friend bool operator==(const Column&, const Column&) = default;
};

struct TableSchema {
    std::vector<Column> columns;
    std::string source_question;

    bool has(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;
    const Column& column(std::string_view name) const;
    std::vector<std::string> names() const;

    // Throws SchemaError unless there is at least one column, names are unique
    // snake_case and every description is nonempty.
    void validate() const;

    friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

struct Date {
    int year = 0;
    int month = 0;  // 0 when only the year is known
    int day = 0;    // 0 when unknown
    friend bool operator==(const Date&, const Date&) = default;
};

using TypedView = std::variant<double, std::int64_t, bool, Date>;

// Parses text under a declared kind; nullopt for strings and unparseable text.
std::optional<TypedView> parse_typed(std::string_view text, DeclaredKind kind);

inline constexpr std::string_view kEmptyToken = "Empty";

// A table cell: the Empty sentinel, or text with an optional typed reading.
class CellValue {
public:
    CellValue() = default;  // Empty

    static CellValue empty() { return {}; }
    // Blank text is Empty; anything else is kept verbatim.
    static CellValue of(std::string text, DeclaredKind kind = DeclaredKind::string);
    // Model output: the "Empty" token, null or blank become the sentinel.
    static CellValue from_model(std::string_view text, DeclaredKind kind);

    bool is_empty() const noexcept { return !text_.has_value(); }
    // Throws UsageError on Empty.
    const std::string& text() const;
    // The text, or "" for Empty.
    std::string text_or_blank() const { return text_ ? *text_ : std::string(); }
    const std::optional<TypedView>& typed() const noexcept { return typed_; }

    friend bool operator==(const CellValue& a, const CellValue& b) { return a.text_ == b.text_; }

private:
    std::optional<std::string> text_;
    std::optional<TypedView> typed_;
};

struct ProvenanceSpan {
    std::string chunk_id;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string matched_text;

    friend bool operator==(const ProvenanceSpan&, const ProvenanceSpan&) = default;
};

enum class Flag { empty_cells, low_relevance, unverified_span, degraded };

std::string_view to_string(Flag f) noexcept;
Flag flag_from_string(std::string_view s);

struct QualityScores {
    std::optional<double> answer_relevancy;
    std::optional<double> context_relevancy;
    std::optional<double> faithfulness;

    friend bool operator==(const QualityScores&, const QualityScores&) = default;
};

struct DataRecord {
    std::string doc_id;
    int ordinal = 0;  // extraction order within the document, from 0
    std::map<std::string, CellValue> cells;
    std::map<std::string, std::vector<ProvenanceSpan>> provenance;
    std::set<std::string> unverified_columns;
    std::vector<std::string> context_chunk_ids;
    QualityScores quality;
    std::set<Flag> flags;
    // Flags the user cleared, with the scores they were cleared at.
    std::set<Flag> acknowledged;
    QualityScores acknowledged_scores;
    bool degraded = false;

    std::size_t empty_count() const;
    bool all_empty() const;

    friend bool operator==(const DataRecord&, const DataRecord&) = default;
};

// Record rendered as answer text: "column: value; ..." in schema order, Empty as "Empty".
std::string answer_text(const DataRecord& record, const TableSchema& schema);

// A record with every schema column set to Empty.
DataRecord empty_record(const TableSchema& schema, std::string doc_id, int ordinal);

}  // namespace scitab
