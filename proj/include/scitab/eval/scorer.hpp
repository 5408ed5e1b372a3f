#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Mechanical 0/1/2 rubric for regression tracking: exact match after
// normalization, token containment, or neither. It approximates a human
// rater and is not meant to reproduce human-graded results.
namespace scitab::eval {

// Blank and the literal "Empty" (any case) both count as no value.
bool is_blank(std::string_view value);

// 2: equal after trim, case fold and whitespace collapse (including both blank).
// 1: both nonblank and one token set contains the other.
// 0: otherwise, including a blank value against a nonblank one.
int score_value(std::string_view generated, std::string_view gold);

struct ScoreEntry {
    std::string doc_id;
    std::optional<int> ordinal;
    std::string dimension;
    int score = 0;
    std::string generated;
    std::string gold;
    std::string note;
};

struct EvalReport {
    std::vector<std::string> dimensions;
    std::vector<ScoreEntry> entries;
    std::map<std::string, int> totals;  // per dimension
    int grand_total = 0;
    std::size_t row_count = 0;  // gold rows scored

    int max_total() const { return static_cast<int>(2 * row_count * dimensions.size()); }
};

// Both CSVs need a doc_id column. Rows pair on (doc_id, ordinal) when both
// files carry an ordinal column, otherwise on doc_id with the values of
// repeated rows joined by "; ". Dimensions are the gold columns other than
// the keys; each must exist in the generated file (UsageError otherwise).
// Gold rows without a generated partner score 0 with a note.
EvalReport score_tables(std::string_view generated_csv, std::string_view gold_csv);

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace scitab::eval
