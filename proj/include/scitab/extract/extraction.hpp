#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/index/chunk.hpp"
#include "scitab/record.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace scitab::extract {

inline constexpr std::size_t kMaxAnswerSummaryChars = 1200;

// Asks the reasoner for a flat record structure answering `question`. Column
// names are normalised to snake_case. Nested, empty or colliding columns get
// one repair round; a second failure throws SchemaError.
TableSchema infer_schema(gateway::Gateway& gw, const std::string& question);

// Builds a schema from an attribute list: {"name": "description", ...} or
// [{"name": ..., "description": ...}, ...]. Throws SchemaError when invalid.
TableSchema schema_from_attributes(const nlohmann::ordered_json& attributes, std::string question = {});

// The question used for retrieval and prompts when only attributes are given.
std::string question_from_schema(const TableSchema& schema);

struct ExtractionResult {
    std::vector<DataRecord> records;  // at least one
    std::string summary;              // per-document fragment from the model, may be empty
    bool degraded = false;
};

// One extraction call over the contexts of a single document. Every record
// carries exactly the schema columns; values the model marks "Empty" become
// the Empty sentinel. Failures yield one all-Empty record flagged degraded.
// Throws UsageError if a context belongs to another document.
ExtractionResult extract_records(gateway::Gateway& gw, const std::string& question, const TableSchema& schema,
                                 const std::string& doc_id, const std::vector<const index::ContentChunk*>& contexts);

// Text summary of the whole table, at most 1200 characters. Falls back to a
// count-based sentence when the gateway fails.
std::string summarize_answer(gateway::Gateway& gw, const std::string& question, const TableSchema& schema,
                             const std::vector<DataRecord>& records);

// The summary used when no model is available.
std::string fallback_answer_summary(const std::vector<DataRecord>& records);

// Finds every normalised exact occurrence of each non-Empty cell in the
// record's contexts and stores them as provenance. Cells without a match are
// listed in unverified_columns and raise the unverified_span flag.
void locate_spans(DataRecord& record, const std::vector<const index::ContentChunk*>& contexts);

// Match normalisation: ASCII case fold and whitespace collapse. `offsets[i]`
// is the byte in `source` that produced normalised byte i.
struct NormalizedText {
    std::string text;
    std::vector<std::size_t> offsets;
};
NormalizedText normalize_for_match(std::string_view source);

// The needle form of a cell value: normalised as above, then trimmed and
// stripped of surrounding punctuation.
std::string match_key(std::string_view value);

std::vector<ProvenanceSpan> find_spans(std::string_view value, const std::string& chunk_id, std::string_view content);

}  // namespace scitab::extract
