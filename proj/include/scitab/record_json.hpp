#pragma once

#include "scitab/record.hpp"

#include <nlohmann/json.hpp>

namespace scitab {

nlohmann::ordered_json to_json(const TableSchema& schema);
// Accepts {"columns": [{"name", "value_description", "declared_kind"}], "source_question"}.
TableSchema schema_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const ProvenanceSpan& span);
ProvenanceSpan span_from_json(const nlohmann::ordered_json& j);

// Record with cells in schema order (Empty as null), provenance, flags and scores.
nlohmann::ordered_json to_json(const DataRecord& record, const TableSchema& schema);
DataRecord record_from_json(const nlohmann::ordered_json& j, const TableSchema& schema);

// "<doc_id>:<ordinal>", the record id used by the HTTP API.
std::string record_id(const DataRecord& r);
// Splits a record id at its last ':'. Throws UsageError when malformed.
std::pair<std::string, int> parse_record_id(std::string_view rid);

}  // namespace scitab
