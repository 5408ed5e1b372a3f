#include "scitab/record_json.hpp"

#include "scitab/error.hpp"
#include "scitab/quality/quality.hpp"

#include <charconv>

namespace scitab {

using json = nlohmann::ordered_json;

json to_json(const TableSchema& schema) {
    json cols = json::array();
    for (const auto& c : schema.columns)
        cols.push_back({{"name", c.name}, {"value_description", c.value_description}, {"declared_kind", to_string(c.kind)}});
    return {{"columns", cols}, {"source_question", schema.source_question}};
}

TableSchema schema_from_json(const json& j) {
    if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array())
        throw SchemaError("schema needs a \"columns\" array");
    TableSchema s;
    s.source_question = j.value("source_question", "");
    for (const auto& c : j["columns"]) {
        Column col;
        col.name = c.at("name").get<std::string>();
        col.value_description = c.value("value_description", "");
        col.kind = c.contains("declared_kind") ? declared_kind_from_string(c["declared_kind"].get<std::string>())
                                               : kind_from_description(col.value_description);
        s.columns.push_back(std::move(col));
    }
    return s;
}

json to_json(const ProvenanceSpan& s) {
    return {{"chunk_id", s.chunk_id}, {"char_start", s.char_start}, {"char_end", s.char_end}, {"matched_text", s.matched_text}};
}

ProvenanceSpan span_from_json(const json& j) {
    return {j.at("chunk_id").get<std::string>(), j.at("char_start").get<std::size_t>(),
            j.at("char_end").get<std::size_t>(), j.at("matched_text").get<std::string>()};
}

std::string record_id(const DataRecord& r) { return r.doc_id + ":" + std::to_string(r.ordinal); }

std::pair<std::string, int> parse_record_id(std::string_view rid) {
    auto colon = rid.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == rid.size())
        throw UsageError("record id must look like <doc_id>:<ordinal>");
    int ordinal = 0;
    auto tail = rid.substr(colon + 1);
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), ordinal);
    if (ec != std::errc() || p != tail.data() + tail.size() || ordinal < 0)
        throw UsageError("record id has a malformed ordinal");
    return {std::string(rid.substr(0, colon)), ordinal};
}

json to_json(const DataRecord& r, const TableSchema& schema) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::object();
    for (const auto& c : schema.columns) {
        auto it = r.cells.find(c.name);
        cells[c.name] = (it == r.cells.end() || it->second.is_empty()) ? json(nullptr) : json(it->second.text());
    }
    json prov = json::object();
    for (const auto& [col, spans] : r.provenance) {
        json arr = json::array();
        for (const auto& s : spans) arr.push_back(to_json(s));
        prov[col] = arr;
    }
    std::vector<std::string> flags, acked;
    for (auto f : r.flags) flags.emplace_back(to_string(f));
    for (auto f : r.acknowledged) acked.emplace_back(to_string(f));
    json out{{"rid", record_id(r)},
             {"doc_id", r.doc_id},
             {"ordinal", r.ordinal},
             {"cells", json(cells)},
             {"provenance", prov},
             {"unverified_columns", r.unverified_columns},
             {"context_chunk_ids", r.context_chunk_ids},
             {"scores", quality::to_json(r.quality)},
             {"flags", flags},
             {"acknowledged", acked},
             {"acknowledged_scores", quality::to_json(r.acknowledged_scores)},
             {"degraded", r.degraded}};
    return out;
}

DataRecord record_from_json(const json& j, const TableSchema& schema) {
    DataRecord r = empty_record(schema, j.at("doc_id").get<std::string>(), j.value("ordinal", 0));
    const auto& cells = j.at("cells");
    for (const auto& c : schema.columns) {
        auto it = cells.find(c.name);
        if (it != cells.end() && it->is_string()) r.cells[c.name] = CellValue::of(it->get<std::string>(), c.kind);
    }
    if (auto p = j.find("provenance"); p != j.end())
        for (const auto& [col, spans] : p->items())
            for (const auto& s : spans) r.provenance[col].push_back(span_from_json(s));
    r.unverified_columns = j.value("unverified_columns", std::set<std::string>{});
    r.context_chunk_ids = j.value("context_chunk_ids", std::vector<std::string>{});
    if (auto s = j.find("scores"); s != j.end()) r.quality = quality::scores_from_json(*s);
    if (auto s = j.find("acknowledged_scores"); s != j.end()) r.acknowledged_scores = quality::scores_from_json(*s);
    for (const auto& f : j.value("flags", std::vector<std::string>{})) r.flags.insert(flag_from_string(f));
    for (const auto& f : j.value("acknowledged", std::vector<std::string>{})) r.acknowledged.insert(flag_from_string(f));
    r.degraded = j.value("degraded", false);
    return r;
}

}  // namespace scitab
