#include "scitab/extract/extraction.hpp"

#include "scitab/csv.hpp"
#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <set>

namespace scitab::extract {

using gateway::json;
using gateway::Shape;
namespace tid = gateway::template_id;

namespace {

bool is_wrapper_key(const std::string& key) {
    static const std::set<std::string> keys{"record", "records", "structure", "schema", "columns", "data_structure"};
    return keys.count(text::fold(key)) > 0;
}

// Pulls the column map out of the accepted response layouts: a plain object,
// a record-format list whose first element is the object, or either of those
// under a single wrapper key.
const json* column_map(const json& j) {
    const json* v = &j;
    if (v->is_object() && v->size() == 1 && is_wrapper_key(v->begin().key()) &&
        (v->begin()->is_object() || v->begin()->is_array()))
        v = &*v->begin();
    if (v->is_array()) {
        if (v->empty() || !(*v)[0].is_object()) return nullptr;
        v = &(*v)[0];
    }
    return v->is_object() ? v : nullptr;
}

std::vector<std::string> schema_errors(const json& j, TableSchema* out) {
    std::vector<std::string> errors;
    const json* cols = column_map(j);
    if (!cols) return {"expected an object mapping column names to value descriptions"};
    if (cols->empty()) return {"the structure has no columns"};
    std::set<std::string> names;
    TableSchema schema;
    for (const auto& [key, value] : cols->items()) {
        if (!value.is_string()) {
            errors.push_back("column '" + key + "' must map to a string value description; keep everything flat");
            continue;
        }
        auto name = text::to_snake_case(key);
        if (name.empty()) {
            errors.push_back("column name '" + key + "' has no usable characters");
            continue;
        }
        if (!names.insert(name).second) {
            errors.push_back("column '" + key + "' collides with another column as '" + name + "'");
            continue;
        }
        auto desc = text::trim(value.get<std::string>());
        if (desc.empty()) {
            errors.push_back("column '" + key + "' has an empty value description");
            continue;
        }
        schema.columns.push_back({name, desc, kind_from_description(desc)});
    }
    if (errors.empty() && out) *out = std::move(schema);
    return errors;
}

std::string cell_text(const json& v) {
    if (v.is_null()) return {};
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
        std::vector<std::string> parts;
        for (const auto& e : v) {
            auto t = text::trim(cell_text(e));
            if (!t.empty() && text::fold(t) != "empty") parts.push_back(t);
        }
        return text::join(parts, "; ");
    }
    return v.dump();
}

std::vector<std::string> record_errors(const json& j) {
    std::vector<std::string> errors;
    const auto& records = j.at("records");
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& [key, value] : records[i].items()) {
            bool flat = !value.is_object();
            if (value.is_array())
                flat = std::all_of(value.begin(), value.end(), [](const json& e) { return e.is_primitive(); });
            if (!flat) errors.push_back("records[" + std::to_string(i) + "]." + key + " must be a flat value");
        }
    }
    return errors;
}

std::string render_contexts(const std::vector<const index::ContentChunk*>& contexts) {
    std::string out;
    for (const auto* c : contexts) {
        if (!out.empty()) out += "\n\n";
        out += "[" + c->chunk_id + "] (" + std::string(index::to_string(c->kind)) + ")\n" + c->raw_content;
    }
    return out;
}

std::string plural(std::size_t n, std::string_view word) {
    return std::to_string(n) + " " + std::string(word) + (n == 1 ? "" : "s");
}

}  // namespace

TableSchema infer_schema(gateway::Gateway& gw, const std::string& question) {
    if (text::trim(question).empty()) throw UsageError("question must be nonempty");
    auto check = [](const json& j) { return schema_errors(j, nullptr); };
    json answer;
    try {
        answer = gw.complete_structured(tid::data_structure_design, {{"question", question}}, Shape::any(), check);
    } catch (const StructuredOutputError& e) {
        throw SchemaError(std::string("schema inference failed: ") + e.what() + "\nraw response: " + e.raw_text());
    }
    TableSchema schema;
    schema_errors(answer, &schema);
    schema.source_question = question;
    schema.validate();
    return schema;
}

TableSchema schema_from_attributes(const json& attributes, std::string question) {
    TableSchema schema;
    json cols = json::object();
    if (attributes.is_array() && !attributes.empty() && attributes[0].contains("name")) {
        for (std::size_t i = 0; i < attributes.size(); ++i) {
            const auto& a = attributes[i];
            if (!a.is_object() || !a.contains("name") || !a["name"].is_string())
                throw SchemaError("attributes[" + std::to_string(i) + "] needs a string \"name\"");
            auto name = a["name"].get<std::string>();
            if (cols.contains(name)) throw SchemaError("duplicate attribute '" + name + "'");
            cols[name] = a.value("description", json(""));
        }
    } else {
        cols = attributes;
    }
    auto errors = schema_errors(cols, &schema);
    if (!errors.empty()) throw SchemaError("invalid attribute list: " + text::join(errors, "; "));
    schema.source_question = question.empty() ? question_from_schema(schema) : std::move(question);
    schema.validate();
    return schema;
}

std::string question_from_schema(const TableSchema& schema) {
    std::vector<std::string> parts;
    for (const auto& c : schema.columns) parts.push_back(c.name + " (" + c.value_description + ")");
    return "Extract the following attributes: " + text::join(parts, "; ");
}

ExtractionResult extract_records(gateway::Gateway& gw, const std::string& question, const TableSchema& schema,
                                 const std::string& doc_id, const std::vector<const index::ContentChunk*>& contexts) {
    for (const auto* c : contexts)
        if (c->doc_id != doc_id)
            throw UsageError("context " + c->chunk_id + " does not belong to document " + doc_id);

    ExtractionResult result;
    std::vector<std::string> ids;
    for (const auto* c : contexts) ids.push_back(c->chunk_id);

    auto degraded = [&](const std::string& why) {
        gw.diagnostics().warn(doc_id + ": extraction degraded: " + why);
        auto r = empty_record(schema, doc_id, 0);
        r.context_chunk_ids = ids;
        r.degraded = true;
        r.flags.insert(Flag::degraded);
        result.records = {std::move(r)};
        result.degraded = true;
        return result;
    };
    if (contexts.empty()) return degraded("no contexts retrieved");

    nlohmann::ordered_json schema_json = nlohmann::ordered_json::object();
    for (const auto& c : schema.columns) schema_json[c.name] = c.value_description;

    auto shape = Shape::object({{"records", Shape::array_of(Shape::object({}, true)), true},
                                {"summary", Shape::scalar(), false}});
    auto prefilter = [](std::string_view raw) -> std::optional<json> {
        auto v = gateway::parse_model_json(raw);
        if (v && v->is_array()) return json{{"records", *v}};
        return v;
    };
    json answer;
    try {
        answer = gw.complete_structured(tid::data_extraction,
                                        {{"question", question},
                                         {"schema", schema_json.dump()},
                                         {"contexts", render_contexts(contexts)},
                                         {"doc_id", doc_id}},
                                        shape, record_errors, prefilter);
    } catch (const StructuredOutputError& e) {
        return degraded(e.what());
    } catch (const GatewayError& e) {
        return degraded(e.what());
    }

    std::vector<DataRecord> records;
    for (const auto& item : answer.at("records")) {
        auto r = empty_record(schema, doc_id, 0);
        for (const auto& [key, value] : item.items()) {
            auto name = text::to_snake_case(key);
            auto col = schema.index_of(name);
            if (!col) continue;
            r.cells[name] = CellValue::from_model(cell_text(value), schema.columns[*col].kind);
        }
        r.context_chunk_ids = ids;
        if (std::find_if(records.begin(), records.end(), [&](const DataRecord& o) { return o.cells == r.cells; }) !=
            records.end())
            continue;
        records.push_back(std::move(r));
    }
    // All-Empty rows are noise once another row carries data.
    if (std::any_of(records.begin(), records.end(), [](const DataRecord& r) { return !r.all_empty(); }))
        records.erase(std::remove_if(records.begin(), records.end(), [](const DataRecord& r) { return r.all_empty(); }),
                      records.end());
    if (records.empty()) {
        auto r = empty_record(schema, doc_id, 0);
        r.context_chunk_ids = ids;
        records.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < records.size(); ++i) records[i].ordinal = static_cast<int>(i);
    result.records = std::move(records);
    if (auto s = answer.find("summary"); s != answer.end() && s->is_string()) result.summary = text::trim(s->get<std::string>());
    return result;
}

std::string fallback_answer_summary(const std::vector<DataRecord>& records) {
    if (records.empty()) return "No documents processed.";
    std::set<std::string> docs, docs_with_data;
    std::size_t cells = 0, empty = 0;
    for (const auto& r : records) {
        docs.insert(r.doc_id);
        if (!r.all_empty()) docs_with_data.insert(r.doc_id);
        cells += r.cells.size();
        empty += r.empty_count();
    }
    auto no_data = docs.size() - docs_with_data.size();
    std::string out = "The table covers " + plural(docs.size(), "document") + " and " + plural(records.size(), "record") +
                      ", with " + std::to_string(empty) + " of " + std::to_string(cells) + " cells Empty.";
    if (no_data > 0) out += " " + plural(no_data, "document") + " had no extractable data.";
    return out;
}

std::string summarize_answer(gateway::Gateway& gw, const std::string& question, const TableSchema& schema,
                             const std::vector<DataRecord>& records) {
    if (records.empty()) return fallback_answer_summary(records);
    std::vector<csv::Row> rows;
    csv::Row header{"doc_id"};
    for (const auto& c : schema.columns) header.push_back(c.name);
    rows.push_back(header);
    std::set<std::string> docs;
    for (const auto& r : records) {
        docs.insert(r.doc_id);
        csv::Row row{r.doc_id};
        for (const auto& c : schema.columns) {
            auto it = r.cells.find(c.name);
            row.push_back(it == r.cells.end() || it->second.is_empty() ? std::string(kEmptyToken) : it->second.text());
        }
        rows.push_back(std::move(row));
    }
    std::string summary;
    try {
        summary = text::trim(gw.complete(tid::answer_summary, {{"question", question},
                                                               {"document_count", std::to_string(docs.size())},
                                                               {"record_count", std::to_string(records.size())},
                                                               {"table", csv::write(rows)}}));
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("answer summary degraded: ") + e.what());
    }
    if (summary.empty()) return fallback_answer_summary(records);
    return text::utf8_prefix(summary, kMaxAnswerSummaryChars);
}

NormalizedText normalize_for_match(std::string_view source) {
    NormalizedText out;
    out.text.reserve(source.size());
    out.offsets.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        char c = source[i];
        if (text::is_space(c)) {
            if (!out.text.empty() && out.text.back() == ' ') continue;
            out.text.push_back(' ');
        } else {
            auto u = static_cast<unsigned char>(c);
            out.text.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
        }
        out.offsets.push_back(i);
    }
    return out;
}

std::string match_key(std::string_view value) {
    auto norm = text::trim(normalize_for_match(value).text);
    std::size_t b = 0, e = norm.size();
    while (b < e && (text::is_punct(norm[b]) || norm[b] == ' ')) ++b;
    while (e > b && (text::is_punct(norm[e - 1]) || norm[e - 1] == ' ')) --e;
    if (b == e) return norm;
    return norm.substr(b, e - b);
}

std::vector<ProvenanceSpan> find_spans(std::string_view value, const std::string& chunk_id, std::string_view content) {
    std::vector<ProvenanceSpan> out;
    auto key = match_key(value);
    if (key.empty()) return out;
    auto hay = normalize_for_match(content);
    std::size_t pos = 0;
    while ((pos = hay.text.find(key, pos)) != std::string::npos) {
        auto start = hay.offsets[pos];
        auto end = hay.offsets[pos + key.size() - 1] + 1;
        out.push_back({chunk_id, start, end, std::string(content.substr(start, end - start))});
        pos += key.size();
    }
    return out;
}

void locate_spans(DataRecord& record, const std::vector<const index::ContentChunk*>& contexts) {
    record.provenance.clear();
    record.unverified_columns.clear();
    std::set<std::string> cited(record.context_chunk_ids.begin(), record.context_chunk_ids.end());
    for (const auto& [column, cell] : record.cells) {
        if (cell.is_empty()) continue;
        std::vector<ProvenanceSpan> spans;
        for (const auto* c : contexts) {
            if (c->doc_id != record.doc_id) continue;
            if (!cited.empty() && !cited.count(c->chunk_id)) continue;
            auto found = find_spans(cell.text(), c->chunk_id, c->raw_content);
            spans.insert(spans.end(), found.begin(), found.end());
        }
        if (spans.empty()) record.unverified_columns.insert(column);
        else record.provenance[column] = std::move(spans);
    }
    if (record.unverified_columns.empty()) record.flags.erase(Flag::unverified_span);
    else record.flags.insert(Flag::unverified_span);
}

}  // namespace scitab::extract
