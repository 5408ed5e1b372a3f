#include "scitab/record.hpp"

#include "scitab/error.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <charconv>

namespace scitab {

std::string_view to_string(DeclaredKind kind) noexcept {
    switch (kind) {
    case DeclaredKind::string: return "string";
    case DeclaredKind::floating: return "float";
    case DeclaredKind::integer: return "int";
    case DeclaredKind::boolean: return "bool";
    case DeclaredKind::date: return "date";
    }
    return "string";
}

DeclaredKind declared_kind_from_string(std::string_view s) {
    auto k = text::fold(s);
    if (k == "string" || k == "str" || k == "text") return DeclaredKind::string;
    if (k == "float" || k == "number" || k == "numeric" || k == "double" || k == "real") return DeclaredKind::floating;
    if (k == "int" || k == "integer") return DeclaredKind::integer;
    if (k == "bool" || k == "boolean") return DeclaredKind::boolean;
    if (k == "date" || k == "datetime") return DeclaredKind::date;
    throw UsageError("unknown value kind '" + std::string(s) + "'");
}

DeclaredKind kind_from_description(std::string_view description) {
    auto colon = description.find(':');
    if (colon == std::string_view::npos || colon > 12) return DeclaredKind::string;
    try {
        return declared_kind_from_string(description.substr(0, colon));
    } catch (const UsageError&) {
        return DeclaredKind::string;
    }
}

bool TableSchema::has(std::string_view name) const { return index_of(name).has_value(); }

std::optional<std::size_t> TableSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

const Column& TableSchema::column(std::string_view name) const {
    auto i = index_of(name);
    if (!i) throw UsageError("unknown column '" + std::string(name) + "'");
    return columns[*i];
}

std::vector<std::string> TableSchema::names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
}

void TableSchema::validate() const {
    if (columns.empty()) throw SchemaError("schema has no columns");
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (!text::is_snake_case(c.name)) throw SchemaError("column name '" + c.name + "' is not snake_case");
        if (!seen.insert(c.name).second) throw SchemaError("duplicate column '" + c.name + "'");
        if (text::trim(c.value_description).empty())
            throw SchemaError("column '" + c.name + "' has no value description");
    }
}

std::optional<TypedView> parse_typed(std::string_view raw, DeclaredKind kind) {
    auto t = text::trim(raw);
    if (t.empty()) return std::nullopt;
    std::string_view s = t;
    switch (kind) {
    case DeclaredKind::string: return std::nullopt;
    case DeclaredKind::floating: {
        if (s.front() == '+') s.remove_prefix(1);
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
        return v;
    }
    case DeclaredKind::integer: {
        if (s.front() == '+') s.remove_prefix(1);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
        return v;
    }
    case DeclaredKind::boolean: {
        auto f = text::fold(s);
        if (f == "true" || f == "yes" || f == "1") return true;
        if (f == "false" || f == "no" || f == "0") return false;
        return std::nullopt;
    }
    case DeclaredKind::date: {
        auto parts = text::split(s, '-');
        if (parts.empty() || parts.size() > 3) return std::nullopt;
        int v[3] = {0, 0, 0};
        const std::size_t widths[3] = {4, 2, 2};
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const auto& part = parts[i];
            if (part.size() != widths[i]) return std::nullopt;
            auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
            if (ec != std::errc() || p != part.data() + part.size()) return std::nullopt;
        }
        if (parts.size() >= 2 && (v[1] < 1 || v[1] > 12)) return std::nullopt;
        if (parts.size() == 3 && (v[2] < 1 || v[2] > 31)) return std::nullopt;
        return Date{v[0], v[1], v[2]};
    }
    }
    return std::nullopt;
}

CellValue CellValue::of(std::string text, DeclaredKind kind) {
    CellValue c;
    if (text::trim(text).empty()) return c;
    c.typed_ = parse_typed(text, kind);
    c.text_ = std::move(text);
    return c;
}

CellValue CellValue::from_model(std::string_view text, DeclaredKind kind) {
    auto t = text::trim(text);
    if (t.empty() || text::fold(t) == "empty") return {};
    return of(t, kind);
}

const std::string& CellValue::text() const {
    if (!text_) throw UsageError("cell is Empty");
    return *text_;
}

std::string_view to_string(Flag f) noexcept {
    switch (f) {
    case Flag::empty_cells: return "empty_cells";
    case Flag::low_relevance: return "low_relevance";
    case Flag::unverified_span: return "unverified_span";
    case Flag::degraded: return "degraded";
    }
    return "degraded";
}

Flag flag_from_string(std::string_view s) {
    for (auto f : {Flag::empty_cells, Flag::low_relevance, Flag::unverified_span, Flag::degraded})
        if (to_string(f) == s) return f;
    throw UsageError("unknown flag '" + std::string(s) + "'");
}

std::size_t DataRecord::empty_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const auto& kv) { return kv.second.is_empty(); }));
}

bool DataRecord::all_empty() const { return empty_count() == cells.size(); }

std::string answer_text(const DataRecord& record, const TableSchema& schema) {
    std::vector<std::string> parts;
    for (const auto& c : schema.columns) {
        auto it = record.cells.find(c.name);
        auto value = (it == record.cells.end() || it->second.is_empty()) ? std::string(kEmptyToken) : it->second.text();
        parts.push_back(c.name + ": " + value);
    }
    return text::join(parts, "; ");
}

DataRecord empty_record(const TableSchema& schema, std::string doc_id, int ordinal) {
    DataRecord r;
    r.doc_id = std::move(doc_id);
    r.ordinal = ordinal;
    for (const auto& c : schema.columns) r.cells.emplace(c.name, CellValue::empty());
    return r;
}

}  // namespace scitab
