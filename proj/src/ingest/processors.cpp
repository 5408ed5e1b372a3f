#include "scitab/ingest/processors.hpp"

#include "scitab/csv.hpp"
#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/parallel.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace scitab::ingest {

using gateway::json;
using gateway::Shape;
using gateway::ShapeField;
namespace tid = gateway::template_id;

namespace {

std::string unquote_cell(std::string_view cell) {
    auto t = text::trim(cell);
    std::string s(t);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            out.push_back(s[i]);
            if (s[i] == '"' && i + 2 < s.size() && s[i + 1] == '"') ++i;
        }
        return out;
    }
    return s;
}

bool blank_row(const csv::Row& row) {
    return std::all_of(row.begin(), row.end(), [](const std::string& c) { return text::trim(c).empty(); });
}

std::string compose(const std::string& parent, const std::string& child) {
    if (child.empty() || child == parent) return parent;
    if (parent.empty()) return child;
    return parent + " " + child;
}

}  // namespace

std::vector<std::string> flatten_header(const std::vector<std::vector<std::string>>& rows, std::size_t& header_rows) {
    header_rows = 0;
    if (rows.empty()) return {};
    header_rows = 1;
    const auto& top = rows[0];
    bool nested = false;
    for (std::size_t i = 1; i < top.size(); ++i)
        if (!top[i].empty() && top[i] == top[i - 1]) nested = true;
    if (!nested || rows.size() < 2 || rows[1].size() != top.size()) return top;

    header_rows = 2;
    std::vector<std::string> out;
    out.reserve(top.size());
    for (std::size_t i = 0; i < top.size(); ++i) out.push_back(compose(top[i], rows[1][i]));
    return out;
}

StructuredTable table_from_csv(std::string_view csv_text) {
    std::vector<csv::Row> rows;
    for (auto& row : csv::parse(csv_text)) {
        if (blank_row(row)) continue;
        for (auto& cell : row) cell = unquote_cell(cell);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("table_content", "table has no rows");
    std::size_t consumed = 0;
    StructuredTable t;
    t.header = flatten_header(rows, consumed);
    for (std::size_t r = consumed; r < rows.size(); ++r) {
        if (rows[r].size() != t.header.size())
            throw FormatError("table_content", "row " + std::to_string(r + 1) + " has " +
                                                   std::to_string(rows[r].size()) + " cells but the header has " +
                                                   std::to_string(t.header.size()));
        t.rows.push_back(std::move(rows[r]));
    }
    return t;
}

std::vector<std::string> identify_tables(gateway::Gateway& gw, std::string_view page_text) {
    auto shape = Shape::array_of(Shape::object({{"table_name", Shape::scalar(), false},
                                                {"table_content", Shape::string(), true}}));
    auto prefilter = [](std::string_view raw) -> std::optional<json> {
        auto t = text::to_lower(text::trim(gateway::strip_code_fences(raw)));
        while (!t.empty() && (t.back() == '.' || t.back() == '"')) t.pop_back();
        if (!t.empty() && t.front() == '"') t.erase(0, 1);
        if (t == "no") return json::array();
        return std::nullopt;
    };
    json answer;
    try {
        answer = gw.complete_structured(tid::table_identification, {{"page_content", std::string(page_text)}}, shape,
                                        {}, prefilter);
    } catch (const StructuredOutputError& e) {
        gw.diagnostics().warn(std::string("table identification degraded: ") + e.what());
        return {};
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("table identification degraded: ") + e.what());
        return {};
    }
    std::vector<std::string> regions;
    for (const auto& item : answer) {
        auto region = item.at("table_content").get<std::string>();
        if (region.empty() || page_text.find(region) == std::string_view::npos) {
            auto trimmed = std::string(text::trim(region));
            if (!trimmed.empty() && page_text.find(trimmed) != std::string_view::npos) {
                regions.push_back(trimmed);
                continue;
            }
            gw.diagnostics().warn("table identification: dropped a region that is not verbatim page content");
            continue;
        }
        regions.push_back(std::move(region));
    }
    return regions;
}

StructuredTable structure_table(gateway::Gateway& gw, std::string_view table_string) {
    if (text::trim(table_string).empty()) throw UsageError("structure_table needs nonempty table text");
    auto shape = Shape::object({{"table_caption", Shape::scalar(), false}, {"table_content", Shape::string(), true}});
    auto check = [](const json& j) -> std::vector<std::string> {
        try {
            table_from_csv(j.at("table_content").get<std::string>());
        } catch (const FormatError& e) {
            return {std::string("table_content: ") + e.what()};
        }
        return {};
    };
    auto answer = gw.complete_structured(tid::table_structuring, {{"table_information", std::string(table_string)}},
                                         shape, check);
    auto table = table_from_csv(answer.at("table_content").get<std::string>());
    if (auto cap = answer.find("table_caption"); cap != answer.end() && cap->is_string()) table.caption = *cap;
    return table;
}

FigureInsight describe_figure(gateway::Gateway& gw, std::span<const std::uint8_t> image, const std::string& caption) {
    if (image.empty()) throw UsageError("describe_figure needs image bytes");
    FigureInsight fig;
    fig.caption = caption;
    try {
        fig.insight_text = std::string(text::trim(gw.describe_image(image, tid::figure_description, {{"caption", caption}})));
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("figure description degraded: ") + e.what());
    }
    if (fig.insight_text.empty()) {
        fig.insight_text = caption.empty() ? std::string("Figure without caption.") : caption;
        fig.degraded = true;
    }
    return fig;
}

PaperMeta extract_meta(gateway::Gateway& gw, std::string_view head) {
    static const std::string kFormat =
        "Return a JSON object with exactly the keys listed above and string values, and nothing else.";
    auto answer = gw.complete_structured(tid::meta_extraction, {{"paper", std::string(head)}, {"format_instructions", kFormat}},
                                         Shape::object({}, true));
    PaperMeta meta;
    std::vector<bool> seen(PaperMeta::keys().size(), false);
    for (const auto& [k, v] : answer.items()) {
        auto field = meta_field_for(k);
        if (!field) continue;
        auto pos = std::find(PaperMeta::keys().begin(), PaperMeta::keys().end(), *field) - PaperMeta::keys().begin();
        seen[static_cast<std::size_t>(pos)] = true;
        std::string value;
        if (v.is_string()) value = v.get<std::string>();
        else if (v.is_number()) value = v.dump();
        else if (v.is_array()) {
            std::vector<std::string> parts;
            for (const auto& e : v) parts.push_back(e.is_string() ? e.get<std::string>() : e.dump());
            value = text::join(parts, ", ");
        }
        value = std::string(text::trim(value));
        meta.at(*field) = value.empty() ? std::string(kNone) : value;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) gw.diagnostics().warn("meta extraction: key '" + std::string(PaperMeta::keys()[i]) + "' missing");
    return meta;
}

void Ingestor::complete(DocumentBundle& b) {
    if (!b.meta_provided) {
        auto full = b.full_text();
        try {
            b.meta = extract_meta(gw_, text::utf8_prefix(full, options_.meta_head_chars));
        } catch (const Error& e) {
            gw_.diagnostics().warn(b.doc_id + ": meta extraction failed: " + e.what());
        }
        b.meta_provided = true;
    }

    if (options_.identify_page_tables) {
        for (const auto& page : b.pages) {
            auto regions = identify_tables(gw_, page.text);
            for (std::size_t i = 0; i < regions.size(); ++i)
                b.pending_tables.push_back({"p" + std::to_string(page.page) + "-t" + std::to_string(i + 1), "",
                                            regions[i], page.page});
        }
        b.pages.clear();
    }

    for (auto& raw : b.pending_tables) {
        try {
            auto t = structure_table(gw_, raw.raw_text);
            t.table_id = raw.table_id;
            if (!raw.caption.empty()) t.caption = raw.caption;
            t.source_page = raw.source_page;
            b.tables.push_back(std::move(t));
        } catch (const Error& e) {
            gw_.diagnostics().warn(b.doc_id + ": table " + raw.table_id + " kept unparsed: " + e.what());
            b.unparsed_tables.push_back(std::move(raw));
        }
    }
    b.pending_tables.clear();

    for (auto& fig : b.figures) {
        if (!fig.insight_text.empty() || !fig.image_ref) continue;
        std::ifstream in(b.base_dir / *fig.image_ref, std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.empty()) {
            gw_.diagnostics().warn(b.doc_id + ": figure " + fig.figure_id + " image unreadable");
            fig.insight_text = fig.caption;
            fig.degraded = true;
            continue;
        }
        auto described = describe_figure(gw_, bytes, fig.caption);
        fig.insight_text = std::move(described.insight_text);
        fig.degraded = described.degraded;
    }
}

void Ingestor::complete_all(std::vector<DocumentBundle>& bundles) {
    auto workers = options_.workers > 0 ? options_.workers : gw_.budget().limit();
    parallel_for(bundles.size(), workers, [&](std::size_t i) { complete(bundles[i]); });
}

}  // namespace scitab::ingest
