#include "scitab/ingest/bundle_io.hpp"

#include "scitab/error.hpp"
#include "scitab/ingest/segment.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace scitab::ingest {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

std::string as_string(const json& v, const std::string& field) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw FormatError(field, std::string("expected a string, got ") + v.type_name());
}

std::string optional_string(const json& j, const std::string& key, const std::string& path, std::string fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return as_string(*it, path + "." + key);
}

PaperMeta parse_meta(const json& j, const std::string& path) {
    if (!j.is_object()) throw FormatError(path, "expected an object");
    PaperMeta meta;
    for (const auto& [k, v] : j.items()) {
        auto field = meta_field_for(k);
        if (!field) continue;
        auto value = v.is_null() ? std::string(kNone) : as_string(v, path + "." + k);
        meta.at(*field) = text::trim(value).empty() ? std::string(kNone) : value;
    }
    return meta;
}

std::vector<std::string> string_row(const json& j, const std::string& field) {
    if (!j.is_array()) throw FormatError(field, "expected an array of cells");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(j[i].is_null() ? std::string() : as_string(j[i], at_index(field, i)));
    return out;
}

std::optional<int> optional_page(const json& j, const std::string& path) {
    auto it = j.find("source_page");
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw FormatError(path + ".source_page", "expected an integer");
    return it->get<int>();
}

}  // namespace

DocumentBundle parse_bundle(const json& j, const LoadOptions& options, const fs::path& base_dir) {
    if (!j.is_object()) throw FormatError("", "bundle must be a JSON object");
    DocumentBundle b;
    b.base_dir = base_dir;

    const auto& id = require(j, "doc_id", "");
    if (!id.is_string() || text::trim(id.get<std::string>()).empty())
        throw FormatError("doc_id", "must be a nonempty string");
    b.doc_id = id.get<std::string>();

    if (auto m = j.find("meta"); m != j.end() && !m->is_null()) {
        b.meta = parse_meta(*m, "meta");
        b.meta_provided = true;
    } else {
        b.meta_provided = false;
    }

    const auto& snippets = require(j, "snippets", "");
    if (!snippets.is_array()) throw FormatError("snippets", "expected an array");
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        const auto path = at_index("snippets", i);
        const auto& s = snippets[i];
        if (!s.is_object()) throw FormatError(path, "expected an object");
        TextSnippet snip;
        snip.snippet_id = optional_string(s, "snippet_id", path, "s" + std::to_string(i + 1));
        snip.text = as_string(require(s, "text", path), path + ".text");
        if (snip.text.empty()) throw FormatError(path + ".text", "snippet text must be nonempty");
        if (auto label = s.find("section_label"); label != s.end() && !label->is_null())
            snip.section_label = as_string(*label, path + ".section_label");
        if (auto span = s.find("char_span"); span != s.end() && !span->is_null()) {
            if (!span->is_array() || span->size() != 2 || !(*span)[0].is_number_unsigned() ||
                !(*span)[1].is_number_unsigned())
                throw FormatError(path + ".char_span", "expected [start, end] with nonnegative integers");
            snip.char_span = {(*span)[0].get<std::size_t>(), (*span)[1].get<std::size_t>()};
            if (snip.char_span.end < snip.char_span.start)
                throw FormatError(path + ".char_span", "end precedes start");
            if (snip.char_span.start < cursor)
                throw FormatError(path + ".char_span", "spans must be ordered and non-overlapping");
        } else {
            snip.char_span = {cursor, cursor + snip.text.size()};
        }
        cursor = snip.char_span.end;

        if (snip.text.size() <= options.max_snippet_chars) {
            b.snippets.push_back(std::move(snip));
            continue;
        }
        auto pieces = segment_text(snip.text, options.max_snippet_chars, {}, snip.snippet_id + ".");
        for (auto& p : pieces) {
            p.section_label = snip.section_label;
            p.char_span = {snip.char_span.start + p.char_span.start, snip.char_span.start + p.char_span.end};
            if (p.char_span.end > snip.char_span.end) p.char_span.end = snip.char_span.end;
            b.snippets.push_back(std::move(p));
        }
    }

    if (auto tables = j.find("tables"); tables != j.end() && !tables->is_null()) {
        if (!tables->is_array()) throw FormatError("tables", "expected an array");
        for (std::size_t i = 0; i < tables->size(); ++i) {
            const auto path = at_index("tables", i);
            const auto& t = (*tables)[i];
            if (!t.is_object()) throw FormatError(path, "expected an object");
            auto table_id = optional_string(t, "table_id", path, "t" + std::to_string(i + 1));
            auto caption = optional_string(t, "caption", path, "");
            auto page = optional_page(t, path);
            if (t.contains("header")) {
                StructuredTable st{table_id, caption, string_row(t.at("header"), path + ".header"), {}, page};
                if (st.header.empty()) throw FormatError(path + ".header", "header must be nonempty");
                const auto& rows = require(t, "rows", path);
                if (!rows.is_array()) throw FormatError(path + ".rows", "expected an array of rows");
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    auto row_path = at_index(path + ".rows", r);
                    auto row = string_row(rows[r], row_path);
                    if (row.size() != st.header.size())
                        throw FormatError(row_path, "row has " + std::to_string(row.size()) +
                                                        " cells but the header has " +
                                                        std::to_string(st.header.size()));
                    st.rows.push_back(std::move(row));
                }
                b.tables.push_back(std::move(st));
            } else if (t.contains("raw_text")) {
                auto raw = as_string(t.at("raw_text"), path + ".raw_text");
                if (text::trim(raw).empty()) throw FormatError(path + ".raw_text", "must be nonempty");
                b.pending_tables.push_back({table_id, caption, raw, page});
            } else {
                throw FormatError(path + ".header", "missing required field (or raw_text)");
            }
        }
    }

    if (auto figures = j.find("figures"); figures != j.end() && !figures->is_null()) {
        if (!figures->is_array()) throw FormatError("figures", "expected an array");
        for (std::size_t i = 0; i < figures->size(); ++i) {
            const auto path = at_index("figures", i);
            const auto& f = (*figures)[i];
            if (!f.is_object()) throw FormatError(path, "expected an object");
            FigureInsight fig;
            fig.figure_id = optional_string(f, "figure_id", path, "f" + std::to_string(i + 1));
            fig.caption = optional_string(f, "caption", path, "");
            fig.insight_text = optional_string(f, "insight_text", path, "");
            if (auto ref = f.find("image_ref"); ref != f.end() && !ref->is_null())
                fig.image_ref = as_string(*ref, path + ".image_ref");
            fig.degraded = f.value("degraded", false);
            b.figures.push_back(std::move(fig));
        }
    }

    if (auto pages = j.find("pages"); pages != j.end() && !pages->is_null()) {
        if (!pages->is_array()) throw FormatError("pages", "expected an array");
        for (std::size_t i = 0; i < pages->size(); ++i) {
            const auto path = at_index("pages", i);
            const auto& p = (*pages)[i];
            if (!p.is_object()) throw FormatError(path, "expected an object");
            PageText page;
            page.page = p.value("page", static_cast<int>(i + 1));
            page.text = as_string(require(p, "text", path), path + ".text");
            b.pages.push_back(std::move(page));
        }
    }

    if (auto unparsed = j.find("unparsed_tables"); unparsed != j.end() && unparsed->is_array()) {
        for (std::size_t i = 0; i < unparsed->size(); ++i) {
            const auto path = at_index("unparsed_tables", i);
            const auto& t = (*unparsed)[i];
            b.unparsed_tables.push_back({optional_string(t, "table_id", path, "u" + std::to_string(i + 1)),
                                         optional_string(t, "caption", path, ""),
                                         as_string(require(t, "raw_text", path), path + ".raw_text"),
                                         optional_page(t, path)});
        }
    }
    return b;
}

DocumentBundle text_document(std::string doc_id, const std::string& raw_text, const LoadOptions& options) {
    if (text::trim(doc_id).empty()) throw FormatError("doc_id", "must be a nonempty string");
    DocumentBundle b;
    b.doc_id = std::move(doc_id);
    b.meta_provided = false;
    b.snippets = segment_text(raw_text, options.max_snippet_chars);
    return b;
}

DocumentBundle load_bundle(const fs::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string(), "cannot open bundle file");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".txt") return text_document(path.stem().string(), buf.str(), options);
    auto j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw FormatError(path.string(), "bundle is not valid JSON");
    try {
        return parse_bundle(j, options, path.parent_path());
    } catch (const FormatError& e) {
        std::string what = e.what();
        if (!e.field().empty()) what.erase(0, e.field().size() + 2);
        throw FormatError(e.field(), what + " (in " + path.filename().string() + ")");
    }
}

void check_unique_doc_ids(const std::vector<DocumentBundle>& batch) {
    std::set<std::string> seen;
    for (const auto& b : batch)
        if (!seen.insert(b.doc_id).second) throw ConflictError("duplicate doc_id '" + b.doc_id + "' in batch");
}

std::vector<DocumentBundle> load_bundle_dir(const fs::path& dir, const LoadOptions& options) {
    if (!fs::is_directory(dir)) throw UsageError("bundle directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension();
        if (ext == ".json" || ext == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<DocumentBundle> out;
    for (const auto& f : files) out.push_back(load_bundle(f, options));
    check_unique_doc_ids(out);
    return out;
}

json to_json(const PaperMeta& meta) {
    nlohmann::ordered_json j;
    for (auto k : PaperMeta::keys()) j[std::string(k)] = meta.at(k);
    return json(j);
}

json to_json(const DocumentBundle& b) {
    json j;
    j["doc_id"] = b.doc_id;
    j["meta"] = to_json(b.meta);
    j["snippets"] = json::array();
    for (const auto& s : b.snippets) {
        json sj{{"snippet_id", s.snippet_id},
                {"text", s.text},
                {"char_span", {s.char_span.start, s.char_span.end}}};
        sj["section_label"] = s.section_label ? json(*s.section_label) : json(nullptr);
        j["snippets"].push_back(std::move(sj));
    }
    j["tables"] = json::array();
    for (const auto& t : b.tables) {
        json tj{{"table_id", t.table_id}, {"caption", t.caption}, {"header", t.header}, {"rows", t.rows}};
        tj["source_page"] = t.source_page ? json(*t.source_page) : json(nullptr);
        j["tables"].push_back(std::move(tj));
    }
    for (const auto& t : b.pending_tables)
        j["tables"].push_back({{"table_id", t.table_id}, {"caption", t.caption}, {"raw_text", t.raw_text}});
    j["figures"] = json::array();
    for (const auto& f : b.figures) {
        json fj{{"figure_id", f.figure_id}, {"caption", f.caption}, {"insight_text", f.insight_text},
                {"degraded", f.degraded}};
        fj["image_ref"] = f.image_ref ? json(*f.image_ref) : json(nullptr);
        j["figures"].push_back(std::move(fj));
    }
    j["unparsed_tables"] = json::array();
    for (const auto& t : b.unparsed_tables)
        j["unparsed_tables"].push_back({{"table_id", t.table_id}, {"caption", t.caption}, {"raw_text", t.raw_text}});
    if (!b.pages.empty()) {
        j["pages"] = json::array();
        for (const auto& p : b.pages) j["pages"].push_back({{"page", p.page}, {"text", p.text}});
    }
    if (!b.meta_provided) j.erase("meta");
    return j;
}

}  // namespace scitab::ingest
