#include "scitab/eval/scorer.hpp"

#include "scitab/csv.hpp"
#include "scitab/error.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <set>

namespace scitab::eval {

bool is_blank(std::string_view value) {
    auto f = text::fold_collapse(value);
    return f.empty() || f == "empty";
}

int score_value(std::string_view generated, std::string_view gold) {
    const bool g_blank = is_blank(generated), t_blank = is_blank(gold);
    if (g_blank || t_blank) return g_blank == t_blank ? 2 : 0;
    if (text::fold_collapse(generated) == text::fold_collapse(gold)) return 2;
    auto a = text::words(generated), b = text::words(gold);
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (sa.empty() || sb.empty()) return 0;
    auto within = [](const std::set<std::string>& x, const std::set<std::string>& y) {
        return std::includes(y.begin(), y.end(), x.begin(), x.end());
    };
    return within(sa, sb) || within(sb, sa) ? 1 : 0;
}

namespace {

struct Table {
    std::vector<std::string> header;
    bool has_ordinal = false;
    // key -> column -> value, keys in first-seen order
    std::vector<std::pair<std::string, std::optional<int>>> keys;
    std::map<std::pair<std::string, int>, std::map<std::string, std::string>> rows;
};

Table read_table(std::string_view csv_text, bool use_ordinal, const char* which) {
    auto rows = csv::parse(csv_text);
    if (rows.empty()) throw UsageError(std::string(which) + " CSV is empty");
    Table t;
    t.header = rows[0];
    auto find = [&](const char* name) -> std::optional<std::size_t> {
        auto it = std::find(t.header.begin(), t.header.end(), name);
        if (it == t.header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - t.header.begin());
    };
    auto doc_col = find("doc_id");
    if (!doc_col) throw UsageError(std::string(which) + " CSV has no doc_id column");
    auto ord_col = find("ordinal");
    t.has_ordinal = ord_col.has_value();

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != t.header.size())
            throw FormatError(std::string(which) + " row " + std::to_string(r + 1), "arity differs from the header");
        std::optional<int> ordinal;
        if (use_ordinal) {
            try {
                ordinal = std::stoi(row[*ord_col]);
            } catch (const std::exception&) {
                throw FormatError(std::string(which) + " row " + std::to_string(r + 1), "ordinal is not an integer");
            }
        }
        std::pair<std::string, int> key{row[*doc_col], ordinal.value_or(0)};
        auto [it, fresh] = t.rows.try_emplace(key);
        if (fresh) t.keys.emplace_back(key.first, ordinal);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == *doc_col || (ord_col && c == *ord_col)) continue;
            auto& cell = it->second[t.header[c]];
            if (is_blank(row[c])) continue;
            cell = cell.empty() ? row[c] : cell + "; " + row[c];
        }
    }
    return t;
}

bool has_column(const std::vector<std::string>& header, const std::string& name) {
    return std::find(header.begin(), header.end(), name) != header.end();
}

}  // namespace

EvalReport score_tables(std::string_view generated_csv, std::string_view gold_csv) {
    auto probe_gen = csv::parse(generated_csv);
    auto probe_gold = csv::parse(gold_csv);
    const bool use_ordinal = !probe_gen.empty() && !probe_gold.empty() && has_column(probe_gen[0], "ordinal") &&
                             has_column(probe_gold[0], "ordinal");
    auto gen = read_table(generated_csv, use_ordinal, "generated");
    auto gold = read_table(gold_csv, use_ordinal, "gold");

    EvalReport report;
    for (const auto& h : gold.header) {
        if (h == "doc_id" || h == "ordinal") continue;
        if (!has_column(gen.header, h)) throw UsageError("generated CSV lacks the scored column '" + h + "'");
        report.dimensions.push_back(h);
        report.totals[h] = 0;
    }
    for (const auto& [doc_id, ordinal] : gold.keys) {
        std::pair<std::string, int> key{doc_id, ordinal.value_or(0)};
        const auto& gold_row = gold.rows.at(key);
        auto gen_it = gen.rows.find(key);
        ++report.row_count;
        for (const auto& dim : report.dimensions) {
            ScoreEntry e{doc_id, ordinal, dim, 0, "", gold_row.at(dim), ""};
            if (gen_it == gen.rows.end()) {
                e.note = "missing from generated table";
            } else {
                e.generated = gen_it->second.at(dim);
                e.score = score_value(e.generated, e.gold);
            }
            report.totals[dim] += e.score;
            report.grand_total += e.score;
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json j{{"doc_id", e.doc_id}, {"dimension", e.dimension}, {"score", e.score},
                         {"generated", e.generated}, {"gold", e.gold}};
        if (e.ordinal) j["ordinal"] = *e.ordinal;
        if (!e.note.empty()) j["note"] = e.note;
        entries.push_back(std::move(j));
    }
    return {{"dimensions", report.dimensions}, {"entries", entries},       {"totals", report.totals},
            {"grand_total", report.grand_total}, {"max_total", report.max_total()}, {"rows", report.row_count}};
}

}  // namespace scitab::eval
