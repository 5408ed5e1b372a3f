#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/quality/quality.hpp"
#include "scitab/standardize/standardize.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace scitab::standardize {

using gateway::json;

namespace {

bool numeric(DeclaredKind k) { return k == DeclaredKind::floating || k == DeclaredKind::integer; }

std::optional<double> numeric_value(const CellValue& c) {
    if (c.is_empty()) return std::nullopt;
    if (const auto& t = c.typed()) {
        if (auto d = std::get_if<double>(&*t)) return *d;
        if (auto i = std::get_if<std::int64_t>(&*t)) return static_cast<double>(*i);
    }
    return leading_number(c.text());
}

// Tier per entry from the rank terciles of the totals.
std::vector<std::string> tiers(const std::vector<std::size_t>& totals) {
    std::vector<std::optional<double>> v;
    for (auto t : totals) v.emplace_back(static_cast<double>(t));
    return bin_numeric(v);
}

std::vector<double> as_row(const gateway::EmbeddingVector& v) { return {v.values().begin(), v.values().end()}; }

}  // namespace

std::vector<EncodedRow> encode_rows(const std::vector<DataRecord>& records, const TableSchema& schema,
                                    const std::vector<std::string>& columns) {
    if (columns.empty()) throw UsageError("select at least one column");
    for (const auto& c : columns)
        if (!schema.has(c)) throw UsageError("unknown column '" + c + "'");

    // Rendered value per column per record.
    std::vector<std::vector<std::string>> rendered(columns.size(), std::vector<std::string>(records.size()));
    for (std::size_t ci = 0; ci < columns.size(); ++ci) {
        const auto& col = schema.column(columns[ci]);
        if (numeric(col.kind)) {
            std::vector<std::optional<double>> values;
            for (const auto& r : records) values.push_back(numeric_value(r.cells.at(col.name)));
            auto bins = bin_numeric(values);
            for (std::size_t ri = 0; ri < records.size(); ++ri) rendered[ci][ri] = bins[ri];
        } else {
            for (std::size_t ri = 0; ri < records.size(); ++ri) {
                const auto& cell = records[ri].cells.at(col.name);
                rendered[ci][ri] = cell.is_empty() ? "empty" : text::collapse_whitespace(text::trim(cell.text()));
            }
        }
    }

    std::vector<EncodedRow> out;
    std::map<std::string, std::size_t> seen;
    for (std::size_t ri = 0; ri < records.size(); ++ri) {
        std::vector<std::string> parts;
        for (std::size_t ci = 0; ci < columns.size(); ++ci) parts.push_back(columns[ci] + ": " + rendered[ci][ri]);
        auto t = text::join(parts, "; ");
        auto [it, fresh] = seen.emplace(t, out.size());
        if (fresh) out.push_back({t, 0, {}});
        auto& row = out[it->second];
        ++row.frequency;
        row.record_indices.push_back(ri);
    }
    return out;
}

std::vector<Member> sort_members(std::vector<Member> members) {
    std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return members;
}

std::string label_cluster(gateway::Gateway& gw, std::vector<Member> members) {
    if (members.empty()) throw UsageError("label_cluster needs at least one member");
    members = sort_members(std::move(members));
    if (members.size() == 1) return members.front().first;

    std::string lines;
    for (const auto& [value, count] : members) lines += "- " + value + " (" + std::to_string(count) + ")\n";
    std::string label;
    try {
        label = gw.complete(gateway::template_id::cluster_label, {{"members", lines}});
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("cluster label fell back to the most frequent value: ") + e.what());
    }
    auto first_line = text::trim(label.substr(0, label.find('\n')));
    while (!first_line.empty() && (first_line.front() == '"' || first_line.front() == '\'')) first_line.erase(0, 1);
    while (!first_line.empty() && (first_line.back() == '"' || first_line.back() == '\'' || first_line.back() == '.'))
        first_line.pop_back();
    auto words = text::split(text::collapse_whitespace(first_line), ' ');
    words.erase(std::remove(words.begin(), words.end(), std::string()), words.end());
    if (words.empty()) return members.front().first;
    if (words.size() > static_cast<std::size_t>(kMaxLabelWords)) words.resize(kMaxLabelWords);
    return text::join(words, " ");
}

GroupingResult group_rows(gateway::Gateway& gw, const std::vector<DataRecord>& records, const TableSchema& schema,
                          const std::vector<std::string>& columns, const ClusterOptions& options) {
    GroupingResult g;
    g.columns = columns;
    auto rows = encode_rows(records, schema, columns);
    if (rows.empty()) return g;

    std::vector<std::string> texts;
    std::vector<double> weights;
    for (const auto& r : rows) {
        texts.push_back(r.text);
        weights.push_back(static_cast<double>(r.frequency));
    }
    std::vector<std::vector<double>> vectors;
    for (const auto& v : gw.embed(texts)) vectors.push_back(as_row(v));
    auto xy = project_2d(vectors);
    auto clusters = cluster(vectors, weights, options);
    g.k = clusters.k;

    std::vector<std::map<std::string, std::size_t>> members(static_cast<std::size_t>(clusters.k));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        GroupPoint p;
        p.x = xy[i].x;
        p.y = xy[i].y;
        p.cluster_id = clusters.assignments[i];
        p.frequency = rows[i].frequency;
        p.text = rows[i].text;
        auto& bucket = members[static_cast<std::size_t>(p.cluster_id)];
        for (auto ri : rows[i].record_indices) {
            const auto& rec = records[ri];
            p.records.push_back({rec.doc_id, rec.ordinal});
            std::string variant = rows[i].text;
            if (columns.size() == 1) {
                const auto& cell = rec.cells.at(columns.front());
                variant = cell.is_empty() ? "empty" : cell.text();
            }
            ++bucket[variant];
        }
        g.points.push_back(std::move(p));
    }

    std::vector<std::size_t> totals;
    for (int c = 0; c < clusters.k; ++c) {
        GroupCluster gc;
        gc.cluster_id = c;
        std::vector<Member> m(members[static_cast<std::size_t>(c)].begin(), members[static_cast<std::size_t>(c)].end());
        gc.members = sort_members(std::move(m));
        std::size_t total = 0;
        for (const auto& [_, n] : gc.members) total += n;
        totals.push_back(total);
        g.clusters.push_back(std::move(gc));
    }
    auto tier = tiers(totals);
    for (std::size_t c = 0; c < g.clusters.size(); ++c) {
        g.clusters[c].tier = tier[c];
        g.clusters[c].label = label_cluster(gw, g.clusters[c].members);
    }
    return g;
}

StandardizationPlan propose_groups(gateway::Gateway& gw, const std::vector<DataRecord>& records,
                                   const TableSchema& schema, const std::string& column,
                                   const ClusterOptions& options) {
    if (!schema.has(column)) throw UsageError("unknown column '" + column + "'");
    StandardizationPlan plan;
    plan.column = column;
    std::vector<DataRecord> filled;
    for (const auto& r : records)
        if (auto it = r.cells.find(column); it != r.cells.end() && !it->second.is_empty()) filled.push_back(r);
    if (filled.empty()) return plan;

    auto g = group_rows(gw, filled, schema, {column}, options);
    std::set<std::string> claimed, names;
    for (const auto& c : g.clusters) {
        PlanGroup group;
        for (const auto& [value, count] : c.members) {
            // Spelling variants that fold together stay in the first group that saw them.
            if (!claimed.insert(text::fold(value)).second) continue;
            group.variants.push_back(value);
            group.counts.push_back(count);
        }
        if (group.variants.empty()) continue;
        group.name = c.label;
        for (int n = 2; !names.insert(group.name).second; ++n) group.name = c.label + " (" + std::to_string(n) + ")";
        group.canonical = group.variants.front();
        group.tier = c.tier;
        plan.groups.push_back(std::move(group));
    }
    return plan;
}

void validate_plan(const StandardizationPlan& plan, const TableSchema& schema) {
    if (!schema.has(plan.column)) throw UsageError("plan targets unknown column '" + plan.column + "'");
    std::map<std::string, std::string> owner;  // folded variant -> group name
    std::set<std::string> names;
    for (const auto& g : plan.groups) {
        if (text::trim(g.name).empty()) throw UsageError("plan group without a name");
        if (!names.insert(g.name).second) throw UsageError("plan group '" + g.name + "' appears twice");
        if (text::trim(g.canonical).empty()) throw UsageError("plan group '" + g.name + "' has no canonical value");
        for (const auto& v : g.variants) {
            auto [it, fresh] = owner.emplace(text::fold(v), g.name);
            if (!fresh && it->second != g.name)
                throw UsageError("variant '" + v + "' is claimed by groups '" + it->second + "' and '" + g.name + "'");
        }
    }
    for (const auto& g : plan.groups) {
        auto it = owner.find(text::fold(g.canonical));
        if (it != owner.end() && it->second != g.name)
            throw UsageError("canonical value '" + g.canonical + "' of group '" + g.name +
                             "' is a variant of group '" + it->second + "'");
    }
}

ApplyResult apply_plan(std::vector<DataRecord>& records, const TableSchema& schema, const StandardizationPlan& plan) {
    validate_plan(plan, schema);
    ApplyResult result;
    result.inconsistency_before = quality::column_inconsistency(records, plan.column);

    std::map<std::string, std::string> target;
    for (const auto& g : plan.groups)
        for (const auto& v : g.variants) target.emplace(text::fold(v), g.canonical);

    std::set<std::string> present;
    for (const auto& r : records)
        if (auto it = r.cells.find(plan.column); it != r.cells.end() && !it->second.is_empty())
            present.insert(text::fold(it->second.text()));
    for (const auto& g : plan.groups)
        for (const auto& v : g.variants)
            if (!present.count(text::fold(v))) result.stale_variants.push_back(v);

    const auto kind = schema.column(plan.column).kind;
    for (auto& r : records) {
        auto it = r.cells.find(plan.column);
        if (it == r.cells.end() || it->second.is_empty()) continue;
        auto t = target.find(text::fold(it->second.text()));
        if (t == target.end() || it->second.text() == t->second) continue;
        auto updated = CellValue::of(t->second, kind);
        result.changes.push_back({r.doc_id, r.ordinal, plan.column, it->second, updated});
        it->second = std::move(updated);
    }
    result.inconsistency_after = quality::column_inconsistency(records, plan.column);
    return result;
}

json to_json(const GroupingResult& g) {
    json points = json::array();
    for (const auto& p : g.points) {
        json refs = json::array();
        for (const auto& r : p.records) refs.push_back({{"doc_id", r.doc_id}, {"ordinal", r.ordinal}});
        points.push_back({{"x", p.x},
                          {"y", p.y},
                          {"cluster_id", p.cluster_id},
                          {"frequency", p.frequency},
                          {"text", p.text},
                          {"records", refs}});
    }
    json clusters = json::array();
    for (const auto& c : g.clusters) {
        json members = json::array();
        for (const auto& [v, n] : c.members) members.push_back({{"value", v}, {"count", n}});
        clusters.push_back({{"cluster_id", c.cluster_id}, {"label", c.label}, {"tier", c.tier}, {"members", members}});
    }
    return {{"columns", g.columns}, {"k", g.k}, {"points", points}, {"clusters", clusters}};
}

json to_json(const StandardizationPlan& p) {
    json groups = json::array();
    for (const auto& g : p.groups) {
        json gj{{"name", g.name}, {"canonical", g.canonical}, {"variants", g.variants}};
        if (!g.counts.empty()) gj["counts"] = g.counts;
        if (!g.tier.empty()) gj["tier"] = g.tier;
        groups.push_back(std::move(gj));
    }
    return {{"column", p.column}, {"groups", groups}};
}

StandardizationPlan plan_from_json(const json& j) {
    if (!j.is_object()) throw UsageError("plan must be a JSON object");
    StandardizationPlan p;
    if (!j.contains("column") || !j["column"].is_string()) throw UsageError("plan needs a \"column\" string");
    p.column = j["column"].get<std::string>();
    const auto groups = j.value("groups", json::array());
    auto strings = [](const json& v, const std::string& what) {
        if (!v.is_array()) throw UsageError(what + " must be an array of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw UsageError(what + " must be an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    };
    if (groups.is_array()) {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const auto& g = groups[i];
            auto where = "groups[" + std::to_string(i) + "]";
            if (!g.is_object() || !g.contains("name") || !g["name"].is_string())
                throw UsageError(where + " needs a \"name\" string");
            PlanGroup pg;
            pg.name = g["name"].get<std::string>();
            pg.variants = strings(g.value("variants", json::array()), where + ".variants");
            pg.canonical = g.value("canonical", std::string());
            if (g.contains("counts") && g["counts"].is_array()) pg.counts = g["counts"].get<std::vector<std::size_t>>();
            pg.tier = g.value("tier", std::string());
            p.groups.push_back(std::move(pg));
        }
    } else if (groups.is_object()) {
        // {"groups": {name: [variants]}, "canonical": {name: value}}
        const auto canon = j.value("canonical", json::object());
        for (const auto& [name, variants] : groups.items()) {
            PlanGroup pg;
            pg.name = name;
            pg.variants = strings(variants, "groups." + name);
            pg.canonical = canon.value(name, std::string());
            p.groups.push_back(std::move(pg));
        }
    } else {
        throw UsageError("plan \"groups\" must be an array or an object");
    }
    return p;
}

}  // namespace scitab::standardize
