#include "scitab/quality/quality.hpp"

#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/text.hpp"

#include <algorithm>

namespace scitab::quality {

using gateway::json;
using gateway::Shape;
namespace tid = gateway::template_id;

namespace {

std::optional<int> verdict_value(const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_number_integer() || v.is_number_float()) {
        auto d = v.get<double>();
        if (d == 0.0) return 0;
        if (d == 1.0) return 1;
    }
    if (v.is_string()) {
        auto s = text::fold(v.get<std::string>());
        if (s == "1" || s == "yes") return 1;
        if (s == "0" || s == "no") return 0;
    }
    return std::nullopt;
}

gateway::StructuredCheck verdict_check(std::size_t expected) {
    return [expected](const json& j) -> std::vector<std::string> {
        const auto& v = j.at("verdicts");
        std::vector<std::string> errors;
        if (v.size() != expected)
            errors.push_back("expected " + std::to_string(expected) + " verdicts, got " + std::to_string(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!verdict_value(v[i])) errors.push_back("verdicts[" + std::to_string(i) + "] must be 0 or 1");
        return errors;
    };
}

Shape verdict_shape() { return Shape::object({{"verdicts", Shape::array_of(Shape::scalar()), true}}); }

std::string numbered(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += "\n";
        out += "[" + std::to_string(i + 1) + "] " + items[i];
    }
    return out;
}

double verdict_ratio(const json& verdicts) {
    double yes = 0;
    for (const auto& v : verdicts) yes += *verdict_value(v);
    return yes / static_cast<double>(verdicts.size());
}

std::optional<double> opt_from_json(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

double mean_cosine_clamped(const gateway::EmbeddingVector& q, const std::vector<gateway::EmbeddingVector>& generated) {
    if (generated.empty()) throw UsageError("no reconstructed questions");
    double sum = 0;
    for (const auto& g : generated) sum += gateway::cosine(q, g);
    return std::clamp(sum / static_cast<double>(generated.size()), 0.0, 1.0);
}

std::optional<double> answer_relevancy(gateway::Gateway& gw, const std::string& question, const std::string& answer,
                                       int m) {
    if (m <= 0) throw UsageError("question count must be positive");
    try {
        auto j = gw.complete_structured(tid::question_generation, {{"answer", answer}, {"count", std::to_string(m)}},
                                        Shape::object({{"questions", Shape::array_of(Shape::string(), 1), true}}));
        std::vector<std::string> texts{question};
        for (const auto& q : j.at("questions")) {
            if (static_cast<int>(texts.size()) > m) break;
            auto t = text::trim(q.get<std::string>());
            if (!t.empty()) texts.push_back(t);
        }
        if (texts.size() < 2) return std::nullopt;
        auto vectors = gw.embed(texts);
        std::vector<gateway::EmbeddingVector> generated(vectors.begin() + 1, vectors.end());
        return mean_cosine_clamped(vectors.front(), generated);
    } catch (const StructuredOutputError& e) {
        gw.diagnostics().warn(std::string("answer relevancy unavailable: ") + e.what());
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("answer relevancy unavailable: ") + e.what());
    }
    return std::nullopt;
}

std::vector<std::string> context_sentences(const std::vector<std::string>& contexts) {
    std::vector<std::string> out;
    for (const auto& c : contexts)
        for (auto& s : text::sentences(c)) {
            auto t = text::collapse_whitespace(text::trim(s));
            if (!t.empty()) out.push_back(std::move(t));
        }
    return out;
}

std::optional<double> context_relevancy(gateway::Gateway& gw, const std::string& question,
                                        const std::vector<std::string>& contexts) {
    if (contexts.empty()) throw UsageError("context relevancy needs contexts");
    auto sentences = context_sentences(contexts);
    if (sentences.empty()) return std::nullopt;
    try {
        auto j = gw.complete_structured(tid::context_relevance, {{"question", question}, {"sentences", numbered(sentences)}},
                                        verdict_shape(), verdict_check(sentences.size()));
        return verdict_ratio(j.at("verdicts"));
    } catch (const StructuredOutputError& e) {
        gw.diagnostics().warn(std::string("context relevancy unavailable: ") + e.what());
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("context relevancy unavailable: ") + e.what());
    }
    return std::nullopt;
}

std::optional<double> faithfulness(gateway::Gateway& gw, const std::string& answer,
                                   const std::vector<std::string>& contexts) {
    if (text::trim(answer).empty()) throw UsageError("faithfulness needs an answer");
    try {
        auto c = gw.complete_structured(tid::claim_decomposition, {{"answer", answer}},
                                        Shape::object({{"claims", Shape::array_of(Shape::string()), true}}));
        std::vector<std::string> claims;
        for (const auto& claim : c.at("claims")) {
            auto t = text::trim(claim.get<std::string>());
            if (!t.empty()) claims.push_back(t);
        }
        if (claims.empty()) return std::nullopt;
        std::string joined;
        for (const auto& ctx : contexts) joined += (joined.empty() ? "" : "\n\n") + ctx;
        auto v = gw.complete_structured(tid::claim_verification, {{"contexts", joined}, {"claims", numbered(claims)}},
                                        verdict_shape(), verdict_check(claims.size()));
        return verdict_ratio(v.at("verdicts"));
    } catch (const StructuredOutputError& e) {
        gw.diagnostics().warn(std::string("faithfulness unavailable: ") + e.what());
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("faithfulness unavailable: ") + e.what());
    }
    return std::nullopt;
}

QualityScores score_record(gateway::Gateway& gw, const std::string& question, const TableSchema& schema,
                           const DataRecord& record, const std::vector<std::string>& contexts) {
    QualityScores s;
    if (contexts.empty() || record.degraded) return s;
    auto answer = answer_text(record, schema);
    s.answer_relevancy = answer_relevancy(gw, question, answer);
    s.context_relevancy = context_relevancy(gw, question, contexts);
    if (!record.all_empty()) s.faithfulness = faithfulness(gw, answer, contexts);
    return s;
}

double missingness(const std::vector<DataRecord>& records, const TableSchema& schema) {
    std::size_t total = 0, empty = 0;
    for (const auto& r : records) {
        for (const auto& c : schema.columns) {
            ++total;
            auto it = r.cells.find(c.name);
            if (it == r.cells.end() || it->second.is_empty()) ++empty;
        }
    }
    if (total == 0) throw UsageError("missingness of a table without cells");
    return static_cast<double>(empty) / static_cast<double>(total);
}

std::optional<double> inconsistency(const std::vector<std::string>& values) {
    if (values.empty()) return std::nullopt;
    std::set<std::string> distinct;
    for (const auto& v : values) distinct.insert(text::fold(v));
    return static_cast<double>(distinct.size()) / static_cast<double>(values.size());
}

std::optional<double> column_inconsistency(const std::vector<DataRecord>& records, const std::string& column) {
    std::vector<std::string> values;
    for (const auto& r : records) {
        auto it = r.cells.find(column);
        if (it != r.cells.end() && !it->second.is_empty()) values.push_back(it->second.text());
    }
    return inconsistency(values);
}

std::set<Flag> raw_flags(const DataRecord& r, const Thresholds& t) {
    std::set<Flag> f;
    if (r.empty_count() > 0) f.insert(Flag::empty_cells);
    const auto& q = r.quality;
    if ((q.answer_relevancy && *q.answer_relevancy < t.answer_relevancy) ||
        (q.context_relevancy && *q.context_relevancy < t.context_relevancy) ||
        (q.faithfulness && *q.faithfulness < t.faithfulness))
        f.insert(Flag::low_relevance);
    if (!r.unverified_columns.empty()) f.insert(Flag::unverified_span);
    if (r.degraded) f.insert(Flag::degraded);
    return f;
}

void flag_record(DataRecord& r, const Thresholds& t) {
    if (!r.acknowledged.empty() && !(r.quality == r.acknowledged_scores)) r.acknowledged.clear();
    r.flags.clear();
    for (auto f : raw_flags(r, t))
        if (!r.acknowledged.count(f)) r.flags.insert(f);
}

void flag_records(std::vector<DataRecord>& records, const Thresholds& t) {
    for (auto& r : records) flag_record(r, t);
}

TableQuality table_quality(const std::vector<DataRecord>& records, const TableSchema& schema, const Thresholds& t) {
    TableQuality q;
    q.thresholds = t;
    if (!records.empty() && !schema.columns.empty()) q.missingness = missingness(records, schema);
    for (const auto& c : schema.columns) q.inconsistency[c.name] = column_inconsistency(records, c.name);
    return q;
}

json to_json(const QualityScores& s) {
    return {{"answer_relevancy", opt_to_json(s.answer_relevancy)},
            {"context_relevancy", opt_to_json(s.context_relevancy)},
            {"faithfulness", opt_to_json(s.faithfulness)}};
}

QualityScores scores_from_json(const json& j) {
    return {opt_from_json(j, "answer_relevancy"), opt_from_json(j, "context_relevancy"), opt_from_json(j, "faithfulness")};
}

json to_json(const Thresholds& t) {
    return {{"answer_relevancy", t.answer_relevancy},
            {"context_relevancy", t.context_relevancy},
            {"faithfulness", t.faithfulness}};
}

Thresholds thresholds_from_json(const json& j) {
    Thresholds t;
    t.answer_relevancy = j.value("answer_relevancy", t.answer_relevancy);
    t.context_relevancy = j.value("context_relevancy", t.context_relevancy);
    t.faithfulness = j.value("faithfulness", t.faithfulness);
    for (double v : {t.answer_relevancy, t.context_relevancy, t.faithfulness})
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("quality thresholds must lie in [0,1]");
    return t;
}

json quality_report(const TableSchema& schema, const std::vector<DataRecord>& records, const TableQuality& q) {
    nlohmann::ordered_json out;
    out["thresholds"] = to_json(q.thresholds);
    out["missingness"] = opt_to_json(q.missingness);
    nlohmann::ordered_json inc = nlohmann::ordered_json::object();
    for (const auto& c : schema.columns) {
        auto it = q.inconsistency.find(c.name);
        inc[c.name] = it == q.inconsistency.end() ? json(nullptr) : opt_to_json(it->second);
    }
    out["inconsistency"] = inc;
    out["records"] = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json rj;
        rj["doc_id"] = r.doc_id;
        rj["ordinal"] = r.ordinal;
        rj["scores"] = to_json(r.quality);
        rj["empty_cells"] = r.empty_count();
        std::vector<std::string> flags, acked;
        for (auto f : r.flags) flags.emplace_back(to_string(f));
        for (auto f : r.acknowledged) acked.emplace_back(to_string(f));
        rj["flags"] = flags;
        rj["acknowledged"] = acked;
        rj["unverified_columns"] = r.unverified_columns;
        rj["degraded"] = r.degraded;
        out["records"].push_back(std::move(rj));
    }
    return json(out);
}

}  // namespace scitab::quality
