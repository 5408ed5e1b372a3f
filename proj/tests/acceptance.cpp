// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "oracles.hpp"
#include "support.hpp"

#include "scitab/batch.hpp"
#include "scitab/error.hpp"
#include "scitab/eval/scorer.hpp"
#include "scitab/extract/extraction.hpp"
#include "scitab/index/vector_index.hpp"
#include "scitab/ingest/bundle_io.hpp"
#include "scitab/pipeline.hpp"
#include "scitab/quality/quality.hpp"
#include "scitab/standardize/standardize.hpp"
#include "scitab/store/table_store.hpp"
#include "scitab/text.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace scitab;
using gateway::EmbeddingVector;
using gateway::json;
using gateway::MockScript;
using scitab::testing::mock_env;
using scitab::testing::rule;
namespace tid = gateway::template_id;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the first few failure messages of one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (messages_.size() < 5) messages_.push_back(what);
    }
    bool ok() const { return failures_ == 0; }
    std::string detail() const {
        std::string out;
        for (const auto& m : messages_) out += "\n    " + m;
        if (failures_ > messages_.size()) out += "\n    (" + std::to_string(failures_ - messages_.size()) + " more)";
        return out;
    }

private:
    std::size_t failures_ = 0;
    std::vector<std::string> messages_;
};

struct Outcome {
    bool pass = false;
    std::string summary;
};

Outcome finish(const Check& c, std::string summary) {
    return {c.ok(), c.ok() ? std::move(summary) : summary + c.detail()};
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> n;
    std::vector<double> v(dim);
    for (auto& x : v) x = n(rng);
    return EmbeddingVector::normalized(std::move(v));
}

// --- 1 ---------------------------------------------------------------------

Outcome retrieval_oracle() {
    Check c;
    std::mt19937_64 rng(1001);
    double spent = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 1000, dim = 2 + rng() % 63;
        std::vector<EmbeddingVector> vecs;
        for (std::size_t i = 0; i < n; ++i)
            vecs.push_back(i > 0 && rng() % 8 == 0 ? vecs[rng() % i] : random_unit(rng, dim));
        auto q = rng() % 10 == 0 ? vecs[rng() % n] : random_unit(rng, dim);

        const auto t0 = Clock::now();
        index::VectorIndex idx;
        for (std::size_t i = 0; i < n; ++i) idx.add({"c" + std::to_string(i), "d", index::ChunkKind::text}, vecs[i]);
        std::map<int, std::vector<index::RetrievalHit>> got;
        for (int k : {1, 5, 10}) got[k] = idx.search(q, k);
        spent += seconds_since(t0);

        std::vector<std::pair<double, std::string>> all;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t d = 0; d < dim; ++d) s += q[d] * vecs[i][d];
            all.emplace_back(s, "c" + std::to_string(i));
        }
        std::sort(all.begin(), all.end(),
                  [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
        for (int k : {1, 5, 10}) {
            const auto want = std::min<std::size_t>(n, k);
            c.expect(got[k].size() == want, "trial " + std::to_string(trial) + ": wrong hit count");
            for (std::size_t i = 0; i < std::min(want, got[k].size()); ++i) {
                c.expect(got[k][i].chunk_id == all[i].second,
                         "trial " + std::to_string(trial) + " k=" + std::to_string(k) + " rank " + std::to_string(i));
                c.expect(std::abs(got[k][i].score - all[i].first) <= 1e-9, "score off by more than 1e-9");
            }
        }
    }
    c.expect(spent < 5.0, "runtime " + fmt(spent) + " s");
    return finish(c, "200 trials, n<=1000, k in {1,5,10}, " + fmt(spent) + " s");
}

// --- 2 ---------------------------------------------------------------------

Outcome projection_oracle() {
    Check c;
    std::mt19937_64 rng(2002);
    std::normal_distribution<double> nd;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng() % 198, d = 2 + rng() % 63;
        // Random per-axis scales keep the top eigenvalues apart.
        std::vector<double> scale(d);
        for (std::size_t j = 0; j < d; ++j) scale[j] = std::pow(0.8, static_cast<double>(j)) * (1 + 0.1 * nd(rng));
        oracle::Matrix rows(n, std::vector<double>(d));
        for (auto& r : rows)
            for (std::size_t j = 0; j < d; ++j) r[j] = scale[j] * nd(rng);
        auto got = standardize::project_2d(rows);
        auto want = oracle::pca_2d(rows);
        const double dev = oracle::max_abs_deviation_up_to_sign(got, want);
        worst = std::max(worst, dev);
        c.expect(dev <= 1e-6, "trial " + std::to_string(trial) + " deviation " + fmt(dev));
    }
    double worst_y = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng() % 100, d = 2 + rng() % 30;
        std::vector<double> dir(d), off(d);
        for (std::size_t j = 0; j < d; ++j) dir[j] = nd(rng), off[j] = nd(rng);
        oracle::Matrix rows;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = nd(rng) * 5;
            std::vector<double> r(d);
            for (std::size_t j = 0; j < d; ++j) r[j] = off[j] + t * dir[j];
            rows.push_back(r);
        }
        for (const auto& p : standardize::project_2d(rows)) worst_y = std::max(worst_y, std::abs(p.y));
    }
    c.expect(worst_y < 1e-9, "rank-1 |y| = " + fmt(worst_y));
    return finish(c, "100 matrices, max deviation " + fmt(worst) + ", rank-1 max |y| " + fmt(worst_y));
}

// --- 3 ---------------------------------------------------------------------

Outcome cluster_recovery() {
    Check c;
    std::mt19937_64 rng(3003);
    double lowest = 1.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int k = trial % 2 ? 3 : 2;
        const std::size_t dim = 2 + rng() % 15;
        const double sigma = 0.5 + static_cast<double>(rng() % 100) / 100.0;
        auto blobs = oracle::make_blobs(rng, k, 10 + static_cast<int>(rng() % 30), dim, sigma, 10.0 * sigma);
        standardize::ClusterOptions opts;
        opts.seed = rng();
        auto fixed = standardize::cluster(blobs.points, {}, [&] {
            auto o = opts;
            o.k = k;
            return o;
        }());
        auto chosen = standardize::cluster(blobs.points, {}, opts);
        const double acc = oracle::permutation_accuracy(blobs.labels, fixed.assignments);
        const double acc_auto = oracle::permutation_accuracy(blobs.labels, chosen.assignments);
        lowest = std::min({lowest, acc, acc_auto});
        c.expect(acc >= 0.95, "trial " + std::to_string(trial) + " accuracy " + fmt(acc));
        c.expect(acc_auto >= 0.95, "trial " + std::to_string(trial) + " auto-k accuracy " + fmt(acc_auto));
        auto again = standardize::cluster(blobs.points, {}, opts);
        c.expect(again.assignments == chosen.assignments, "trial " + std::to_string(trial) + " not deterministic");
    }
    return finish(c, "50 instances, lowest accuracy " + fmt(lowest) + ", identical seeds reproduce");
}

// --- 4 ---------------------------------------------------------------------

TableSchema schema_n(std::size_t n) {
    TableSchema s;
    s.source_question = "q";
    for (std::size_t i = 0; i < n; ++i) s.columns.push_back({"c" + std::to_string(i), "String: c", DeclaredKind::string});
    return s;
}

Outcome metric_exactness() {
    Check c;
    std::mt19937_64 rng(4004);
    for (int trial = 0; trial < 200; ++trial) {
        auto s = schema_n(1 + rng() % 8);
        const std::size_t rows = 1 + rng() % 50;
        std::vector<DataRecord> recs;
        std::size_t empties = 0;
        std::vector<std::vector<std::string>> by_col(s.columns.size());
        for (std::size_t r = 0; r < rows; ++r) {
            auto rec = empty_record(s, "d" + std::to_string(r), 0);
            for (std::size_t j = 0; j < s.columns.size(); ++j) {
                if (rng() % 3 == 0) {
                    ++empties;
                    continue;
                }
                std::string v = "v" + std::to_string(rng() % 7);
                if (rng() % 4 == 0) v = " " + v;
                if (rng() % 4 == 0) v = "V" + v.substr(v.find('v') + 1);
                rec.cells[s.columns[j].name] = CellValue::of(v);
                by_col[j].push_back(v);
            }
            recs.push_back(rec);
        }
        const double total = static_cast<double>(rows * s.columns.size());
        c.expect(quality::missingness(recs, s) == static_cast<double>(empties) / total, "missingness recount");
        for (std::size_t j = 0; j < s.columns.size(); ++j) {
            auto got = quality::column_inconsistency(recs, s.columns[j].name);
            if (by_col[j].empty()) {
                c.expect(!got, "all-Empty column has an inconsistency score");
            } else {
                c.expect(got && *got == oracle::distinct_ratio(by_col[j]), "inconsistency recount");
            }
        }
    }

    // Judge scores under random mock verdicts stay within [0,1].
    for (int trial = 0; trial < 40; ++trial) {
        json verdicts = json::array(), claims = json::array(), questions = json::array();
        for (int i = 0; i < 4; ++i) verdicts.push_back(static_cast<int>(rng() % 2));
        for (int i = 0; i < 3; ++i) claims.push_back("claim " + std::to_string(i));
        json claim_verdicts = json::array();
        for (int i = 0; i < 3; ++i) claim_verdicts.push_back(static_cast<int>(rng() % 2));
        for (int i = 0; i < 3; ++i) questions.push_back("question " + std::to_string(rng() % 100) + "?");
        MockScript script;
        script.rules.push_back(rule(tid::context_relevance, {json{{"verdicts", verdicts}}.dump()}));
        script.rules.push_back(rule(tid::claim_decomposition, {json{{"claims", claims}}.dump()}));
        script.rules.push_back(rule(tid::claim_verification, {json{{"verdicts", claim_verdicts}}.dump()}));
        script.rules.push_back(rule(tid::question_generation, {json{{"questions", questions}}.dump()}));
        auto env = mock_env(script);
        auto s = schema_n(2);
        auto rec = empty_record(s, "d", 0);
        rec.cells["c0"] = CellValue::of("alpha");
        auto q = quality::score_record(*env, "what is c0?", s, rec, {"One. Two.", "Three. Four."});
        for (auto v : {q.answer_relevancy, q.context_relevancy, q.faithfulness}) {
            c.expect(v.has_value(), "judge score absent under a working mock");
            if (v) c.expect(*v >= 0.0 && *v <= 1.0, "judge score " + fmt(*v) + " outside [0,1]");
        }
    }

    // Worked examples.
    auto unit = [](double cos) { return EmbeddingVector::normalized({cos, std::sqrt(1 - cos * cos)}); };
    const double ar = quality::mean_cosine_clamped(EmbeddingVector::normalized({1, 0}), {unit(0.9), unit(0.8), unit(0.7)});
    c.expect(std::abs(ar - 0.8) < 1e-12, "answer relevancy example gave " + fmt(ar));
    {
        MockScript script;
        script.rules.push_back(rule(tid::context_relevance, {R"({"verdicts":[1,0,1,0,1,0,1,0]})"}));
        auto env = mock_env(script);
        auto cr = quality::context_relevancy(*env, "q", {"One. Two. Three. Four.", "Five. Six. Seven. Eight."});
        c.expect(cr && *cr == 0.5, "context relevancy 4 of 8");
    }
    {
        MockScript script;
        script.rules.push_back(rule(tid::claim_decomposition, {R"({"claims":["a","b","c"]})"}));
        script.rules.push_back(rule(tid::claim_verification, {R"({"verdicts":[0,1,0]})"}));
        auto env = mock_env(script);
        auto f = quality::faithfulness(*env, "model: X", {"context"});
        c.expect(f && std::abs(*f - 1.0 / 3.0) < 1e-12, "faithfulness 1 of 3");
    }
    {
        auto s = schema_n(4);
        auto full = [&](std::vector<bool> e) {
            auto r = empty_record(s, "d", 0);
            for (std::size_t i = 0; i < 4; ++i)
                if (!e[i]) r.cells[s.columns[i].name] = CellValue::of("x");
            return r;
        };
        std::vector<DataRecord> recs{full({false, true, false, false}), full({true, false, false, false}),
                                     full({false, false, true, false})};
        c.expect(quality::missingness(recs, s) == 0.25, "missingness 3 of 12");
        c.expect(*quality::inconsistency({"OFSP", "OFSP", "OFSP"}) == 1.0 / 3.0, "inconsistency 1 of 3");
    }
    return finish(c, "200 random tables exact; judge scores in [0,1]; worked examples match");
}

// --- 5 ---------------------------------------------------------------------

Outcome standardization_algebra() {
    Check c;
    using standardize::PlanGroup;
    using standardize::StandardizationPlan;
    std::mt19937_64 rng(5005);
    const std::vector<std::vector<std::string>> vocabularies{
        {"OFSP", "ofsp", "Orange Sweet Potato", "Orange-fleshed Sweet Potato", "maize", "Maize ", "corn", "yam"},
        {"µg/g", "ug/g", "mg/100g", "mg / 100 g", "ppm", "%"},
        {"GPT-3", "gpt-3", "BERT", "bert-base", "T5", "LLaMA 13B", "llama-13b"}};
    TableSchema s{{{"col", "String: col", DeclaredKind::string}}, "q"};
    int used = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto& vocab = vocabularies[rng() % vocabularies.size()];
        std::vector<DataRecord> recs;
        for (auto n = 1 + rng() % 40; n > 0; --n) {
            auto r = empty_record(s, "d" + std::to_string(recs.size()), 0);
            if (rng() % 5) r.cells["col"] = CellValue::of(vocab[rng() % vocab.size()]);
            recs.push_back(r);
        }
        std::map<std::string, std::vector<std::string>> by_fold;
        for (const auto& v : vocab) by_fold[text::fold(text::trim(v))].push_back(v);
        std::vector<std::vector<std::string>> groups(1 + rng() % 3);
        for (auto& [_, vs] : by_fold)
            if (rng() % 3) {
                auto& g = groups[rng() % groups.size()];
                g.insert(g.end(), vs.begin(), vs.end());
            }
        StandardizationPlan plan{"col", {}};
        for (auto& g : groups)
            if (!g.empty()) plan.groups.push_back({"g" + std::to_string(plan.groups.size()), g, g[rng() % g.size()], {}, ""});
        try {
            standardize::validate_plan(plan, s);
        } catch (const UsageError&) {
            continue;
        }
        ++used;
        const auto original = recs;
        auto first = standardize::apply_plan(recs, s, plan);
        const auto once = recs;
        auto second = standardize::apply_plan(recs, s, plan);
        c.expect(recs == once && second.changes.empty(), "trial " + std::to_string(trial) + " not idempotent");
        auto before = quality::column_inconsistency(original, "col");
        auto after = quality::column_inconsistency(once, "col");
        if (before) c.expect(after && *after <= *before, "trial " + std::to_string(trial) + " inconsistency rose");
        std::size_t mutated = 0;
        for (std::size_t i = 0; i < recs.size(); ++i) mutated += !(original[i].cells.at("col") == once[i].cells.at("col"));
        c.expect(first.changes.size() == mutated, "change log misses mutated cells");
        for (const auto& ch : first.changes) {
            const auto i = std::stoul(ch.doc_id.substr(1));
            c.expect(ch.old_value == original[i].cells.at("col") && ch.new_value == once[i].cells.at("col"),
                     "change log entry disagrees with the table");
        }
    }
    c.expect(used >= 100, "only " + std::to_string(used) + " valid random plans");

    // Fixture: three spellings merge to the abbreviation.
    TableSchema crop{{{"crop", "String: crop", DeclaredKind::string}}, "q"};
    std::vector<DataRecord> recs;
    for (auto v : {"OFSP", "Orange Sweet Potato", "Orange-fleshed Sweet Potato"}) {
        auto r = empty_record(crop, "p" + std::to_string(recs.size()), 0);
        r.cells["crop"] = CellValue::of(v);
        recs.push_back(r);
    }
    StandardizationPlan ofsp{"crop", {{"OFSP", {"OFSP", "Orange Sweet Potato", "Orange-fleshed Sweet Potato"}, "OFSP", {}, ""}}};
    auto res = standardize::apply_plan(recs, crop, ofsp);
    for (const auto& r : recs) c.expect(r.cells.at("crop").text() == "OFSP", "fixture cell not OFSP");
    c.expect(res.inconsistency_before == 1.0 && res.inconsistency_after == 1.0 / 3.0, "fixture inconsistency 1 -> 1/3");
    return finish(c, std::to_string(used) + " random plans; fixture merges all three variants to OFSP");
}

// --- 6 ---------------------------------------------------------------------

store::Clock counter_clock() {
    auto n = std::make_shared<int>(0);
    return [n] { return "t" + std::to_string((*n)++); };
}

TableSchema schema_of(const std::vector<std::string>& names) {
    TableSchema s;
    for (const auto& n : names) s.columns.push_back({n, "String: " + n, DeclaredKind::string});
    return s;
}

DataRecord row(const TableSchema& s, const std::string& doc, int ordinal, const std::vector<std::string>& values) {
    auto r = empty_record(s, doc, ordinal);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!values[i].empty()) r.cells[s.columns[i].name] = CellValue::of(values[i]);
    return r;
}

std::map<std::tuple<std::string, int, std::string>, std::string> content(const store::Database& db) {
    std::map<std::tuple<std::string, int, std::string>, std::string> out;
    for (const auto& [key, r] : db.rows())
        for (const auto& [col, v] : r.cells) out[{key.first, key.second, col}] = v.text_or_blank();
    return out;
}

Outcome merge_algebra() {
    Check c;
    std::mt19937_64 rng(6006);
    const std::vector<std::string> pool{"model", "task", "accuracy", "hardware", "year"};
    auto random_table = [&](const std::vector<std::string>& docs) {
        std::vector<std::string> cols;
        for (const auto& p : pool)
            if (rng() % 2 || cols.empty()) cols.push_back(p);
        auto s = schema_of(cols);
        std::vector<DataRecord> recs;
        for (const auto& d : docs)
            for (int o = 0, n = 1 + static_cast<int>(rng() % 2); o < n; ++o) {
                std::vector<std::string> vals;
                for (std::size_t i = 0; i < cols.size(); ++i) vals.push_back(rng() % 4 ? "v" + std::to_string(rng() % 3) : "");
                recs.push_back(row(s, d, o, vals));
            }
        return std::make_pair(s, recs);
    };
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> d1, d2;
        for (int i = 0; i < 8; ++i) {
            if (rng() % 2) d1.push_back("doc" + std::to_string(i));
            if (rng() % 2) d2.push_back("doc" + std::to_string(i));
        }
        auto [s1, t1] = random_table(d1);
        auto [s2, t2] = random_table(d2);
        store::Database db(counter_clock());
        db.merge(s1, t1);
        db.merge(s2, t2);
        std::set<store::Database::Key> keys;
        for (const auto* t : {&t1, &t2})
            for (const auto& r : *t) keys.insert({r.doc_id, r.ordinal});
        c.expect(db.rows().size() == keys.size(), "cardinality differs from the key union");
        const auto once = db;
        db.merge(s2, t2);
        c.expect(db == once, "second identical merge changed the database");

        std::vector<std::string> disjoint;
        for (const auto& d : d2)
            if (std::find(d1.begin(), d1.end(), d) == d1.end()) disjoint.push_back(d);
        auto [s3, t3] = random_table(disjoint);
        store::Database x, y;
        x.merge(s1, t1);
        x.merge(s3, t3);
        y.merge(s3, t3);
        y.merge(s1, t1);
        c.expect(content(x) == content(y), "disjoint merges do not commute");
    }

    auto s = schema_of({"crop", "retention"});
    store::Database db(counter_clock());
    db.merge(s, {row(s, "d1", 0, {"OFSP", "45"}), row(s, "d2", 0, {"OFSP", "60"}), row(s, "d3", 0, {"Yam", ""})});
    db.merge(s, {row(s, "d1", 0, {"OFSP", "47"}), row(s, "d2", 0, {"", "61"}), row(s, "d3", 0, {"Cassava", "12"})});
    const std::map<std::tuple<std::string, int, std::string>, std::string> expected{
        {{"d1", 0, "crop"}, "OFSP"},    {{"d1", 0, "retention"}, "47"}, {{"d2", 0, "crop"}, "OFSP"},
        {{"d2", 0, "retention"}, "61"}, {{"d3", 0, "crop"}, "Cassava"}, {{"d3", 0, "retention"}, "12"}};
    c.expect(content(db) == expected, "3-doc fixture differs from the expected table");
    std::set<std::string> logged_old;
    for (const auto& e : db.change_log())
        if (e.note.find("conflict") != std::string::npos) logged_old.insert(e.old_value.text_or_blank());
    c.expect(logged_old == std::set<std::string>{"45", "60", "Yam"}, "overwritten values not logged");
    return finish(c, "200 random pairs; 3-doc fixture matches the expected table");
}

// --- 7 ---------------------------------------------------------------------

Outcome csv_round_trip() {
    Check c;
    std::mt19937_64 rng(7007);
    const std::vector<std::string> tokens{"a", "Z", " ", ",", "\"", "\n", "\r\n", "µ", "ü", "日本", "🙂", "'", ";"};
    std::size_t special = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ncols = 1 + rng() % 6;
        std::vector<std::string> names;
        for (std::size_t j = 0; j < ncols; ++j) names.push_back("col_" + std::to_string(j));
        auto s = schema_of(names);
        std::vector<DataRecord> recs;
        for (int r = 0, n = 1 + static_cast<int>(rng() % 30); r < n; ++r) {
            std::vector<std::string> vals;
            for (std::size_t j = 0; j < ncols; ++j) {
                std::string v;
                for (auto len = rng() % 8; len > 0; --len) v += tokens[rng() % tokens.size()];
                special += v.find_first_of(",\"\n") != std::string::npos;
                vals.push_back(v);
            }
            recs.push_back(row(s, "doc " + std::to_string(r % 9) + (r % 2 ? ",x" : ""), r / 9, vals));
        }
        store::Database db;
        db.merge(s, recs);
        const auto first = db.export_csv();
        const auto second = store::Database::import_csv(first).export_csv();
        c.expect(first == second, "trial " + std::to_string(trial) + ": export -> parse -> export differs");
    }
    c.expect(special > 100, "too few cells needing quotes");
    return finish(c, "100 random databases, " + std::to_string(special) + " cells needing quotes");
}

// --- 8 ---------------------------------------------------------------------

Outcome end_to_end() {
    Check c;
    testing::TempDir dir;
    auto opts = [&](const std::string& name) {
        batch::BatchOptions o;
        o.bundles = testing::fixtures() / "lm" / "bundles";
        o.question = testing::kLmQuestion;
        o.out = dir / name;
        return o;
    };
    std::string first_csv, first_report;
    {
        auto env = testing::lm_env(dir / "cache");
        auto out = batch::batch_extract(*env, opts("cold.csv"));
        first_csv = testing::read_text(dir / "cold.csv");
        first_report = testing::read_text(dir / "cold.quality.json");
        c.expect(out.result.schema.columns.size() == 5, "schema is not the five-column box");
        c.expect(out.result.degraded_documents.empty(), "degraded documents in the fixture run");

        // Grounding: rebuild the corpus to look up the cited chunks.
        auto env2 = testing::lm_env();
        auto corpus = pipeline::build_corpus(*env2, ingest::load_bundle_dir(opts("").bundles));
        std::size_t cells = 0;
        for (const auto& r : out.result.records)
            for (const auto& [col, cell] : r.cells) {
                if (cell.is_empty()) continue;
                ++cells;
                auto it = r.provenance.find(col);
                bool grounded = false;
                if (it != r.provenance.end())
                    for (const auto& span : it->second) {
                        const auto* chunk = corpus.chunk(span.chunk_id);
                        const bool cited = std::find(r.context_chunk_ids.begin(), r.context_chunk_ids.end(),
                                                     span.chunk_id) != r.context_chunk_ids.end();
                        grounded = grounded ||
                                   (chunk && cited && span.char_end <= chunk->raw_content.size() &&
                                    chunk->raw_content.substr(span.char_start, span.char_end - span.char_start) ==
                                        span.matched_text &&
                                    text::fold_collapse(span.matched_text) == text::fold_collapse(cell.text()));
                    }
                c.expect(grounded, r.doc_id + ":" + std::to_string(r.ordinal) + " " + col + " has no verified span");
            }
        c.expect(cells > 0, "no non-Empty cells");
    }
    double warm = 0;
    std::size_t warm_calls = 0;
    for (int run = 0; run < 3; ++run) {
        const auto t0 = Clock::now();
        auto env = testing::lm_env(dir / "cache");
        auto name = "warm" + std::to_string(run) + ".csv";
        batch::batch_extract(*env, opts(name));
        warm = std::max(warm, seconds_since(t0));
        warm_calls += env->stats().provider_calls;
        c.expect(testing::read_text(dir / name) == first_csv, "CSV differs across runs");
        c.expect(testing::read_text(dir / ("warm" + std::to_string(run) + ".quality.json")) == first_report,
                 "quality report differs across runs");
    }
    // A fresh cache must give the same bytes too.
    {
        testing::TempDir other;
        auto env = testing::lm_env(other / "cache");
        auto o = opts("fresh.csv");
        batch::batch_extract(*env, o);
        c.expect(testing::read_text(dir / "fresh.csv") == first_csv, "cold rerun differs");
    }
    c.expect(warm < 10.0, "warm run took " + fmt(warm) + " s");
    c.expect(warm_calls == 0, "warm runs made provider calls");
    return finish(c, "every non-Empty cell grounded, byte-identical, warm run " + fmt(warm) + " s");
}

// --- 9 ---------------------------------------------------------------------

Outcome schema_contract() {
    Check c;
    {
        auto env = testing::lm_env();
        auto s = extract::infer_schema(*env, testing::kLmQuestion);
        c.expect(s.names() == std::vector<std::string>{"language_model_name", "tasks_supported", "accuracy_metric",
                                                       "accuracy_value", "accuracy_source"},
                 "column names differ from the box");
        for (const auto& col : s.columns)
            c.expect(!col.name.empty() && col.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_") ==
                                              std::string::npos,
                     col.name + " is not snake_case");
        c.expect(env->stats().repairs == 0, "box schema needed a repair");
    }
    {
        MockScript script;
        script.rules.push_back(rule(tid::data_structure_design,
                                    {R"({"model":{"name":"String: n"},"accuracy":"Float: a"})",
                                     R"({"model_name":"String: n","accuracy":"Float: a"})"}));
        auto env = mock_env(script);
        auto s = extract::infer_schema(*env, "q");
        c.expect(s.columns.size() == 2, "repaired schema has the wrong arity");
        c.expect(env->stats().repairs == 1, "nested response repaired " + std::to_string(env->stats().repairs) + " times");
        c.expect(env.mock->calls_for(std::string(tid::structured_repair)) == 1, "repair template not called once");
    }
    return finish(c, "five snake_case box columns; nested response repaired exactly once");
}

// --- 10 --------------------------------------------------------------------

Outcome scorer_sanity() {
    Check c;
    c.expect(eval::score_value("OFSP", "OFSP") == 2, "exact match");
    c.expect(eval::score_value("sweet potato", "orange-fleshed sweet potato") == 1, "containment");
    c.expect(eval::score_value("Empty", "OFSP") == 0 && eval::score_value("", "OFSP") == 0, "Empty vs value");
    std::mt19937_64 rng(1010);
    const std::vector<std::string> words{"OFSP", "sweet potato", "", "Empty", "µg/g, raw", "a \"b\"", "x\ny"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string csv = "doc_id,ordinal,a,b\n";
        for (int r = 0, n = 1 + static_cast<int>(rng() % 10); r < n; ++r) {
            std::vector<std::string> line{"d" + std::to_string(r), "0", words[rng() % words.size()],
                                          words[rng() % words.size()]};
            for (std::size_t i = 0; i < line.size(); ++i) {
                auto v = line[i];
                if (v.find_first_of(",\"\n") != std::string::npos) {
                    std::string q = "\"";
                    for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                    v = q + "\"";
                }
                csv += (i ? "," : "") + v;
            }
            csv += "\n";
        }
        auto rep = eval::score_tables(csv, csv);
        bool all_two = rep.grand_total == rep.max_total();
        for (const auto& e : rep.entries) all_two = all_two && e.score == 2;
        c.expect(all_two, "score(x, x) is not all 2s");
    }
    return finish(c, "worked examples hold; score(x, x) all 2s on 50 tables");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"retrieval oracle", retrieval_oracle},
        {"projection oracle", projection_oracle},
        {"cluster recovery", cluster_recovery},
        {"metric exactness", metric_exactness},
        {"standardization algebra", standardization_algebra},
        {"merge algebra", merge_algebra},
        {"csv round-trip", csv_round_trip},
        {"end-to-end mock pipeline", end_to_end},
        {"schema inference contract", schema_contract},
        {"scorer sanity", scorer_sanity},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.summary << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed;
}
