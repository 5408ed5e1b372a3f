#include "support.hpp"

#include "scitab/error.hpp"
#include "scitab/quality/quality.hpp"
#include "scitab/text.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace scitab;
using namespace scitab::quality;
using gateway::EmbeddingVector;
using gateway::json;
using gateway::MockScript;
using scitab::testing::mock_env;
using scitab::testing::rule;
namespace tid = gateway::template_id;

namespace {

TableSchema schema_n(int n) {
    TableSchema s;
    s.source_question = "q";
    for (int i = 0; i < n; ++i) s.columns.push_back({"c" + std::to_string(i), "String: c", DeclaredKind::string});
    return s;
}

DataRecord record_with(const TableSchema& s, std::vector<std::string> values) {
    auto r = empty_record(s, "d", 0);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!values[i].empty()) r.cells[s.columns[i].name] = CellValue::of(values[i]);
    return r;
}

std::vector<double> at_cosine(double c) { return {c, std::sqrt(1 - c * c)}; }

}  // namespace

TEST(AnswerRelevancy, MeanCosineOracle) {
    auto q = EmbeddingVector::normalized({1, 0});
    std::vector<EmbeddingVector> g{EmbeddingVector::normalized(at_cosine(0.9)),
                                   EmbeddingVector::normalized(at_cosine(0.8)),
                                   EmbeddingVector::normalized(at_cosine(0.7))};
    EXPECT_NEAR(mean_cosine_clamped(q, g), (0.9 + 0.8 + 0.7) / 3, 1e-12);
    EXPECT_NEAR(mean_cosine_clamped(q, {q, q, q}), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(mean_cosine_clamped(q, {EmbeddingVector::normalized({0, 1})}), 0.0);
    EXPECT_DOUBLE_EQ(mean_cosine_clamped(q, {EmbeddingVector::normalized({-1, 0})}), 0.0);
    EXPECT_THROW(mean_cosine_clamped(q, {}), UsageError);
}

TEST(AnswerRelevancy, ThroughGatewayWithScriptedVectors) {
    MockScript script;
    script.embedding_dim = 2;
    script.vectors["original?"] = {1, 0};
    script.vectors["r1?"] = at_cosine(0.9);
    script.vectors["r2?"] = at_cosine(0.8);
    script.vectors["r3?"] = at_cosine(0.7);
    script.rules.push_back(rule(tid::question_generation, {R"({"questions":["r1?","r2?","r3?"]})"}));
    auto env = mock_env(script);
    auto score = answer_relevancy(*env, "original?", "model: X", 3);
    ASSERT_TRUE(score);
    EXPECT_NEAR(*score, 0.8, 1e-9);

    MockScript orth;
    orth.embedding_dim = 2;
    orth.vectors["original?"] = {1, 0};
    orth.vectors["other?"] = {0, 1};
    orth.rules.push_back(rule(tid::question_generation, {R"({"questions":["other?"]})"}));
    auto env2 = mock_env(orth);
    EXPECT_NEAR(*answer_relevancy(*env2, "original?", "model: X", 1), 0.0, 1e-12);

    auto down = mock_env();
    down.mock->set_all_down(true);
    EXPECT_FALSE(answer_relevancy(*down, "q", "a"));
}

TEST(ContextRelevancy, RatioOfJudgedSentences) {
    std::vector<std::string> ctx{"One. Two. Three. Four.", "Five. Six. Seven. Eight."};
    ASSERT_EQ(context_sentences(ctx).size(), 8u);
    auto judged = [&](const std::string& verdicts) {
        MockScript script;
        script.rules.push_back(rule(tid::context_relevance, {verdicts}));
        auto env = mock_env(script);
        return context_relevancy(*env, "q", ctx);
    };
    EXPECT_NEAR(*judged(R"({"verdicts":[1,0,1,0,1,0,1,0]})"), 4.0 / 8.0, 1e-12);
    EXPECT_DOUBLE_EQ(*judged(R"({"verdicts":[0,0,0,0,0,0,0,0]})"), 0.0);
    EXPECT_DOUBLE_EQ(*judged(R"({"verdicts":[1,1,1,1,1,1,1,1]})"), 1.0);
    // Wrong verdict count twice: judge failure, absent score.
    EXPECT_FALSE(judged(R"({"verdicts":[1]})"));
    auto env = mock_env();
    EXPECT_THROW(context_relevancy(*env, "q", {}), UsageError);
}

TEST(Faithfulness, RatioOfSupportedClaims) {
    auto run = [](const std::string& verdicts) {
        MockScript script;
        script.rules.push_back(rule(tid::claim_decomposition, {R"({"claims":["a","b","c"]})"}));
        script.rules.push_back(rule(tid::claim_verification, {verdicts}));
        auto env = mock_env(script);
        return faithfulness(*env, "model: X", {"context"});
    };
    EXPECT_DOUBLE_EQ(*run(R"({"verdicts":[1,1,1]})"), 1.0);
    EXPECT_NEAR(*run(R"({"verdicts":[0,1,0]})"), 1.0 / 3.0, 1e-12);

    MockScript none;
    none.rules.push_back(rule(tid::claim_decomposition, {R"({"claims":[]})"}));
    auto env = mock_env(none);
    EXPECT_FALSE(faithfulness(*env, "model: Empty", {"context"}));
    EXPECT_THROW(faithfulness(*env, "", {"context"}), UsageError);
}

TEST(ScoreRecord, AllEmptyHasNoFaithfulness) {
    auto env = mock_env();
    auto s = schema_n(2);
    auto r = empty_record(s, "d", 0);
    auto q = score_record(*env, "what is c0?", s, r, {"c0 is described here."});
    EXPECT_FALSE(q.faithfulness);
    auto none = score_record(*env, "q", s, record_with(s, {"x", "y"}), {});
    EXPECT_FALSE(none.answer_relevancy || none.context_relevancy || none.faithfulness);
    auto full = score_record(*env, "what is c0?", s, record_with(s, {"alpha", "beta"}), {"alpha and beta."});
    for (auto v : {full.answer_relevancy, full.context_relevancy, full.faithfulness})
        if (v) {
            EXPECT_TRUE(*v >= 0.0 && *v <= 1.0);
        }
}

TEST(Missingness, ExamplesAndRecount) {
    auto s = schema_n(4);
    std::vector<DataRecord> full(3, record_with(s, {"a", "b", "c", "d"}));
    EXPECT_DOUBLE_EQ(missingness(full, s), 0.0);
    std::vector<DataRecord> none(3, record_with(s, {}));
    EXPECT_DOUBLE_EQ(missingness(none, s), 1.0);
    std::vector<DataRecord> some{record_with(s, {"a", "", "c", "d"}), record_with(s, {"", "b", "c", "d"}),
                                 record_with(s, {"a", "b", "", "d"})};
    EXPECT_DOUBLE_EQ(missingness(some, s), 0.25);
    EXPECT_THROW(missingness({}, s), UsageError);

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        auto sc = schema_n(1 + static_cast<int>(rng() % 8));
        std::vector<DataRecord> recs;
        std::size_t empty = 0, total = 0;
        for (auto n = 1 + rng() % 50; n > 0; --n) {
            std::vector<std::string> vals;
            for (std::size_t c = 0; c < sc.columns.size(); ++c) {
                bool e = rng() % 3 == 0;
                vals.push_back(e ? "" : "v");
                empty += e;
                ++total;
            }
            recs.push_back(record_with(sc, vals));
        }
        EXPECT_DOUBLE_EQ(missingness(recs, sc), static_cast<double>(empty) / static_cast<double>(total));
    }
}

TEST(Inconsistency, ExamplesAndBounds) {
    EXPECT_NEAR(*inconsistency({"OFSP", "OFSP", "OFSP"}), 1.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(*inconsistency({"a", "b", "c"}), 1.0);
    EXPECT_DOUBLE_EQ(*inconsistency({"µg/g", "mg/100g", "µg/g", "mg/100g"}), 0.5);
    EXPECT_DOUBLE_EQ(*inconsistency({" OFSP", "ofsp "}), 0.5);
    EXPECT_DOUBLE_EQ(*inconsistency({"OFSP", "Orange-fleshed Sweet Potato"}), 1.0);
    EXPECT_FALSE(inconsistency({}));

    auto s = schema_n(1);
    std::vector<DataRecord> recs{record_with(s, {""}), record_with(s, {""})};
    EXPECT_FALSE(column_inconsistency(recs, "c0"));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> vals;
        for (auto n = 1 + rng() % 30; n > 0; --n) vals.push_back("v" + std::to_string(rng() % 6));
        auto v = *inconsistency(vals);
        std::set<std::string> distinct(vals.begin(), vals.end());
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_DOUBLE_EQ(v, static_cast<double>(distinct.size()) / static_cast<double>(vals.size()));
        // Merging two variants never raises the score.
        auto merged = vals;
        for (auto& x : merged)
            if (x == "v1") x = "v0";
        EXPECT_LE(*inconsistency(merged), v);
    }
}

TEST(Flags, ThresholdAndEmptyRules) {
    Thresholds t;
    auto s = schema_n(2);
    auto good = record_with(s, {"a", "b"});
    good.quality = {0.95, 0.95, 0.95};
    EXPECT_TRUE(raw_flags(good, t).empty());

    auto low = good;
    low.quality.context_relevancy = 0.2;
    EXPECT_EQ(raw_flags(low, t), (std::set<Flag>{Flag::low_relevance}));

    auto gap = record_with(s, {"a", ""});
    gap.quality = good.quality;
    EXPECT_EQ(raw_flags(gap, t), (std::set<Flag>{Flag::empty_cells}));

    // Absent scores never raise low_relevance.
    auto unscored = record_with(s, {"a", "b"});
    EXPECT_TRUE(raw_flags(unscored, t).empty());
    EXPECT_EQ(raw_flags(low, t), raw_flags(low, t));
}

TEST(Flags, AcknowledgmentLapsesOnScoreChange) {
    Thresholds t;
    auto s = schema_n(1);
    auto r = record_with(s, {"a"});
    r.quality = {0.9, 0.2, 0.9};
    flag_record(r, t);
    EXPECT_TRUE(r.flags.count(Flag::low_relevance));
    r.acknowledged = {Flag::low_relevance};
    r.acknowledged_scores = r.quality;
    flag_record(r, t);
    EXPECT_TRUE(r.flags.empty());
    r.quality.context_relevancy = 0.1;
    flag_record(r, t);
    EXPECT_TRUE(r.flags.count(Flag::low_relevance));
}

TEST(Report, JsonHasScoresFlagsAndTable) {
    auto s = schema_n(2);
    std::vector<DataRecord> recs{record_with(s, {"a", ""})};
    recs[0].quality.context_relevancy = 0.25;
    flag_records(recs, {});
    auto tq = table_quality(recs, s, {});
    EXPECT_DOUBLE_EQ(*tq.missingness, 0.5);
    auto j = quality_report(s, recs, tq);
    EXPECT_DOUBLE_EQ(j["missingness"].get<double>(), 0.5);
    EXPECT_EQ(scores_from_json(to_json(recs[0].quality)), recs[0].quality);
    EXPECT_EQ(thresholds_from_json(to_json(Thresholds{0.1, 0.2, 0.3})), (Thresholds{0.1, 0.2, 0.3}));
}
