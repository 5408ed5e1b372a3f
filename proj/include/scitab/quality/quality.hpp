#pragma once

#include "scitab/gateway/embedding.hpp"
#include "scitab/gateway/gateway.hpp"
#include "scitab/record.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scitab::quality {

inline constexpr int kReconstructedQuestions = 3;

struct Thresholds {
    double answer_relevancy = 0.5;
    double context_relevancy = 0.5;
    double faithfulness = 0.5;

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

// Mean cosine between the question vector and each reconstructed question
// vector, clamped to [0,1]. Throws UsageError when `generated` is empty.
double mean_cosine_clamped(const gateway::EmbeddingVector& question,
                           const std::vector<gateway::EmbeddingVector>& generated);

// Reconstructs `m` questions from the answer and compares them with the
// original question. nullopt when the gateway fails.
std::optional<double> answer_relevancy(gateway::Gateway& gw, const std::string& question, const std::string& answer,
                                       int m = kReconstructedQuestions);

// Fraction of context sentences the judge marks relevant. nullopt on judge
// failure. Throws UsageError when there are no contexts.
std::optional<double> context_relevancy(gateway::Gateway& gw, const std::string& question,
                                        const std::vector<std::string>& contexts);

// Fraction of decomposed claims the judge finds supported. nullopt when the
// answer yields no claims or the judge fails. Throws UsageError on empty answer.
std::optional<double> faithfulness(gateway::Gateway& gw, const std::string& answer,
                                   const std::vector<std::string>& contexts);

// Every sentence of the contexts, in order, as sent to the relevance judge.
std::vector<std::string> context_sentences(const std::vector<std::string>& contexts);

// The three judge scores for one record. Degraded records and all-Empty
// answers get no faithfulness; records without contexts get no scores.
QualityScores score_record(gateway::Gateway& gw, const std::string& question, const TableSchema& schema,
                           const DataRecord& record, const std::vector<std::string>& contexts);

// Empty cells over all schema cells. Throws UsageError when there are none.
double missingness(const std::vector<DataRecord>& records, const TableSchema& schema);

// Distinct over total after trim + case fold; nullopt for no values.
std::optional<double> inconsistency(const std::vector<std::string>& values);
std::optional<double> column_inconsistency(const std::vector<DataRecord>& records, const std::string& column);

// Flags implied by the record's cells and scores, ignoring acknowledgments.
std::set<Flag> raw_flags(const DataRecord& record, const Thresholds& thresholds);

// Recomputes visible flags: raw flags minus acknowledged ones. An
// acknowledgment lapses when the scores differ from those it was given at.
void flag_record(DataRecord& record, const Thresholds& thresholds);
void flag_records(std::vector<DataRecord>& records, const Thresholds& thresholds);

struct TableQuality {
    std::optional<double> missingness;  // absent for a table without cells
    std::map<std::string, std::optional<double>> inconsistency;
    Thresholds thresholds;

    friend bool operator==(const TableQuality&, const TableQuality&) = default;
};

TableQuality table_quality(const std::vector<DataRecord>& records, const TableSchema& schema,
                           const Thresholds& thresholds);

// Per-record scores and flags, per-column inconsistency, missingness, thresholds.
nlohmann::ordered_json quality_report(const TableSchema& schema, const std::vector<DataRecord>& records,
                              const TableQuality& quality);

nlohmann::ordered_json to_json(const QualityScores& scores);
QualityScores scores_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const Thresholds& t);
Thresholds thresholds_from_json(const nlohmann::ordered_json& j);

}  // namespace scitab::quality
