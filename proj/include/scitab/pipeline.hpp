#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/index/chunk.hpp"
#include "scitab/index/vector_index.hpp"
#include "scitab/ingest/document.hpp"
#include "scitab/quality/quality.hpp"
#include "scitab/record.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

// End-to-end orchestration shared by the HTTP service and the batch CLI.
namespace scitab::pipeline {

inline constexpr int kMinTableHits = 2;

// Ingested documents with their chunks and the vector index over them.
struct Corpus {
    std::string collection_id = "default";
    std::vector<ingest::DocumentBundle> bundles;
    std::vector<index::ContentChunk> chunks;
    index::VectorIndex index;

    const index::ContentChunk* chunk(const std::string& chunk_id) const;
    const ingest::DocumentBundle* bundle(const std::string& doc_id) const;
    std::vector<std::string> doc_ids() const;
};

struct CorpusOptions {
    int workers = 0;  // 0: the gateway budget
    bool complete_bundles = true;
};

// Completes the bundles (metadata, tables, figures), chunks, summarizes and
// indexes them. Throws ConflictError when a doc_id repeats.
Corpus build_corpus(gateway::Gateway& gw, std::vector<ingest::DocumentBundle> bundles,
                    std::string collection_id = "default", const CorpusOptions& options = {});

// Adds more documents and rebuilds the index. Existing summaries are kept.
void extend_corpus(gateway::Gateway& gw, Corpus& corpus, std::vector<ingest::DocumentBundle> bundles,
                   const CorpusOptions& options = {});

// Either a question (schema inferred) or an attribute list (schema given).
struct QueryRequest {
    std::string question;
    std::optional<nlohmann::ordered_json> attributes;
    std::vector<std::string> doc_ids;  // empty: every document
    int k = index::kDefaultTopK;
    int min_table_hits = kMinTableHits;
    bool score = true;
    quality::Thresholds thresholds;
    int workers = 0;
};

// Throws UsageError when neither a question nor attributes are present, or
// when a doc_id is not in the corpus.
void validate_request(const QueryRequest& request, const Corpus& corpus);

struct QueryResult {
    std::string question;
    TableSchema schema;
    std::vector<DataRecord> records;  // documents in corpus order, ordinals per document
    quality::TableQuality quality;
    std::string summary;
    std::vector<std::string> degraded_documents;
};

// Schema, then one retrieval and extraction per document run in parallel,
// then provenance, judge scores, flags and the table summary. Throws
// SchemaError when the schema cannot be inferred.
QueryResult run_query(gateway::Gateway& gw, const Corpus& corpus, const QueryRequest& request);

// doc_id, ordinal, then schema columns; Empty as an empty field.
std::string table_csv(const TableSchema& schema, const std::vector<DataRecord>& records);

// Quality report plus summary and degraded documents; contains no timestamps.
nlohmann::ordered_json result_report(const QueryResult& result);

}  // namespace scitab::pipeline
