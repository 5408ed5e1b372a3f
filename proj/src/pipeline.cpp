#include "scitab/pipeline.hpp"

#include "scitab/csv.hpp"
#include "scitab/error.hpp"
#include "scitab/extract/extraction.hpp"
#include "scitab/ingest/bundle_io.hpp"
#include "scitab/ingest/processors.hpp"
#include "scitab/parallel.hpp"
#include "scitab/record_json.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <set>

namespace scitab::pipeline {

using json = nlohmann::ordered_json;

const index::ContentChunk* Corpus::chunk(const std::string& chunk_id) const {
    for (const auto& c : chunks)
        if (c.chunk_id == chunk_id) return &c;
    return nullptr;
}

const ingest::DocumentBundle* Corpus::bundle(const std::string& doc_id) const {
    for (const auto& b : bundles)
        if (b.doc_id == doc_id) return &b;
    return nullptr;
}

std::vector<std::string> Corpus::doc_ids() const {
    std::vector<std::string> ids;
    for (const auto& b : bundles) ids.push_back(b.doc_id);
    return ids;
}

namespace {

int resolve_workers(gateway::Gateway& gw, int workers) { return workers > 0 ? workers : gw.budget().limit(); }

}  // namespace

void extend_corpus(gateway::Gateway& gw, Corpus& corpus, std::vector<ingest::DocumentBundle> bundles,
                   const CorpusOptions& options) {
    auto all = corpus.bundles;
    all.insert(all.end(), bundles.begin(), bundles.end());
    ingest::check_unique_doc_ids(all);

    const int workers = resolve_workers(gw, options.workers);
    if (options.complete_bundles) {
        ingest::IngestOptions io;
        io.workers = workers;
        ingest::Ingestor(gw, io).complete_all(bundles);
    }
    auto chunks = corpus.chunks;
    for (const auto& b : bundles) {
        auto more = index::chunks_from_bundle(b);
        chunks.insert(chunks.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    index::summarize_chunks(gw, chunks, workers);
    auto idx = index::build_index(gw, chunks, corpus.collection_id);

    corpus.bundles.insert(corpus.bundles.end(), std::make_move_iterator(bundles.begin()),
                          std::make_move_iterator(bundles.end()));
    corpus.chunks = std::move(chunks);
    corpus.index = std::move(idx);
}

Corpus build_corpus(gateway::Gateway& gw, std::vector<ingest::DocumentBundle> bundles, std::string collection_id,
                    const CorpusOptions& options) {
    Corpus corpus;
    corpus.collection_id = collection_id;
    corpus.index = index::VectorIndex(std::move(collection_id));
    extend_corpus(gw, corpus, std::move(bundles), options);
    return corpus;
}

void validate_request(const QueryRequest& request, const Corpus& corpus) {
    if (text::trim(request.question).empty() && !request.attributes)
        throw UsageError("a query needs a question or an attribute list");
    if (request.k <= 0) throw UsageError("k must be positive");
    for (const auto& d : request.doc_ids)
        if (!corpus.bundle(d)) throw UsageError("unknown document '" + d + "'");
}

QueryResult run_query(gateway::Gateway& gw, const Corpus& corpus, const QueryRequest& request) {
    validate_request(request, corpus);

    QueryResult result;
    if (request.attributes) {
        result.schema = extract::schema_from_attributes(*request.attributes, text::trim(request.question));
        result.question = result.schema.source_question;
    } else {
        result.question = text::trim(request.question);
        result.schema = extract::infer_schema(gw, result.question);
    }

    std::vector<std::string> docs = request.doc_ids.empty() ? corpus.doc_ids() : request.doc_ids;
    struct PerDoc {
        std::vector<DataRecord> records;
        bool degraded = false;
    };
    std::vector<PerDoc> per_doc(docs.size());
    const int workers = resolve_workers(gw, request.workers);

    parallel_for(docs.size(), workers, [&](std::size_t i) {
        const auto& doc_id = docs[i];
        std::vector<const index::ContentChunk*> contexts;
        if (!corpus.index.empty()) {
            for (const auto& hit : index::retrieve(gw, corpus.index, result.question, request.k,
                                                   {doc_id, std::nullopt}, request.min_table_hits))
                contexts.push_back(corpus.chunk(hit.chunk_id));
        }
        auto extracted = extract::extract_records(gw, result.question, result.schema, doc_id, contexts);
        std::vector<std::string> context_text;
        for (const auto* c : contexts) context_text.push_back(c->raw_content);
        for (auto& r : extracted.records) {
            extract::locate_spans(r, contexts);
            if (request.score) r.quality = quality::score_record(gw, result.question, result.schema, r, context_text);
        }
        per_doc[i] = {std::move(extracted.records), extracted.degraded};
    });

    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (per_doc[i].degraded) result.degraded_documents.push_back(docs[i]);
        for (auto& r : per_doc[i].records) result.records.push_back(std::move(r));
    }
    quality::flag_records(result.records, request.thresholds);
    result.quality = quality::table_quality(result.records, result.schema, request.thresholds);
    result.summary = extract::summarize_answer(gw, result.question, result.schema, result.records);
    return result;
}

std::string table_csv(const TableSchema& schema, const std::vector<DataRecord>& records) {
    std::vector<csv::Row> rows;
    csv::Row header{"doc_id", "ordinal"};
    for (const auto& c : schema.columns) header.push_back(c.name);
    rows.push_back(std::move(header));
    for (const auto& r : records) {
        csv::Row line{r.doc_id, std::to_string(r.ordinal)};
        for (const auto& c : schema.columns) line.push_back(r.cells.at(c.name).text_or_blank());
        rows.push_back(std::move(line));
    }
    return csv::write(rows);
}

json result_report(const QueryResult& result) {
    json records = json::array();
    for (const auto& r : result.records) records.push_back(to_json(r, result.schema));
    return {{"question", result.question},
            {"schema", to_json(result.schema)},
            {"summary", result.summary},
            {"degraded_documents", result.degraded_documents},
            {"quality", quality::quality_report(result.schema, result.records, result.quality)},
            {"records", records}};
}

}  // namespace scitab::pipeline
