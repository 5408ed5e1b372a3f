#pragma once

#include "scitab/gateway/embedding.hpp"
#include "scitab/gateway/gateway.hpp"
#include "scitab/ingest/document.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scitab::index {

enum class ChunkKind { text, table, figure };

std::string_view to_string(ChunkKind kind) noexcept;
ChunkKind chunk_kind_from_string(std::string_view s);

inline constexpr std::size_t kMaxSummaryChars = 600;

struct ContentChunk {
    std::string chunk_id;  // "<doc_id>:<kind>:<n>", n counting from 1 per kind
    std::string doc_id;
    ChunkKind kind = ChunkKind::text;
    std::string source_id;  // snippet, table or figure id inside the bundle
    std::string raw_content;
    std::string summary;
    bool summary_degraded = false;
    std::optional<gateway::EmbeddingVector> vector;
};

// Text snippets, structured tables (caption + CSV), unparsed tables (as text)
// and figures (caption + insight) of one bundle, in that order.
std::vector<ContentChunk> chunks_from_bundle(const ingest::DocumentBundle& bundle);

struct ChunkSummary {
    std::string text;
    bool degraded = false;
};

// Short model summary used as the retrieval key. At most 600 characters;
// falls back to the leading 600 characters of the raw content on gateway
// failure. Throws UsageError on empty content.
ChunkSummary summarize_chunk(gateway::Gateway& gw, std::string_view raw_content, ChunkKind kind);

// Summarizes every chunk that has no summary yet, up to `workers` at a time.
void summarize_chunks(gateway::Gateway& gw, std::vector<ContentChunk>& chunks, int workers);

}  // namespace scitab::index
