#pragma once

#include "scitab/gateway/embedding.hpp"
#include "scitab/gateway/gateway.hpp"
#include "scitab/index/chunk.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scitab::index {

inline constexpr int kDefaultTopK = 8;
inline constexpr int kIndexFormatVersion = 1;

struct RetrievalFilter {
    std::optional<std::string> doc_id;
    std::optional<ChunkKind> kind;
};

struct RetrievalHit {
    std::string chunk_id;
    double score = 0.0;
    int rank = 0;  // 1-based
};

struct IndexEntry {
    std::string chunk_id;
    std::string doc_id;
    ChunkKind kind = ChunkKind::text;
};

// Exact cosine search over unit vectors stored row-major.
class VectorIndex {
public:
    explicit VectorIndex(std::string collection_id = "default") : collection_id_(std::move(collection_id)) {}

    const std::string& collection_id() const noexcept { return collection_id_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    std::span<const double> vector(std::size_t i) const;
    std::optional<std::size_t> find(std::string_view chunk_id) const;

    // Throws UsageError on a repeated chunk_id or zero vector, ConfigError on a dimension change.
    void add(IndexEntry entry, const gateway::EmbeddingVector& vector);

    // Top-k by descending score, ties by chunk_id ascending. k is clamped to the
    // number of matching entries. When `min_table_hits` > 0 and fewer table
    // chunks made the cut, the best remaining tables replace the weakest
    // non-table hits. Throws UsageError when k <= 0.
    std::vector<RetrievalHit> search(const gateway::EmbeddingVector& query, int k, const RetrievalFilter& filter = {},
                                     int min_table_hits = 0) const;

private:
    std::string collection_id_;
    std::size_t dimension_ = 0;
    std::vector<IndexEntry> entries_;
    std::vector<double> data_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
};

// Embeds chunk summaries, stores the vectors on the chunks and indexes them.
// Throws UsageError if a chunk lacks a summary.
VectorIndex build_index(gateway::Gateway& gw, std::vector<ContentChunk>& chunks, std::string collection_id = "default");

// Embeds the question text as-is and searches.
std::vector<RetrievalHit> retrieve(gateway::Gateway& gw, const VectorIndex& index, const std::string& question, int k,
                                   const RetrievalFilter& filter = {}, int min_table_hits = 0);

// Collection directory: vectors.bin (magic, version, dimension, count, then
// count*dimension little-endian doubles), chunks.json (metadata and summaries)
// and content.jsonl (raw content per chunk). Written to a sibling temporary
// directory and renamed into place.
void save_collection(const std::filesystem::path& dir, const VectorIndex& index,
                     const std::vector<ContentChunk>& chunks);

struct Collection {
    VectorIndex index;
    std::vector<ContentChunk> chunks;
};

// Throws StorageError on a missing file, unknown format version or inconsistent content.
Collection load_collection(const std::filesystem::path& dir);

}  // namespace scitab::index
