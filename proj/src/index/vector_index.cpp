#include "scitab/index/vector_index.hpp"

#include "scitab/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace scitab::index {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "vector files are written in host order");

namespace {

constexpr char kMagic[8] = {'S', 'C', 'I', 'T', 'V', 'E', 'C', '\0'};

bool passes(const IndexEntry& e, const RetrievalFilter& f) {
    if (f.doc_id && e.doc_id != *f.doc_id) return false;
    if (f.kind && e.kind != *f.kind) return false;
    return true;
}

}  // namespace

std::span<const double> VectorIndex::vector(std::size_t i) const {
    if (i >= entries_.size()) throw UsageError("index entry out of range");
    return {data_.data() + i * dimension_, dimension_};
}

std::optional<std::size_t> VectorIndex::find(std::string_view chunk_id) const {
    auto it = by_id_.find(chunk_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

void VectorIndex::add(IndexEntry entry, const gateway::EmbeddingVector& v) {
    if (v.dimension() == 0) throw UsageError("cannot index an empty vector for " + entry.chunk_id);
    if (dimension_ == 0 && entries_.empty()) {
        dimension_ = v.dimension();
    } else if (v.dimension() != dimension_) {
        throw ConfigError("embedding dimension changed from " + std::to_string(dimension_) + " to " +
                          std::to_string(v.dimension()) + " at " + entry.chunk_id);
    }
    if (by_id_.count(entry.chunk_id)) throw UsageError("chunk " + entry.chunk_id + " is already indexed");
    by_id_.emplace(entry.chunk_id, entries_.size());
    data_.insert(data_.end(), v.values().begin(), v.values().end());
    entries_.push_back(std::move(entry));
}

std::vector<RetrievalHit> VectorIndex::search(const gateway::EmbeddingVector& query, int k,
                                              const RetrievalFilter& filter, int min_table_hits) const {
    if (k <= 0) throw UsageError("k must be positive");
    if (entries_.empty()) return {};
    if (query.dimension() != dimension_)
        throw ConfigError("query dimension " + std::to_string(query.dimension()) + " does not match index dimension " +
                          std::to_string(dimension_));

    struct Scored {
        std::size_t entry;
        double score;
    };
    std::vector<Scored> scored;
    const auto q = query.values();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!passes(entries_[i], filter)) continue;
        const double* row = data_.data() + i * dimension_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dimension_; ++d) dot += row[d] * q[d];
        scored.push_back({i, std::clamp(dot, -1.0, 1.0)});
    }
    auto before = [&](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return entries_[a.entry].chunk_id < entries_[b.entry].chunk_id;
    };
    std::sort(scored.begin(), scored.end(), before);

    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::vector<Scored> top(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take));

    if (min_table_hits > 0) {
        auto is_table = [&](const Scored& s) { return entries_[s.entry].kind == ChunkKind::table; };
        auto have = static_cast<std::size_t>(std::count_if(top.begin(), top.end(), is_table));
        auto available = static_cast<std::size_t>(std::count_if(scored.begin(), scored.end(), is_table));
        auto want = std::min({static_cast<std::size_t>(min_table_hits), available, take});
        for (std::size_t i = take; i < scored.size() && have < want; ++i) {
            if (!is_table(scored[i])) continue;
            // Drop the weakest non-table hit.
            for (auto it = top.rbegin(); it != top.rend(); ++it) {
                if (!is_table(*it)) {
                    top.erase(std::next(it).base());
                    break;
                }
            }
            top.push_back(scored[i]);
            ++have;
        }
        std::sort(top.begin(), top.end(), before);
    }

    std::vector<RetrievalHit> hits;
    hits.reserve(top.size());
    for (std::size_t i = 0; i < top.size(); ++i)
        hits.push_back({entries_[top[i].entry].chunk_id, top[i].score, static_cast<int>(i + 1)});
    return hits;
}

VectorIndex build_index(gateway::Gateway& gw, std::vector<ContentChunk>& chunks, std::string collection_id) {
    VectorIndex index(std::move(collection_id));
    if (chunks.empty()) return index;
    std::vector<std::string> summaries;
    summaries.reserve(chunks.size());
    for (const auto& c : chunks) {
        if (c.summary.empty()) throw UsageError("chunk " + c.chunk_id + " has no summary");
        summaries.push_back(c.summary);
    }
    auto vectors = gw.embed(summaries);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        chunks[i].vector = vectors[i];
        index.add({chunks[i].chunk_id, chunks[i].doc_id, chunks[i].kind}, vectors[i]);
    }
    return index;
}

std::vector<RetrievalHit> retrieve(gateway::Gateway& gw, const VectorIndex& index, const std::string& question, int k,
                                   const RetrievalFilter& filter, int min_table_hits) {
    if (k <= 0) throw UsageError("k must be positive");
    if (index.empty()) return {};
    auto q = gw.embed({question});
    return index.search(q.front(), k, filter, min_table_hits);
}

void save_collection(const fs::path& dir, const VectorIndex& index, const std::vector<ContentChunk>& chunks) {
    auto tmp = dir;
    tmp += ".tmp-" + std::to_string(::getpid());
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    {
        std::ofstream out(tmp / "vectors.bin", std::ios::binary);
        std::uint32_t version = kIndexFormatVersion;
        auto dim = static_cast<std::uint32_t>(index.dimension());
        auto count = static_cast<std::uint64_t>(index.size());
        out.write(kMagic, sizeof kMagic);
        out.write(reinterpret_cast<const char*>(&version), sizeof version);
        out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
        out.write(reinterpret_cast<const char*>(&count), sizeof count);
        for (std::size_t i = 0; i < index.size(); ++i) {
            auto row = index.vector(i);
            out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size_bytes()));
        }
        if (!out) throw StorageError("failed to write " + (tmp / "vectors.bin").string());
    }

    json meta{{"format_version", kIndexFormatVersion},
              {"collection_id", index.collection_id()},
              {"dimension", index.dimension()}};
    meta["entries"] = json::array();
    for (const auto& e : index.entries()) meta["entries"].push_back(e.chunk_id);
    meta["chunks"] = json::array();
    for (const auto& c : chunks)
        meta["chunks"].push_back({{"chunk_id", c.chunk_id},
                                  {"doc_id", c.doc_id},
                                  {"kind", to_string(c.kind)},
                                  {"source_id", c.source_id},
                                  {"summary", c.summary},
                                  {"summary_degraded", c.summary_degraded}});
    {
        std::ofstream out(tmp / "chunks.json");
        out << meta.dump(1) << "\n";
        if (!out) throw StorageError("failed to write chunks.json");
    }
    {
        std::ofstream out(tmp / "content.jsonl");
        for (const auto& c : chunks) out << json{{"chunk_id", c.chunk_id}, {"raw_content", c.raw_content}}.dump() << "\n";
        if (!out) throw StorageError("failed to write content.jsonl");
    }

    auto old = dir;
    old += ".old-" + std::to_string(::getpid());
    std::error_code ec;
    if (fs::exists(dir)) fs::rename(dir, old);
    fs::rename(tmp, dir);
    fs::remove_all(old, ec);
}

Collection load_collection(const fs::path& dir) {
    auto read_all = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw StorageError("missing collection file " + p.string());
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };

    auto meta = json::parse(read_all(dir / "chunks.json"), nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) throw StorageError("chunks.json is not valid JSON");
    if (meta.value("format_version", 0) != kIndexFormatVersion)
        throw StorageError("unsupported collection format version " + meta.value("format_version", json()).dump());

    std::map<std::string, std::string> content;
    {
        std::istringstream lines(read_all(dir / "content.jsonl"));
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            auto j = json::parse(line, nullptr, false);
            if (j.is_discarded()) throw StorageError("corrupt content.jsonl line");
            content[j.at("chunk_id").get<std::string>()] = j.at("raw_content").get<std::string>();
        }
    }

    auto bytes = read_all(dir / "vectors.bin");
    constexpr std::size_t header = sizeof kMagic + 4 + 4 + 8;
    if (bytes.size() < header || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw StorageError("vectors.bin has no valid header");
    std::uint32_t version = 0, dim = 0;
    std::uint64_t count = 0;
    std::memcpy(&version, bytes.data() + 8, 4);
    std::memcpy(&dim, bytes.data() + 12, 4);
    std::memcpy(&count, bytes.data() + 16, 8);
    if (version != kIndexFormatVersion) throw StorageError("unsupported vectors.bin version " + std::to_string(version));
    if (bytes.size() != header + count * dim * sizeof(double)) throw StorageError("vectors.bin size mismatch");

    Collection out{VectorIndex(meta.value("collection_id", "default")), {}};
    std::map<std::string, std::size_t> chunk_pos;
    for (const auto& c : meta.at("chunks")) {
        ContentChunk chunk;
        chunk.chunk_id = c.at("chunk_id").get<std::string>();
        chunk.doc_id = c.at("doc_id").get<std::string>();
        chunk.kind = chunk_kind_from_string(c.at("kind").get<std::string>());
        chunk.source_id = c.value("source_id", "");
        chunk.summary = c.at("summary").get<std::string>();
        chunk.summary_degraded = c.value("summary_degraded", false);
        auto it = content.find(chunk.chunk_id);
        if (it == content.end()) throw StorageError("no stored content for chunk " + chunk.chunk_id);
        chunk.raw_content = it->second;
        chunk_pos[chunk.chunk_id] = out.chunks.size();
        out.chunks.push_back(std::move(chunk));
    }

    const auto& entries = meta.at("entries");
    if (entries.size() != count) throw StorageError("entry count does not match vectors.bin");
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> values(dim);
        std::memcpy(values.data(), bytes.data() + header + i * dim * sizeof(double), dim * sizeof(double));
        auto id = entries[i].get<std::string>();
        auto pos = chunk_pos.find(id);
        if (pos == chunk_pos.end()) throw StorageError("indexed chunk " + id + " has no metadata");
        auto& chunk = out.chunks[pos->second];
        chunk.vector = gateway::EmbeddingVector(std::move(values));
        out.index.add({chunk.chunk_id, chunk.doc_id, chunk.kind}, *chunk.vector);
    }
    return out;
}

}  // namespace scitab::index
