#include "scitab/index/chunk.hpp"

#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/parallel.hpp"
#include "scitab/text.hpp"

namespace scitab::index {

std::string_view to_string(ChunkKind kind) noexcept {
    switch (kind) {
    case ChunkKind::text: return "text";
    case ChunkKind::table: return "table";
    case ChunkKind::figure: return "figure";
    }
    return "text";
}

ChunkKind chunk_kind_from_string(std::string_view s) {
    if (s == "text") return ChunkKind::text;
    if (s == "table") return ChunkKind::table;
    if (s == "figure") return ChunkKind::figure;
    throw UsageError("unknown chunk kind '" + std::string(s) + "'");
}

std::vector<ContentChunk> chunks_from_bundle(const ingest::DocumentBundle& b) {
    std::vector<ContentChunk> out;
    int n_text = 0, n_table = 0, n_figure = 0;
    auto make = [&](ChunkKind kind, int& counter, std::string source, std::string content) {
        if (text::trim(content).empty()) return;
        ContentChunk c;
        c.chunk_id = b.doc_id + ":" + std::string(to_string(kind)) + ":" + std::to_string(++counter);
        c.doc_id = b.doc_id;
        c.kind = kind;
        c.source_id = std::move(source);
        c.raw_content = std::move(content);
        out.push_back(std::move(c));
    };
    for (const auto& s : b.snippets) make(ChunkKind::text, n_text, s.snippet_id, s.text);
    for (const auto& t : b.tables) make(ChunkKind::table, n_table, t.table_id, t.to_text());
    for (const auto& t : b.unparsed_tables)
        make(ChunkKind::text, n_text, t.table_id, t.caption.empty() ? t.raw_text : t.caption + "\n" + t.raw_text);
    for (const auto& f : b.figures) {
        std::string content = f.caption;
        if (!f.insight_text.empty() && f.insight_text != f.caption)
            content += (content.empty() ? "" : "\n") + f.insight_text;
        make(ChunkKind::figure, n_figure, f.figure_id, std::move(content));
    }
    return out;
}

ChunkSummary summarize_chunk(gateway::Gateway& gw, std::string_view raw, ChunkKind kind) {
    if (text::trim(raw).empty()) throw UsageError("cannot summarize empty chunk content");
    static constexpr std::string_view kKindNames[] = {"text passage", "table", "figure description"};
    std::string summary;
    try {
        summary = text::trim(gw.complete(gateway::template_id::chunk_summary,
                                         {{"kind", std::string(kKindNames[static_cast<int>(kind)])},
                                          {"content", std::string(raw)}}));
    } catch (const GatewayError& e) {
        gw.diagnostics().warn(std::string("chunk summary degraded: ") + e.what());
    }
    if (summary.empty()) return {text::utf8_prefix(text::trim(raw), kMaxSummaryChars), true};
    return {text::utf8_prefix(summary, kMaxSummaryChars), false};
}

void summarize_chunks(gateway::Gateway& gw, std::vector<ContentChunk>& chunks, int workers) {
    parallel_for(chunks.size(), workers, [&](std::size_t i) {
        auto& c = chunks[i];
        if (!c.summary.empty()) return;
        auto s = summarize_chunk(gw, c.raw_content, c.kind);
        c.summary = std::move(s.text);
        c.summary_degraded = s.degraded;
    });
}

}  // namespace scitab::index
