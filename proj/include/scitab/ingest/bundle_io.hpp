#pragma once

#include "scitab/ingest/document.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace scitab::ingest {

inline constexpr std::size_t kDefaultMaxSnippetChars = 1500;

struct LoadOptions {
    // Snippets longer than this are re-segmented on load.
    std::size_t max_snippet_chars = kDefaultMaxSnippetChars;
};

// Bundle interchange format, one JSON file per document:
//   {"doc_id": "...",
//    "meta": {"title": "...", ... thirteen keys, missing ones become "none"},
//    "snippets": [{"snippet_id": "...", "section_label": "...", "text": "...", "char_span": [start, end]}],
//    "tables": [{"table_id": "...", "caption": "...", "header": [...], "rows": [[...]], "source_page": 3}
//               | {"table_id": "...", "caption": "...", "raw_text": "..."}],
//    "figures": [{"figure_id": "...", "caption": "...", "insight_text": "...", "image_ref": "fig1.jpg"}],
//    "pages": [{"page": 1, "text": "..."}]}
// Throws FormatError naming the first offending field.
DocumentBundle parse_bundle(const nlohmann::ordered_json& j, const LoadOptions& options = {},
                            const std::filesystem::path& base_dir = {});

// Reads a bundle file (.json) or the plain-text fallback (.txt: one document,
// doc_id = file stem, length-only segmentation).
DocumentBundle load_bundle(const std::filesystem::path& path, const LoadOptions& options = {});

// Loads every .json / .txt file in `dir` in filename order. Throws ConflictError
// on a repeated doc_id.
std::vector<DocumentBundle> load_bundle_dir(const std::filesystem::path& dir, const LoadOptions& options = {});

// Throws ConflictError naming the first repeated doc_id.
void check_unique_doc_ids(const std::vector<DocumentBundle>& batch);

DocumentBundle text_document(std::string doc_id, const std::string& raw_text, const LoadOptions& options = {});

nlohmann::ordered_json to_json(const DocumentBundle& bundle);
nlohmann::ordered_json to_json(const PaperMeta& meta);

}  // namespace scitab::ingest
