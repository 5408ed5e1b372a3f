#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/ingest/document.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scitab::ingest {

inline constexpr std::size_t kDefaultMetaHeadChars = 8000;

// Asks the model whether the page holds tables and returns their raw regions.
// Only regions that occur verbatim in `page_text` are kept; anything else is
// dropped with a warning. Unusable model output degrades to an empty list.
std::vector<std::string> identify_tables(gateway::Gateway& gw, std::string_view page_text);

// Collapses a two-level header (a row of repeated parent names over a row of
// sub-column names) into "parent child" names. Returns the number of leading
// rows consumed (1 or 2) through `header_rows`.
std::vector<std::string> flatten_header(const std::vector<std::vector<std::string>>& rows,
                                        std::size_t& header_rows);

// Parses CSV text from the model into a rectangular table. Throws FormatError
// on empty or ragged content.
StructuredTable table_from_csv(std::string_view csv_text);

// Recovers a table from raw text. Ragged output gets one repair round; after
// that StructuredOutputError is thrown and the caller keeps the raw text.
StructuredTable structure_table(gateway::Gateway& gw, std::string_view table_string);

// Vision description of a figure. Falls back to the caption (degraded) when
// the provider fails. Throws UsageError on an empty image.
FigureInsight describe_figure(gateway::Gateway& gw, std::span<const std::uint8_t> image,
                              const std::string& caption);

// Fills all thirteen meta keys from the head of a paper; keys the model omits
// become "none" and raise a warning.
PaperMeta extract_meta(gateway::Gateway& gw, std::string_view doc_text_head);

struct IngestOptions {
    std::size_t meta_head_chars = kDefaultMetaHeadChars;
    // Run table identification over bundle pages when they are present.
    bool identify_page_tables = true;
    // Concurrent documents; 0 means the gateway budget.
    int workers = 0;
};

// Completes bundles: metadata for documents that lack it, table structure for
// raw tables, insights for figures that carry images.
class Ingestor {
public:
    Ingestor(gateway::Gateway& gw, IngestOptions options = {}) : gw_(gw), options_(options) {}

    void complete(DocumentBundle& bundle);

    // Documents are processed independently and in parallel; order is preserved.
    void complete_all(std::vector<DocumentBundle>& bundles);

private:
    gateway::Gateway& gw_;
    IngestOptions options_;
};

}  // namespace scitab::ingest
