#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/pipeline.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace scitab::batch {

struct RuntimeOptions {
    std::optional<std::filesystem::path> config;
    bool mock = false;  // also selected by "provider": "mock" in the config
    std::optional<std::filesystem::path> mock_script;
    std::optional<std::filesystem::path> cache_dir;
};

// Gateway over the configured provider. The OpenAI-compatible provider reads
// its key from the environment variable named by api_key_env.
std::unique_ptr<gateway::Gateway> make_gateway(const RuntimeOptions& options);

struct BatchOptions {
    std::filesystem::path bundles;
    std::optional<std::filesystem::path> attributes;  // JSON attribute list
    std::string question;                             // used when no attributes are given
    std::filesystem::path out;                        // CSV; the report goes next to it
    int k = index::kDefaultTopK;
    bool score = true;
};

struct BatchOutcome {
    pipeline::QueryResult result;
    std::string csv;
    nlohmann::ordered_json report;
    std::filesystem::path report_path;
};

// <out> with its extension replaced by ".quality.json".
std::filesystem::path report_path_for(const std::filesystem::path& out);

// Headless run: load bundles, ingest, index, schema, extract, score, then
// write the CSV and the quality report. Throws UsageError when the directory
// holds no bundles or the attribute list is empty.
BatchOutcome batch_extract(gateway::Gateway& gw, const BatchOptions& options);

}  // namespace scitab::batch
