#include "scitab/batch.hpp"

#include "scitab/error.hpp"
#include "scitab/gateway/mock_provider.hpp"
#include "scitab/gateway/openai_provider.hpp"
#include "scitab/ingest/bundle_io.hpp"

#include <fstream>
#include <sstream>

namespace scitab::batch {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::unique_ptr<gateway::Gateway> make_gateway(const RuntimeOptions& options) {
    auto config = options.config ? gateway::GatewayConfig::load(*options.config) : gateway::GatewayConfig{};
    if (options.mock || options.mock_script) config.provider = "mock";
    if (options.cache_dir) config.cache_dir = *options.cache_dir;
    config.validate();

    std::shared_ptr<gateway::Provider> provider;
    if (config.provider == "mock") {
        provider = options.mock_script
                       ? std::make_shared<gateway::MockProvider>(gateway::MockScript::load(*options.mock_script))
                       : std::make_shared<gateway::MockProvider>();
    } else if (config.provider == "openai") {
        provider = std::make_shared<gateway::OpenAIProvider>(gateway::OpenAIProvider::from_config(config));
    } else {
        throw ConfigError("unknown provider '" + config.provider + "'");
    }
    return std::make_unique<gateway::Gateway>(std::move(config), std::move(provider));
}

fs::path report_path_for(const fs::path& out) {
    auto p = out;
    p.replace_extension(".quality.json");
    return p;
}

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw UsageError(path.string() + " is not valid JSON");
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw StorageError("cannot write " + path.string());
}

}  // namespace

BatchOutcome batch_extract(gateway::Gateway& gw, const BatchOptions& options) {
    if (!fs::is_directory(options.bundles)) throw UsageError("bundle directory " + options.bundles.string() + " not found");
    auto bundles = ingest::load_bundle_dir(options.bundles);
    if (bundles.empty()) throw UsageError("no bundles in " + options.bundles.string());

    pipeline::QueryRequest request;
    request.question = options.question;
    request.k = options.k;
    request.score = options.score;
    if (options.attributes) {
        auto attrs = read_json_file(*options.attributes);
        if (attrs.empty()) throw UsageError("attribute list is empty");
        request.attributes = std::move(attrs);
    }

    auto corpus = pipeline::build_corpus(gw, std::move(bundles));
    BatchOutcome outcome;
    outcome.result = pipeline::run_query(gw, corpus, request);
    outcome.csv = pipeline::table_csv(outcome.result.schema, outcome.result.records);
    outcome.report = pipeline::result_report(outcome.result);
    outcome.report_path = report_path_for(options.out);
    write_file(options.out, outcome.csv);
    write_file(outcome.report_path, outcome.report.dump(2) + "\n");
    return outcome;
}

}  // namespace scitab::batch
