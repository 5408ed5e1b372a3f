#include "scitab/batch.hpp"
#include "scitab/error.hpp"
#include "scitab/eval/scorer.hpp"
#include "scitab/service/service.hpp"
#include "scitab/standardize/standardize.hpp"
#include "scitab/store/table_store.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using namespace scitab;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPartial = 3;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UsageError("cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void add_runtime_flags(CLI::App* app, batch::RuntimeOptions& rt, std::string& config, std::string& script,
                       std::string& cache) {
    app->add_option("--config", config, "gateway configuration JSON");
    app->add_flag("--mock", rt.mock, "use the offline mock provider");
    app->add_option("--mock-script", script, "mock provider script (implies --mock)");
    app->add_option("--cache", cache, "response cache directory");
}

void finish_runtime(batch::RuntimeOptions& rt, const std::string& config, const std::string& script,
                    const std::string& cache) {
    if (!config.empty()) rt.config = config;
    if (!script.empty()) rt.mock_script = script;
    if (!cache.empty()) rt.cache_dir = cache;
}

httplib::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-augmented table extraction from parsed scientific documents"};
    app.require_subcommand(1);

    batch::RuntimeOptions rt;
    std::string config, script, cache;

    auto* be = app.add_subcommand("batch-extract", "extract a table from a bundle directory");
    batch::BatchOptions bo;
    std::string bundles, attributes, out;
    bool no_score = false;
    int seed_unused = 0;
    be->add_option("--bundles", bundles, "directory of document bundles")->required();
    be->add_option("--attributes", attributes, "JSON attribute list {name: description}");
    be->add_option("--question", bo.question, "question to infer the schema from");
    be->add_option("--out", out, "output CSV")->required();
    be->add_option("--k", bo.k, "contexts retrieved per document")->check(CLI::PositiveNumber);
    be->add_option("--seed", seed_unused, "accepted for symmetry; extraction is deterministic");
    be->add_flag("--no-score", no_score, "skip judge-based quality scores");
    add_runtime_flags(be, rt, config, script, cache);

    auto* sc = app.add_subcommand("score", "score a generated CSV against a gold CSV (0/1/2 per cell)");
    std::string generated, gold, score_out;
    sc->add_option("--generated", generated, "generated CSV")->required();
    sc->add_option("--gold", gold, "gold CSV")->required();
    sc->add_option("--out", score_out, "write the report JSON here instead of stdout");

    auto* gr = app.add_subcommand("group", "propose a standardization plan for one column of a CSV");
    std::string table, column;
    std::uint64_t seed = standardize::kDefaultSeed;
    std::optional<int> k_groups;
    gr->add_option("--table", table, "CSV with doc_id, ordinal and value columns")->required();
    gr->add_option("--column", column, "column to group")->required();
    gr->add_option("--seed", seed, "clustering seed");
    gr->add_option("--groups", k_groups, "number of groups (default: chosen by silhouette)");
    add_runtime_flags(gr, rt, config, script, cache);

    auto* sv = app.add_subcommand("serve", "run the HTTP API");
    service::ServiceOptions so;
    std::string host = "127.0.0.1", data_dir;
    int port = 8080;
    sv->add_option("--host", host, "bind address");
    sv->add_option("--port", port, "port");
    sv->add_option("--data-dir", data_dir, "persist collection databases here");
    sv->add_option("--k", so.k, "default contexts per document")->check(CLI::PositiveNumber);
    sv->add_option("--seed", so.seed, "default clustering seed");
    add_runtime_flags(sv, rt, config, script, cache);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    finish_runtime(rt, config, script, cache);

    try {
        if (*be) {
            bo.bundles = bundles;
            bo.out = out;
            bo.score = !no_score;
            if (!attributes.empty()) bo.attributes = attributes;
            if (!bo.attributes && bo.question.empty()) throw UsageError("give --attributes or --question");
            auto gw = batch::make_gateway(rt);
            auto outcome = batch::batch_extract(*gw, bo);
            const auto& r = outcome.result;
            auto stats = gw->stats();
            std::cout << r.records.size() << " records; " << r.degraded_documents.size() << " degraded documents\n";
            std::cout << "table: " << bo.out.string() << "\nreport: " << outcome.report_path.string() << "\n";
            std::cerr << "provider calls: " << stats.provider_calls << ", cache hits: " << stats.cache_hits
                      << ", repairs: " << stats.repairs << "\n";
            for (const auto& d : r.degraded_documents) std::cerr << "degraded: " << d << "\n";
            return r.degraded_documents.empty() ? 0 : kExitPartial;
        }
        if (*sc) {
            auto report = eval::score_tables(read_file(generated), read_file(gold));
            auto text = eval::to_json(report).dump(2) + "\n";
            if (score_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream(score_out) << text;
                std::cout << "grand total " << report.grand_total << " of " << report.max_total() << "\n";
            }
            return 0;
        }
        if (*gr) {
            auto db = store::Database::import_csv(read_file(table));
            TableSchema schema;
            for (const auto& c : db.columns()) schema.columns.push_back({c.name, "String: " + c.name, c.kind});
            std::vector<DataRecord> records;
            for (const auto& [key, row] : db.rows()) {
                auto r = empty_record(schema, row.doc_id, row.ordinal);
                r.cells = row.cells;
                records.push_back(std::move(r));
            }
            auto gw = batch::make_gateway(rt);
            standardize::ClusterOptions opts;
            opts.seed = seed;
            opts.k = k_groups;
            schema.column(column);
            std::cout << standardize::to_json(standardize::propose_groups(*gw, records, schema, column, opts)).dump(2)
                      << "\n";
            return 0;
        }
        if (*sv) {
            if (!data_dir.empty()) so.data_dir = data_dir;
            auto gw = batch::make_gateway(rt);
            service::Service service(*gw, so);
            httplib::Server server;
            service.mount(server);
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            std::signal(SIGTERM, [](int) {
                if (g_server) g_server->stop();
            });
            std::cerr << "listening on " << host << ":" << port << "\n";
            if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
