#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/quality/quality.hpp"
#include "scitab/standardize/standardize.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace scitab::service {

struct ServiceOptions {
    // When set, each collection's database lives in <data_dir>/<collection_id>/db.
    std::filesystem::path data_dir;
    quality::Thresholds thresholds;
    std::uint64_t seed = standardize::kDefaultSeed;
    int k = 8;
};

// HTTP+JSON API over the pipeline. Ingest and query requests run as jobs on
// one background queue per collection; everything else is synchronous.
//
//   POST /collections                                  {"collection_id"?}
//   GET  /collections
//   GET  /collections/{cid}
//   POST /collections/{cid}/bundles                    {"bundles": [...]} -> 202 job
//   GET  /collections/{cid}/bundles
//   GET  /collections/{cid}/bundles/{doc_id}
//   POST /collections/{cid}/queries                    {"question" | "attributes", "doc_ids"?, "k"?} -> 202 job
//   GET  /collections/{cid}/queries
//   GET  /jobs/{job_id}
//   GET  /queries/{qid}
//   GET  /queries/{qid}/table
//   GET  /queries/{qid}/records/{rid}/contexts
//   PUT  /queries/{qid}/records/{rid}/cells/{column}    {"value": string|null, "revision"}
//   POST /queries/{qid}/records/{rid}/flags:clear       {"revision", "flags"?}
//   POST /queries/{qid}/groups                          {"columns", "k"?, "seed"?}
//   POST /queries/{qid}/plan:apply                      {"revision", "plan"}
//   POST /collections/{cid}/db:merge                   {"query_id", "revision"?, "policy"?}
//   GET  /collections/{cid}/db
//   GET  /collections/{cid}/db.csv
//
// Status codes: 400 invalid input, 404 unknown resource, 409 stale revision or
// conflicting data, 502 gateway failure, 500 storage failure.
class Service {
public:
    Service(gateway::Gateway& gw, ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void mount(httplib::Server& server);

    // Blocks until every queued job has finished.
    void wait_idle();

private:
    struct State;
    std::unique_ptr<State> state_;
};

}  // namespace scitab::service
