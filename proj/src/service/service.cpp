#include "scitab/service/service.hpp"

#include "scitab/error.hpp"
#include "scitab/extract/extraction.hpp"
#include "scitab/ingest/bundle_io.hpp"
#include "scitab/pipeline.hpp"
#include "scitab/record_json.hpp"
#include "scitab/store/table_store.hpp"
#include "scitab/text.hpp"

#include <httplib.h>

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <thread>

namespace scitab::service {

using json = nlohmann::ordered_json;

namespace {

class NotFound : public Error {
public:
    using Error::Error;
};

// Runs submitted jobs one at a time, in order, on its own thread.
class JobQueue {
public:
    JobQueue() : worker_([this] { run(); }) {}
    ~JobQueue() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        worker_.join();
    }

    void push(std::function<void()> job) {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(job));
            ++pending_;
        }
        cv_.notify_all();
    }

    void wait_idle() {
        std::unique_lock lock(mutex_);
        idle_.wait(lock, [&] { return pending_ == 0; });
    }

private:
    void run() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
                if (queue_.empty()) return;
                job = std::move(queue_.front());
                queue_.pop_front();
            }
            job();
            {
                std::lock_guard lock(mutex_);
                --pending_;
            }
            idle_.notify_all();
        }
    }

    std::mutex mutex_;
    std::condition_variable cv_, idle_;
    std::deque<std::function<void()>> queue_;
    std::size_t pending_ = 0;
    bool stop_ = false;
    std::thread worker_;
};

struct Job {
    std::string id;
    std::string kind;
    std::string collection_id;
    std::string status = "queued";
    std::string error;
    std::string error_kind;
    json result = json::object();
    std::mutex mutex;

    json to_json() {
        std::lock_guard lock(mutex);
        json j{{"job_id", id}, {"kind", kind}, {"collection_id", collection_id}, {"status", status},
               {"result", result}};
        if (!error.empty()) j["error"] = {{"message", error}, {"kind", error_kind}};
        return j;
    }
};

struct QueryState {
    std::string id;
    std::string collection_id;
    std::string job_id;
    pipeline::QueryRequest request;
    std::string status = "queued";
    std::string error;
    std::string error_kind;
    std::string question;
    std::optional<store::WorkingTable> table;
    std::string summary;
    std::vector<std::string> degraded_documents;
    std::mutex mutex;
};

struct CollectionState {
    std::string id;
    std::shared_mutex corpus_mutex;
    pipeline::Corpus corpus;
    std::mutex db_mutex;
    store::Database db;
    std::vector<std::string> query_ids;
    JobQueue queue;  // last: joined before the state above is destroyed
};

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const SchemaError*>(&e)) return "schema_error";
    if (dynamic_cast<const GatewayError*>(&e) || dynamic_cast<const StructuredOutputError*>(&e))
        return "gateway_error";
    if (dynamic_cast<const ConflictError*>(&e)) return "conflict";
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const FormatError*>(&e)) return "invalid_request";
    if (dynamic_cast<const StorageError*>(&e)) return "storage_error";
    return "internal_error";
}

int status_for_kind(const std::string& kind) {
    if (kind == "schema_error") return 422;
    if (kind == "gateway_error") return 502;
    if (kind == "conflict") return 409;
    if (kind == "invalid_request") return 400;
    return 500;
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw UsageError("request body is not valid JSON");
    return j;
}

std::uint64_t require_revision(const json& body) {
    auto it = body.find("revision");
    if (it == body.end() || !it->is_number_integer() || it->get<long long>() < 0)
        throw UsageError("\"revision\" (non-negative integer) is required");
    return it->get<std::uint64_t>();
}

bool valid_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9_.-]{1,64}");
    return std::regex_match(id, pattern);
}

json merge_report_json(const store::MergeReport& r) {
    return {{"rows_added", r.rows_added},
            {"cells_changed", r.cells_changed},
            {"conflicts", r.conflicts},
            {"columns_added", r.columns_added}};
}

}  // namespace

struct Service::State {
    gateway::Gateway& gw;
    ServiceOptions options;

    std::mutex mutex;  // guards the maps and counters
    std::map<std::string, std::shared_ptr<CollectionState>> collections;
    std::map<std::string, std::shared_ptr<QueryState>> queries;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::size_t next_collection = 1, next_query = 1, next_job = 1;

    State(gateway::Gateway& g, ServiceOptions o) : gw(g), options(std::move(o)) {}

    std::shared_ptr<CollectionState> collection(const std::string& id) {
        std::lock_guard lock(mutex);
        auto it = collections.find(id);
        if (it == collections.end()) throw NotFound("unknown collection '" + id + "'");
        return it->second;
    }

    std::shared_ptr<QueryState> query(const std::string& id) {
        std::lock_guard lock(mutex);
        auto it = queries.find(id);
        if (it == queries.end()) throw NotFound("unknown query '" + id + "'");
        return it->second;
    }

    std::shared_ptr<Job> job(const std::string& id) {
        std::lock_guard lock(mutex);
        auto it = jobs.find(id);
        if (it == jobs.end()) throw NotFound("unknown job '" + id + "'");
        return it->second;
    }

    std::filesystem::path db_dir(const std::string& collection_id) const {
        return options.data_dir / collection_id / "db";
    }

    std::shared_ptr<Job> new_job(const std::string& kind, const std::string& collection_id) {
        auto job = std::make_shared<Job>();
        std::lock_guard lock(mutex);
        job->id = "j" + std::to_string(next_job++);
        job->kind = kind;
        job->collection_id = collection_id;
        jobs[job->id] = job;
        return job;
    }

    // Runs `work` on the collection's queue and records its outcome on `job`.
    void submit(CollectionState& c, std::shared_ptr<Job> job, std::function<json()> work,
                std::function<void(const std::exception&)> on_error = {}) {
        c.queue.push([job, work = std::move(work), on_error = std::move(on_error)] {
            {
                std::lock_guard lock(job->mutex);
                job->status = "running";
            }
            try {
                auto result = work();
                std::lock_guard lock(job->mutex);
                job->result = std::move(result);
                job->status = "succeeded";
            } catch (const std::exception& e) {
                if (on_error) on_error(e);
                std::lock_guard lock(job->mutex);
                job->status = "failed";
                job->error = e.what();
                job->error_kind = error_kind(e);
            }
        });
    }

    json degraded_details() const {
        auto warnings = gw.diagnostics().warnings();
        const std::size_t keep = 20;
        if (warnings.size() > keep) warnings.erase(warnings.begin(), warnings.end() - keep);
        return warnings;
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    Handler guarded(Handler h) {
        return [this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const NotFound& e) {
                send(res, 404, {{"error", e.what()}, {"kind", "not_found"}});
            } catch (const RevisionConflict& e) {
                send(res, 409, {{"error", e.what()}, {"kind", "revision_conflict"}, {"current_revision", e.current()}});
            } catch (const json::exception& e) {
                send(res, 400, {{"error", e.what()}, {"kind", "invalid_request"}});
            } catch (const std::exception& e) {
                auto kind = error_kind(e);
                json body{{"error", e.what()}, {"kind", kind}};
                if (kind == "gateway_error") body["degraded"] = degraded_details();
                send(res, status_for_kind(kind), body);
            }
        };
    }

    // --- collections ---------------------------------------------------

    json collection_json(CollectionState& c) {
        json j{{"collection_id", c.id}};
        {
            std::shared_lock lock(c.corpus_mutex);
            j["doc_ids"] = c.corpus.doc_ids();
            j["chunk_count"] = c.corpus.chunks.size();
        }
        {
            std::lock_guard lock(c.db_mutex);
            j["db_revision"] = c.db.revision();
            j["db_rows"] = c.db.rows().size();
        }
        std::lock_guard lock(mutex);
        j["query_ids"] = c.query_ids;
        return j;
    }

    void create_collection(const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        std::string id;
        if (auto it = body.find("collection_id"); it != body.end() && !it->is_null()) id = it->get<std::string>();
        std::shared_ptr<CollectionState> c;
        {
            std::lock_guard lock(mutex);
            if (id.empty()) {
                do id = "c" + std::to_string(next_collection++);
                while (collections.count(id));
            }
            if (!valid_id(id)) throw UsageError("collection_id may hold letters, digits, '_', '-' and '.'");
            if (collections.count(id)) throw ConflictError("collection '" + id + "' already exists");
            c = std::make_shared<CollectionState>();
            c->id = id;
            c->corpus.collection_id = id;
            c->corpus.index = index::VectorIndex(id);
            if (!options.data_dir.empty() && std::filesystem::exists(db_dir(id) / "db.json"))
                c->db = store::Database::load(db_dir(id));
            collections[id] = c;
        }
        send(res, 201, collection_json(*c));
    }

    void list_collections(const httplib::Request&, httplib::Response& res) {
        std::vector<std::shared_ptr<CollectionState>> all;
        {
            std::lock_guard lock(mutex);
            for (auto& [_, c] : collections) all.push_back(c);
        }
        json out = json::array();
        for (auto& c : all) out.push_back(collection_json(*c));
        send(res, 200, {{"collections", out}});
    }

    void ingest(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        auto body = parse_body(req);
        json list = body.contains("bundles") ? body["bundles"] : body.is_array() ? body : json::array({body});
        if (!list.is_array() || list.empty()) throw UsageError("\"bundles\" must be a nonempty array");

        std::vector<ingest::DocumentBundle> bundles;
        for (std::size_t i = 0; i < list.size(); ++i) {
            try {
                bundles.push_back(ingest::parse_bundle(list[i]));
            } catch (const FormatError& e) {
                std::string what = e.what();
                if (!e.field().empty()) what = what.substr(e.field().size() + 2);
                auto prefix = "bundles[" + std::to_string(i) + "]";
                throw FormatError(e.field().empty() ? prefix : prefix + "." + e.field(), what);
            }
        }
        std::vector<std::string> ids;
        {
            std::shared_lock lock(c->corpus_mutex);
            auto all = c->corpus.bundles;
            all.insert(all.end(), bundles.begin(), bundles.end());
            ingest::check_unique_doc_ids(all);
        }
        for (const auto& b : bundles) ids.push_back(b.doc_id);

        auto job = new_job("ingest", c->id);
        submit(*c, job, [this, c, bundles = std::move(bundles)]() mutable {
            pipeline::Corpus next;
            {
                std::shared_lock lock(c->corpus_mutex);
                next = c->corpus;
            }
            pipeline::extend_corpus(gw, next, std::move(bundles));
            std::unique_lock lock(c->corpus_mutex);
            c->corpus = std::move(next);
            return json{{"doc_ids", c->corpus.doc_ids()}, {"chunk_count", c->corpus.chunks.size()}};
        });
        send(res, 202, {{"job_id", job->id}, {"doc_ids", ids}, {"status", "queued"}});
    }

    void list_bundles(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        std::shared_lock lock(c->corpus_mutex);
        json out = json::array();
        for (const auto& b : c->corpus.bundles) out.push_back({{"doc_id", b.doc_id}, {"meta", ingest::to_json(b.meta)}});
        send(res, 200, {{"bundles", out}});
    }

    void get_bundle(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        std::shared_lock lock(c->corpus_mutex);
        const auto* b = c->corpus.bundle(req.matches[2]);
        if (!b) throw NotFound("unknown document '" + std::string(req.matches[2]) + "'");
        send(res, 200, ingest::to_json(*b));
    }

    // --- queries ---------------------------------------------------------

    static pipeline::QueryRequest parse_query(const json& body, const ServiceOptions& options) {
        pipeline::QueryRequest r;
        r.k = options.k;
        r.thresholds = options.thresholds;
        if (!body.is_object()) throw UsageError("query body must be an object");
        if (auto it = body.find("question"); it != body.end() && !it->is_null()) r.question = it->get<std::string>();
        if (auto it = body.find("attributes"); it != body.end() && !it->is_null()) r.attributes = *it;
        if (auto it = body.find("doc_ids"); it != body.end()) r.doc_ids = it->get<std::vector<std::string>>();
        if (auto it = body.find("k"); it != body.end()) r.k = it->get<int>();
        if (auto it = body.find("score"); it != body.end()) r.score = it->get<bool>();
        if (r.attributes) extract::schema_from_attributes(*r.attributes, r.question);
        return r;
    }

    void submit_query(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        auto request = parse_query(parse_body(req), options);
        {
            std::shared_lock lock(c->corpus_mutex);
            if (c->corpus.bundles.empty()) throw UsageError("collection has no documents yet");
            pipeline::validate_request(request, c->corpus);
        }
        auto q = std::make_shared<QueryState>();
        q->collection_id = c->id;
        q->request = request;
        q->question = text::trim(request.question);
        auto job = new_job("query", c->id);
        {
            std::lock_guard lock(mutex);
            q->id = "q" + std::to_string(next_query++);
            q->job_id = job->id;
            queries[q->id] = q;
            c->query_ids.push_back(q->id);
            std::lock_guard jl(job->mutex);
            job->result = {{"query_id", q->id}};
        }
        submit(
            *c, job,
            [this, c, q] {
                {
                    std::lock_guard lock(q->mutex);
                    q->status = "running";
                }
                pipeline::QueryResult result;
                {
                    std::shared_lock lock(c->corpus_mutex);
                    result = pipeline::run_query(gw, c->corpus, q->request);
                }
                std::lock_guard lock(q->mutex);
                q->question = result.question;
                q->table.emplace(result.schema, std::move(result.records), q->request.thresholds);
                q->summary = result.summary;
                q->degraded_documents = result.degraded_documents;
                q->status = "succeeded";
                return json{{"query_id", q->id},
                            {"record_count", q->table->records().size()},
                            {"degraded_documents", q->degraded_documents}};
            },
            [q](const std::exception& e) {
                std::lock_guard lock(q->mutex);
                q->status = "failed";
                q->error = e.what();
                q->error_kind = error_kind(e);
            });
        send(res, 202, {{"job_id", job->id}, {"query_id", q->id}, {"status", "queued"}});
    }

    static json query_status(QueryState& q) {
        json j{{"query_id", q.id}, {"collection_id", q.collection_id}, {"job_id", q.job_id},
               {"status", q.status}, {"question", q.question}};
        if (q.table) j["revision"] = q.table->revision();
        if (!q.error.empty()) j["error"] = {{"message", q.error}, {"kind", q.error_kind}};
        return j;
    }

    void list_queries(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        std::vector<std::shared_ptr<QueryState>> qs;
        {
            std::lock_guard lock(mutex);
            for (const auto& id : c->query_ids) qs.push_back(queries.at(id));
        }
        json out = json::array();
        for (auto& q : qs) {
            std::lock_guard lock(q->mutex);
            out.push_back(query_status(*q));
        }
        send(res, 200, {{"queries", out}});
    }

    void get_query(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        std::lock_guard lock(q->mutex);
        send(res, 200, query_status(*q));
    }

    // Caller holds q.mutex. Sends a non-200 status when the table is not ready.
    static bool ready(QueryState& q, httplib::Response& res) {
        if (q.table) return true;
        if (q.status == "failed")
            send(res, status_for_kind(q.error_kind), {{"error", q.error}, {"kind", q.error_kind}, {"status", q.status}});
        else
            send(res, 202, query_status(q));
        return false;
    }

    static json table_json(QueryState& q) {
        auto j = q.table->to_json();
        j["query_id"] = q.id;
        j["collection_id"] = q.collection_id;
        j["question"] = q.question;
        j["summary"] = q.summary;
        j["degraded_documents"] = q.degraded_documents;
        return j;
    }

    void get_table(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        std::lock_guard lock(q->mutex);
        if (ready(*q, res)) send(res, 200, table_json(*q));
    }

    static std::pair<std::string, int> find_record(QueryState& q, const std::string& rid) {
        auto key = parse_record_id(rid);
        for (const auto& r : q.table->records())
            if (r.doc_id == key.first && r.ordinal == key.second) return key;
        throw NotFound("unknown record '" + rid + "'");
    }

    void get_contexts(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        std::unique_lock lock(q->mutex);
        if (!ready(*q, res)) return;
        auto [doc_id, ordinal] = find_record(*q, req.matches[2]);
        DataRecord record = q->table->record(doc_id, ordinal);
        TableSchema schema = q->table->schema();
        lock.unlock();

        auto c = collection(q->collection_id);
        std::shared_lock corpus_lock(c->corpus_mutex);
        json contexts = json::array();
        for (const auto& id : record.context_chunk_ids) {
            const auto* chunk = c->corpus.chunk(id);
            if (!chunk) continue;
            json spans = json::array();
            for (const auto& [column, list] : record.provenance)
                for (const auto& s : list)
                    if (s.chunk_id == id) {
                        auto j = to_json(s);
                        j["column"] = column;
                        spans.push_back(std::move(j));
                    }
            contexts.push_back({{"chunk_id", chunk->chunk_id},
                                {"doc_id", chunk->doc_id},
                                {"kind", index::to_string(chunk->kind)},
                                {"source_id", chunk->source_id},
                                {"raw_content", chunk->raw_content},
                                {"summary", chunk->summary},
                                {"spans", spans}});
        }
        std::vector<std::string> empty_columns;
        for (const auto& col : schema.columns)
            if (record.cells.at(col.name).is_empty()) empty_columns.push_back(col.name);
        send(res, 200,
             {{"rid", record_id(record)},
              {"record", to_json(record, schema)},
              {"contexts", contexts},
              {"unverified_columns", record.unverified_columns},
              {"empty_columns", empty_columns}});
    }

    void edit_cell(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        auto body = parse_body(req);
        std::lock_guard lock(q->mutex);
        if (!ready(*q, res)) return;
        auto [doc_id, ordinal] = find_record(*q, req.matches[2]);
        auto revision = require_revision(body);
        auto it = body.find("value");
        if (it == body.end()) throw UsageError("\"value\" (string or null) is required");
        q->table->check_revision(revision);
        auto value = it->is_null() ? CellValue::empty() : CellValue::of(it->get<std::string>());
        q->table->edit_cell(doc_id, ordinal, req.matches[3], std::move(value));
        send(res, 200, table_json(*q));
    }

    void clear_flags(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        auto body = parse_body(req);
        std::lock_guard lock(q->mutex);
        if (!ready(*q, res)) return;
        auto [doc_id, ordinal] = find_record(*q, req.matches[2]);
        auto revision = require_revision(body);
        std::optional<std::set<Flag>> which;
        if (auto it = body.find("flags"); it != body.end() && !it->is_null()) {
            which.emplace();
            for (const auto& f : *it) which->insert(flag_from_string(f.get<std::string>()));
        }
        q->table->check_revision(revision);
        q->table->clear_flags(doc_id, ordinal, which);
        send(res, 200, table_json(*q));
    }

    void groups(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        auto body = parse_body(req);
        auto columns = body.at("columns").get<std::vector<std::string>>();
        if (columns.empty()) throw UsageError("select at least one column");
        standardize::ClusterOptions opts;
        opts.seed = body.value("seed", options.seed);
        if (auto it = body.find("k"); it != body.end() && !it->is_null()) opts.k = it->get<int>();

        std::unique_lock lock(q->mutex);
        if (!ready(*q, res)) return;
        auto records = q->table->records();
        auto schema = q->table->schema();
        auto revision = q->table->revision();
        lock.unlock();

        for (const auto& col : columns) schema.column(col);
        json out{{"query_id", q->id}, {"revision", revision}};
        std::vector<DataRecord> filled;
        for (const auto& r : records)
            for (const auto& col : columns)
                if (!r.cells.at(col).is_empty()) {
                    filled.push_back(r);
                    break;
                }
        out["grouping"] = filled.empty() ? json{{"columns", columns}, {"k", 0}, {"points", json::array()},
                                               {"clusters", json::array()}}
                                         : standardize::to_json(standardize::group_rows(gw, filled, schema, columns, opts));
        if (columns.size() == 1)
            out["plan"] = standardize::to_json(standardize::propose_groups(gw, records, schema, columns[0], opts));
        send(res, 200, out);
    }

    void apply_plan(const httplib::Request& req, httplib::Response& res) {
        auto q = query(req.matches[1]);
        auto body = parse_body(req);
        auto revision = require_revision(body);
        if (!body.contains("plan")) throw UsageError("\"plan\" is required");
        auto plan = standardize::plan_from_json(body["plan"]);
        std::lock_guard lock(q->mutex);
        if (!ready(*q, res)) return;
        q->table->check_revision(revision);
        auto result = q->table->apply_plan(plan);
        json changes = json::array();
        for (const auto& ch : result.changes)
            changes.push_back({{"doc_id", ch.doc_id},
                               {"ordinal", ch.ordinal},
                               {"column", ch.column},
                               {"old", store::cell_to_json(ch.old_value)},
                               {"new", store::cell_to_json(ch.new_value)}});
        auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        send(res, 200,
             {{"table", table_json(*q)},
              {"changes", changes},
              {"stale_variants", result.stale_variants},
              {"inconsistency_before", opt(result.inconsistency_before)},
              {"inconsistency_after", opt(result.inconsistency_after)}});
    }

    // --- database --------------------------------------------------------

    void merge(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        auto body = parse_body(req);
        auto q = query(body.at("query_id").get<std::string>());
        if (q->collection_id != c->id) throw UsageError("query belongs to another collection");
        auto policy = store::conflict_policy_from_string(body.value("policy", "incoming-wins"));

        std::unique_lock lock(q->mutex);
        if (!ready(*q, res)) return;
        if (body.contains("revision")) q->table->check_revision(require_revision(body));
        auto schema = q->table->schema();
        auto records = q->table->records();
        lock.unlock();

        std::lock_guard db_lock(c->db_mutex);
        auto report = c->db.merge(schema, records, policy, store::Actor::user);
        if (!options.data_dir.empty()) c->db.persist(db_dir(c->id));
        send(res, 200, {{"report", merge_report_json(report)},
                        {"db_revision", c->db.revision()},
                        {"db_rows", c->db.rows().size()}});
    }

    void get_db(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        std::lock_guard lock(c->db_mutex);
        auto j = c->db.snapshot_json();
        json log = json::array();
        for (const auto& e : c->db.change_log()) log.push_back(store::to_json(e));
        j["change_log"] = log;
        send(res, 200, j);
    }

    void get_db_csv(const httplib::Request& req, httplib::Response& res) {
        auto c = collection(req.matches[1]);
        std::lock_guard lock(c->db_mutex);
        res.status = 200;
        res.set_content(c->db.export_csv(), "text/csv; charset=utf-8");
        res.set_header("Content-Disposition", "attachment; filename=\"" + c->id + ".csv\"");
    }

    void get_job(const httplib::Request& req, httplib::Response& res) { send(res, 200, job(req.matches[1])->to_json()); }
};

Service::Service(gateway::Gateway& gw, ServiceOptions options)
    : state_(std::make_unique<State>(gw, std::move(options))) {}

// Drains the queues first: queued jobs hold their collection alive.
Service::~Service() { wait_idle(); }

void Service::wait_idle() {
    std::vector<std::shared_ptr<CollectionState>> all;
    {
        std::lock_guard lock(state_->mutex);
        for (auto& [_, c] : state_->collections) all.push_back(c);
    }
    for (auto& c : all) c->queue.wait_idle();
}

void Service::mount(httplib::Server& server) {
    auto* s = state_.get();
    auto bind = [s](void (State::*fn)(const httplib::Request&, httplib::Response&)) {
        return s->guarded([s, fn](const httplib::Request& req, httplib::Response& res) { (s->*fn)(req, res); });
    };
    const std::string id = "([^/]+)";

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"status", "ok"}}); });
    server.Post("/collections", bind(&State::create_collection));
    server.Get("/collections", bind(&State::list_collections));
    server.Get("/collections/" + id, s->guarded([s](const httplib::Request& req, httplib::Response& res) {
        send(res, 200, s->collection_json(*s->collection(req.matches[1])));
    }));
    server.Post("/collections/" + id + "/bundles", bind(&State::ingest));
    server.Get("/collections/" + id + "/bundles", bind(&State::list_bundles));
    server.Get("/collections/" + id + "/bundles/" + id, bind(&State::get_bundle));
    server.Post("/collections/" + id + "/queries", bind(&State::submit_query));
    server.Get("/collections/" + id + "/queries", bind(&State::list_queries));
    server.Post("/collections/" + id + "/db:merge", bind(&State::merge));
    server.Get("/collections/" + id + "/db", bind(&State::get_db));
    server.Get("/collections/" + id + "/db\\.csv", bind(&State::get_db_csv));
    server.Get("/jobs/" + id, bind(&State::get_job));
    server.Get("/queries/" + id, bind(&State::get_query));
    server.Get("/queries/" + id + "/table", bind(&State::get_table));
    server.Get("/queries/" + id + "/records/" + id + "/contexts", bind(&State::get_contexts));
    server.Put("/queries/" + id + "/records/" + id + "/cells/" + id, bind(&State::edit_cell));
    server.Post("/queries/" + id + "/records/" + id + "/flags:clear", bind(&State::clear_flags));
    server.Post("/queries/" + id + "/groups", bind(&State::groups));
    server.Post("/queries/" + id + "/plan:apply", bind(&State::apply_plan));
}

}  // namespace scitab::service
