#include "scitab/store/table_store.hpp"

#include "scitab/csv.hpp"
#include "scitab/error.hpp"
#include "scitab/record_json.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <charconv>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

namespace scitab::store {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(Actor a) noexcept {
    switch (a) {
    case Actor::user: return "user";
    case Actor::standardizer: return "standardizer";
    case Actor::extractor: return "extractor";
    }
    return "user";
}

Actor actor_from_string(std::string_view s) {
    for (auto a : {Actor::user, Actor::standardizer, Actor::extractor})
        if (to_string(a) == s) return a;
    throw UsageError("unknown actor '" + std::string(s) + "'");
}

std::string utc_timestamp() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto secs = system_clock::to_time_t(now);
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

json cell_to_json(const CellValue& c) { return c.is_empty() ? json(nullptr) : json(c.text()); }

CellValue cell_from_json(const json& j, DeclaredKind kind) {
    if (j.is_null()) return CellValue::empty();
    if (!j.is_string()) throw UsageError("cell value must be a string or null");
    return CellValue::of(j.get<std::string>(), kind);
}

json to_json(const ChangeLogEntry& e) {
    return {{"timestamp", e.timestamp}, {"actor", to_string(e.actor)}, {"doc_id", e.doc_id},
            {"ordinal", e.ordinal},     {"column", e.column},          {"old", cell_to_json(e.old_value)},
            {"new", cell_to_json(e.new_value)}, {"note", e.note}};
}

ChangeLogEntry change_from_json(const json& j) {
    ChangeLogEntry e;
    e.timestamp = j.at("timestamp").get<std::string>();
    e.actor = actor_from_string(j.at("actor").get<std::string>());
    e.doc_id = j.at("doc_id").get<std::string>();
    e.ordinal = j.at("ordinal").get<int>();
    e.column = j.at("column").get<std::string>();
    e.old_value = cell_from_json(j.at("old"), DeclaredKind::string);
    e.new_value = cell_from_json(j.at("new"), DeclaredKind::string);
    e.note = j.value("note", "");
    return e;
}

// --- WorkingTable ---------------------------------------------------------

WorkingTable::WorkingTable(TableSchema schema, std::vector<DataRecord> records, quality::Thresholds thresholds,
                           Clock clock)
    : schema_(std::move(schema)), records_(std::move(records)), thresholds_(thresholds), clock_(std::move(clock)) {
    for (const auto& r : records_) {
        if (r.cells.size() != schema_.columns.size())
            throw UsageError("record " + record_id(r) + " does not match the schema columns");
        for (const auto& c : schema_.columns)
            if (!r.cells.count(c.name)) throw UsageError("record " + record_id(r) + " lacks column " + c.name);
    }
    refresh();
}

void WorkingTable::refresh() {
    quality::flag_records(records_, thresholds_);
    quality_ = quality::table_quality(records_, schema_, thresholds_);
}

const DataRecord& WorkingTable::record(const std::string& doc_id, int ordinal) const {
    for (const auto& r : records_)
        if (r.doc_id == doc_id && r.ordinal == ordinal) return r;
    throw UsageError("no record " + doc_id + ":" + std::to_string(ordinal));
}

DataRecord& WorkingTable::find(const std::string& doc_id, int ordinal) {
    return const_cast<DataRecord&>(static_cast<const WorkingTable&>(*this).record(doc_id, ordinal));
}

void WorkingTable::edit_cell(const std::string& doc_id, int ordinal, const std::string& column, CellValue value,
                             Actor actor) {
    auto& r = find(doc_id, ordinal);
    const auto& col = schema_.column(column);
    if (!value.is_empty()) value = CellValue::of(value.text(), col.kind);
    auto& cell = r.cells.at(column);
    log_.push_back({clock_(), actor, doc_id, ordinal, column, cell, value, "edit"});
    // An edited value is user-asserted; its old provenance no longer applies.
    if (!(cell == value)) {
        r.provenance.erase(column);
        r.unverified_columns.erase(column);
    }
    cell = std::move(value);
    ++revision_;
    refresh();
}

void WorkingTable::clear_flags(const std::string& doc_id, int ordinal, std::optional<std::set<Flag>> which) {
    auto& r = find(doc_id, ordinal);
    auto raw = quality::raw_flags(r, thresholds_);
    for (auto f : which ? *which : raw)
        if (raw.count(f)) r.acknowledged.insert(f);
    r.acknowledged_scores = r.quality;
    ++revision_;
    refresh();
}

void WorkingTable::set_scores(const std::string& doc_id, int ordinal, const QualityScores& scores) {
    find(doc_id, ordinal).quality = scores;
    ++revision_;
    refresh();
}

standardize::ApplyResult WorkingTable::apply_plan(const standardize::StandardizationPlan& plan) {
    auto result = standardize::apply_plan(records_, schema_, plan);
    auto ts = clock_();
    for (const auto& c : result.changes) {
        log_.push_back({ts, Actor::standardizer, c.doc_id, c.ordinal, c.column, c.old_value, c.new_value, "plan"});
        auto& r = find(c.doc_id, c.ordinal);
        r.provenance.erase(c.column);
        r.unverified_columns.erase(c.column);
    }
    ++revision_;
    refresh();
    return result;
}

void WorkingTable::check_revision(std::uint64_t expected) const {
    if (expected != revision_) throw RevisionConflict(static_cast<long>(expected), static_cast<long>(revision_));
}

json WorkingTable::to_json() const {
    json records = json::array();
    for (const auto& r : records_) records.push_back(scitab::to_json(r, schema_));
    return {{"revision", revision_},
            {"schema", scitab::to_json(schema_)},
            {"records", records},
            {"quality", quality::quality_report(schema_, records_, quality_)}};
}

// --- Database -------------------------------------------------------------

ConflictPolicy conflict_policy_from_string(std::string_view s) {
    if (s == "incoming-wins" || s == "incoming_wins") return ConflictPolicy::incoming_wins;
    if (s == "keep-existing" || s == "keep_existing") return ConflictPolicy::keep_existing;
    if (s == "fail") return ConflictPolicy::fail;
    throw UsageError("unknown conflict policy '" + std::string(s) + "'");
}

MergeReport Database::merge(const TableSchema& schema, const std::vector<DataRecord>& records, ConflictPolicy policy,
                            Actor actor) {
    auto differs = [](const CellValue& a, const CellValue& b) {
        return !a.is_empty() && !b.is_empty() && a.text() != b.text();
    };
    if (policy == ConflictPolicy::fail) {
        for (const auto& r : records) {
            auto it = rows_.find({r.doc_id, r.ordinal});
            if (it == rows_.end()) continue;
            for (const auto& [col, cell] : r.cells) {
                auto c = it->second.cells.find(col);
                if (c != it->second.cells.end() && differs(c->second, cell))
                    throw ConflictError("merge conflict at " + r.doc_id + ":" + std::to_string(r.ordinal) + " column " +
                                        col + ": '" + c->second.text() + "' vs '" + cell.text() + "'");
            }
        }
    }

    MergeReport report;
    for (const auto& c : schema.columns) {
        bool known = std::any_of(columns_.begin(), columns_.end(), [&](const Column& k) { return k.name == c.name; });
        if (known) continue;
        columns_.push_back(c);
        report.columns_added.push_back(c.name);
        for (auto& [_, row] : rows_) row.cells.emplace(c.name, CellValue::empty());
    }

    const auto ts = clock_();
    for (const auto& r : records) {
        Key key{r.doc_id, r.ordinal};
        auto it = rows_.find(key);
        if (it == rows_.end()) {
            DbRow row{r.doc_id, r.ordinal, {}, {}};
            for (const auto& c : columns_) row.cells.emplace(c.name, CellValue::empty());
            it = rows_.emplace(key, std::move(row)).first;
            ++report.rows_added;
        }
        auto& row = it->second;
        for (const auto& c : schema.columns) {
            auto in = r.cells.find(c.name);
            if (in == r.cells.end() || in->second.is_empty()) continue;
            auto& stored = row.cells[c.name];
            if (!stored.is_empty() && stored.text() == in->second.text()) continue;
            std::string note = "merge";
            if (differs(stored, in->second)) {
                ++report.conflicts;
                if (policy == ConflictPolicy::keep_existing) {
                    log_.push_back({ts, actor, r.doc_id, r.ordinal, c.name, stored, in->second,
                                    "merge conflict: kept existing"});
                    continue;
                }
                note = "merge conflict: incoming wins";
            }
            log_.push_back({ts, actor, r.doc_id, r.ordinal, c.name, stored, in->second, note});
            stored = in->second;
            if (auto p = r.provenance.find(c.name); p != r.provenance.end()) row.provenance[c.name] = p->second;
            else row.provenance.erase(c.name);
            ++report.cells_changed;
        }
    }
    if (report.rows_added || report.cells_changed || report.conflicts || !report.columns_added.empty()) ++revision_;
    return report;
}

std::string Database::export_csv() const {
    if (rows_.empty()) throw UsageError("database is empty");
    std::vector<csv::Row> out;
    csv::Row header{"doc_id", "ordinal"};
    for (const auto& c : columns_) header.push_back(c.name);
    out.push_back(std::move(header));
    for (const auto& [key, row] : rows_) {
        csv::Row line{row.doc_id, std::to_string(row.ordinal)};
        for (const auto& c : columns_) {
            auto it = row.cells.find(c.name);
            line.push_back(it == row.cells.end() ? std::string() : it->second.text_or_blank());
        }
        out.push_back(std::move(line));
    }
    return csv::write(out);
}

Database Database::import_csv(std::string_view text, Clock clock) {
    auto rows = csv::parse(text);
    if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "doc_id" || rows[0][1] != "ordinal")
        throw FormatError("header", "expected doc_id, ordinal, then columns");
    Database db(std::move(clock));
    for (std::size_t i = 2; i < rows[0].size(); ++i) db.columns_.push_back({rows[0][i], "", DeclaredKind::string});
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& line = rows[r];
        if (line.size() != rows[0].size())
            throw FormatError("row " + std::to_string(r + 1), "arity differs from the header");
        int ordinal = 0;
        auto [p, ec] = std::from_chars(line[1].data(), line[1].data() + line[1].size(), ordinal);
        if (ec != std::errc() || p != line[1].data() + line[1].size())
            throw FormatError("row " + std::to_string(r + 1), "ordinal is not an integer");
        DbRow row{line[0], ordinal, {}, {}};
        for (std::size_t i = 2; i < line.size(); ++i) row.cells.emplace(rows[0][i], CellValue::of(line[i]));
        if (!db.rows_.emplace(Key{line[0], ordinal}, std::move(row)).second)
            throw FormatError("row " + std::to_string(r + 1), "duplicate (doc_id, ordinal)");
    }
    return db;
}

json Database::snapshot_json() const {
    json cols = json::array();
    for (const auto& c : columns_)
        cols.push_back({{"name", c.name}, {"value_description", c.value_description}, {"declared_kind", to_string(c.kind)}});
    json rows = json::array();
    for (const auto& [key, row] : rows_) {
        json cells = json::object();
        for (const auto& [col, v] : row.cells) cells[col] = cell_to_json(v);
        json prov = json::object();
        for (const auto& [col, spans] : row.provenance) {
            json arr = json::array();
            for (const auto& s : spans) arr.push_back(scitab::to_json(s));
            prov[col] = arr;
        }
        rows.push_back({{"doc_id", row.doc_id}, {"ordinal", row.ordinal}, {"cells", cells}, {"provenance", prov}});
    }
    return {{"format", "scitab-database"},
            {"version", kSnapshotVersion},
            {"revision", revision_},
            {"change_count", log_.size()},
            {"columns", cols},
            {"rows", rows}};
}

namespace {

std::mutex& dir_mutex(const fs::path& dir) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard lock(registry_mutex);
    auto key = fs::weakly_canonical(dir).string();
    auto& m = registry[key];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

// Exclusive advisory lock on <dir>/.lock for the lifetime of the object.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : fd_(::open((dir / ".lock").c_str(), O_CREAT | O_RDWR, 0644)) {
        if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) throw StorageError("cannot lock " + dir.string());
    }
    ~DirLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    int fd_;
};

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(std::move(line));
    return out;
}

}  // namespace

void Database::persist(const fs::path& dir) const {
    fs::create_directories(dir);
    std::lock_guard guard(dir_mutex(dir));
    DirLock lock(dir);

    const auto log_path = dir / "changes.jsonl";
    std::vector<std::string> lines;
    for (const auto& e : log_) lines.push_back(to_json(e).dump());
    const auto stored = read_lines(log_path);
    const bool prefix = stored.size() <= lines.size() && std::equal(stored.begin(), stored.end(), lines.begin());
    {
        // Append when the directory holds our own history so far; otherwise it
        // held a different one and is rewritten.
        std::ofstream out(log_path, prefix ? std::ios::app : std::ios::trunc);
        for (std::size_t i = prefix ? stored.size() : 0; i < lines.size(); ++i) out << lines[i] << "\n";
        if (!out) throw StorageError("failed to write " + log_path.string());
    }

    const auto tmp = dir / ("db.json.tmp-" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << snapshot_json().dump(1) << "\n";
        out.flush();
        if (!out) throw StorageError("failed to write " + tmp.string());
    }
    fs::rename(tmp, dir / "db.json");
}

Database Database::load(const fs::path& dir, Clock clock) {
    std::ifstream in(dir / "db.json");
    if (!in) throw StorageError("no database snapshot in " + dir.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw StorageError("database snapshot is not valid JSON");
    if (j.value("format", "") != "scitab-database") throw StorageError("file is not a database snapshot");
    auto version = j.value("version", -1);
    if (version != kSnapshotVersion)
        throw StorageError("database snapshot version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kSnapshotVersion) + ")");

    Database db(std::move(clock));
    try {
        db.revision_ = j.at("revision").get<std::uint64_t>();
        for (const auto& c : j.at("columns"))
            db.columns_.push_back({c.at("name").get<std::string>(), c.value("value_description", ""),
                                   declared_kind_from_string(c.value("declared_kind", "string"))});
        std::map<std::string, DeclaredKind> kinds;
        for (const auto& c : db.columns_) kinds[c.name] = c.kind;
        for (const auto& r : j.at("rows")) {
            DbRow row{r.at("doc_id").get<std::string>(), r.at("ordinal").get<int>(), {}, {}};
            for (const auto& [col, v] : r.at("cells").items()) {
                auto k = kinds.find(col);
                if (k == kinds.end()) throw StorageError("row cell in unregistered column " + col);
                row.cells.emplace(col, cell_from_json(v, k->second));
            }
            const auto provenance = r.value("provenance", json::object());
            for (const auto& [col, spans] : provenance.items())
                for (const auto& s : spans) row.provenance[col].push_back(span_from_json(s));
            db.rows_.emplace(Key{row.doc_id, row.ordinal}, std::move(row));
        }
        std::ifstream log(dir / "changes.jsonl");
        std::string line;
        while (std::getline(log, line))
            if (!line.empty()) db.log_.push_back(change_from_json(json::parse(line)));
    } catch (const json::exception& e) {
        throw StorageError(std::string("corrupt database snapshot: ") + e.what());
    }
    auto expected = j.value("change_count", db.log_.size());
    if (db.log_.size() < expected)
        throw StorageError("change log holds " + std::to_string(db.log_.size()) + " entries, snapshot expects " +
                           std::to_string(expected));
    db.log_.resize(expected);
    return db;
}

}  // namespace scitab::store
