#pragma once

#include "scitab/quality/quality.hpp"
#include "scitab/record.hpp"
#include "scitab/standardize/standardize.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace scitab::store {

inline constexpr int kSnapshotVersion = 1;

enum class Actor { user, standardizer, extractor };
std::string_view to_string(Actor a) noexcept;
Actor actor_from_string(std::string_view s);

struct ChangeLogEntry {
    std::string timestamp;
    Actor actor = Actor::user;
    std::string doc_id;
    int ordinal = 0;
    std::string column;
    CellValue old_value;
    CellValue new_value;
    std::string note;

    friend bool operator==(const ChangeLogEntry&, const ChangeLogEntry&) = default;
};

using Clock = std::function<std::string()>;
// ISO 8601 UTC with milliseconds.
std::string utc_timestamp();

nlohmann::ordered_json to_json(const ChangeLogEntry& e);
ChangeLogEntry change_from_json(const nlohmann::ordered_json& j);

// Cell value as JSON: the text, or null for Empty.
nlohmann::ordered_json cell_to_json(const CellValue& c);
CellValue cell_from_json(const nlohmann::ordered_json& j, DeclaredKind kind);

// One query's table under review. Not synchronised; callers serialise writers.
class WorkingTable {
public:
    WorkingTable(TableSchema schema, std::vector<DataRecord> records, quality::Thresholds thresholds = {},
                 Clock clock = utc_timestamp);

    const TableSchema& schema() const noexcept { return schema_; }
    const std::vector<DataRecord>& records() const noexcept { return records_; }
    const quality::TableQuality& quality() const noexcept { return quality_; }
    const std::vector<ChangeLogEntry>& change_log() const noexcept { return log_; }
    std::uint64_t revision() const noexcept { return revision_; }

    // Throws UsageError for an unknown record.
    const DataRecord& record(const std::string& doc_id, int ordinal) const;

    // Replaces a cell (Empty allowed), logs it and refreshes metrics and flags.
    // Throws UsageError for an unknown record or column; nothing changes then.
    void edit_cell(const std::string& doc_id, int ordinal, const std::string& column, CellValue value,
                   Actor actor = Actor::user);

    // Acknowledges the record's current flags (or the listed ones).
    void clear_flags(const std::string& doc_id, int ordinal, std::optional<std::set<Flag>> which = std::nullopt);

    // Stores new judge scores; acknowledgments lapse when the scores change.
    void set_scores(const std::string& doc_id, int ordinal, const QualityScores& scores);

    standardize::ApplyResult apply_plan(const standardize::StandardizationPlan& plan);

    // Throws RevisionConflict when `expected` differs from the current revision.
    void check_revision(std::uint64_t expected) const;

    nlohmann::ordered_json to_json() const;

private:
    DataRecord& find(const std::string& doc_id, int ordinal);
    void refresh();

    TableSchema schema_;
    std::vector<DataRecord> records_;
    quality::Thresholds thresholds_;
    quality::TableQuality quality_;
    std::vector<ChangeLogEntry> log_;
    std::uint64_t revision_ = 0;
    Clock clock_;
};

enum class ConflictPolicy { incoming_wins, keep_existing, fail };
ConflictPolicy conflict_policy_from_string(std::string_view s);

struct DbRow {
    std::string doc_id;
    int ordinal = 0;
    std::map<std::string, CellValue> cells;  // every registry column
    std::map<std::string, std::vector<ProvenanceSpan>> provenance;

    friend bool operator==(const DbRow&, const DbRow&) = default;
};

struct MergeReport {
    std::size_t rows_added = 0;
    std::size_t cells_changed = 0;
    std::size_t conflicts = 0;
    std::vector<std::string> columns_added;
};

// Accumulated rows keyed by (doc_id, ordinal) with a column registry in
// first-merged order. Not synchronised; callers serialise writers.
class Database {
public:
    using Key = std::pair<std::string, int>;

    explicit Database(Clock clock = utc_timestamp) : clock_(std::move(clock)) {}

    const std::vector<Column>& columns() const noexcept { return columns_; }
    const std::map<Key, DbRow>& rows() const noexcept { return rows_; }
    const std::vector<ChangeLogEntry>& change_log() const noexcept { return log_; }
    std::uint64_t revision() const noexcept { return revision_; }
    bool empty() const noexcept { return rows_.empty(); }

    // Full outer join on (doc_id, ordinal). A non-Empty incoming value that
    // differs from a non-Empty stored one is a conflict settled by `policy`;
    // with `fail` a ConflictError is thrown before anything changes. Empty
    // incoming cells never overwrite stored values.
    MergeReport merge(const TableSchema& schema, const std::vector<DataRecord>& records,
                      ConflictPolicy policy = ConflictPolicy::incoming_wins, Actor actor = Actor::user);

    // Header doc_id, ordinal, registry columns; rows by key; Empty as an empty
    // field. Throws UsageError for an empty database.
    std::string export_csv() const;

    // Reads an exported CSV back (columns become string columns).
    static Database import_csv(std::string_view csv_text, Clock clock = utc_timestamp);

    // Snapshot (db.json, carrying the format version) plus an append-only
    // change log (changes.jsonl) in `dir`. Writers to one directory are
    // serialised in-process and across processes.
    void persist(const std::filesystem::path& dir) const;
    // Throws StorageError naming the found and expected versions on mismatch.
    static Database load(const std::filesystem::path& dir, Clock clock = utc_timestamp);

    nlohmann::ordered_json snapshot_json() const;

    // Structural equality: registry, rows, change log and revision.
    friend bool operator==(const Database& a, const Database& b) {
        return a.columns_ == b.columns_ && a.rows_ == b.rows_ && a.log_ == b.log_ && a.revision_ == b.revision_;
    }

private:
    std::vector<Column> columns_;
    std::map<Key, DbRow> rows_;
    std::vector<ChangeLogEntry> log_;
    std::uint64_t revision_ = 0;
    Clock clock_;
};

}  // namespace scitab::store
