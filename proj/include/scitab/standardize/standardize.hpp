#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/record.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scitab::standardize {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kMaxAutoClusters = 8;
inline constexpr int kMaxLabelWords = 6;

struct RecordRef {
    std::string doc_id;
    int ordinal = 0;
    friend bool operator==(const RecordRef&, const RecordRef&) = default;
};

struct EncodedRow {
    std::string text;  // "column: value; column: value"
    std::size_t frequency = 0;
    std::vector<std::size_t> record_indices;  // into the input records
};

// Numeric columns are binned first; Empty renders as "column: empty".
// Identical texts are merged in first-occurrence order. Throws UsageError for
// an empty selection or an unknown column.
std::vector<EncodedRow> encode_rows(const std::vector<DataRecord>& records, const TableSchema& schema,
                                    const std::vector<std::string>& columns);

// Tercile labels low/medium/high by rank; nullopt entries are "empty". Values
// at a boundary take the lower label; a constant input is all "medium".
std::vector<std::string> bin_numeric(const std::vector<std::optional<double>>& values);

// First number in the text ("92.1%", "approx. 13"), if any.
std::optional<double> leading_number(std::string_view text);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Projection onto the top two principal components of the centred rows.
// Each axis is signed so its largest-magnitude loading is positive. A single
// row maps to the origin; rank-1 input has y = 0. Throws UsageError on empty
// or ragged input.
std::vector<Point2> project_2d(const std::vector<std::vector<double>>& vectors);

struct ClusterOptions {
    std::optional<int> k;  // chosen by silhouette when absent
    std::uint64_t seed = kDefaultSeed;
    int restarts = 8;
    int max_iterations = 300;
};

struct ClusterResult {
    int k = 0;
    std::vector<int> assignments;  // cluster ids numbered by first appearance
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    std::optional<double> silhouette;
};

// Weighted k-means (k-means++ seeding, Lloyd iterations). `weights` count
// duplicate rows; empty means all 1. With k absent, k maximises the mean
// silhouette over [2, min(8, n-1)] where n is the total weight, and k = 1 when
// n < 3. k never exceeds the number of distinct rows; n <= k gives singletons.
ClusterResult cluster(const std::vector<std::vector<double>>& vectors, const std::vector<double>& weights = {},
                      const ClusterOptions& options = {});

// Weighted mean silhouette; 0 for a single cluster.
double silhouette(const std::vector<std::vector<double>>& vectors, const std::vector<double>& weights,
                  const std::vector<int>& assignments);

using Member = std::pair<std::string, std::size_t>;  // value, count

// Members ordered by count descending, then value.
std::vector<Member> sort_members(std::vector<Member> members);

// Summarizer label of at most six words; the most frequent member when the
// gateway fails or returns nothing. A single member is its own label.
std::string label_cluster(gateway::Gateway& gw, std::vector<Member> members);

struct GroupPoint {
    double x = 0.0;
    double y = 0.0;
    int cluster_id = 0;
    std::size_t frequency = 0;
    std::string text;
    std::vector<RecordRef> records;
};

struct GroupCluster {
    int cluster_id = 0;
    std::string label;
    std::vector<Member> members;
    std::string tier;  // high | medium | low by total count
};

struct GroupingResult {
    std::vector<std::string> columns;
    int k = 0;
    std::vector<GroupPoint> points;
    std::vector<GroupCluster> clusters;
};

// Encodes, embeds, projects, clusters and labels the selected columns.
GroupingResult group_rows(gateway::Gateway& gw, const std::vector<DataRecord>& records, const TableSchema& schema,
                          const std::vector<std::string>& columns, const ClusterOptions& options = {});

struct PlanGroup {
    std::string name;
    std::vector<std::string> variants;
    std::string canonical;
    std::vector<std::size_t> counts;  // parallel to variants, informational
    std::string tier;

    friend bool operator==(const PlanGroup&, const PlanGroup&) = default;
};

struct StandardizationPlan {
    std::string column;
    std::vector<PlanGroup> groups;

    friend bool operator==(const StandardizationPlan&, const StandardizationPlan&) = default;
};

// One group per cluster of the column's non-Empty values, named by the
// cluster label, canonical = most frequent variant. All-Empty gives no groups.
StandardizationPlan propose_groups(gateway::Gateway& gw, const std::vector<DataRecord>& records,
                                   const TableSchema& schema, const std::string& column,
                                   const ClusterOptions& options = {});

// Throws UsageError when a variant sits in two groups, a canonical is blank,
// or a canonical matches a variant of another group (trim + case fold).
void validate_plan(const StandardizationPlan& plan, const TableSchema& schema);

struct CellChange {
    std::string doc_id;
    int ordinal = 0;
    std::string column;
    CellValue old_value;
    CellValue new_value;
};

struct ApplyResult {
    std::vector<CellChange> changes;
    std::vector<std::string> stale_variants;
    std::optional<double> inconsistency_before;
    std::optional<double> inconsistency_after;
};

// Rewrites every cell whose trimmed, case-folded value matches a grouped
// variant to the group's canonical value. Empty cells are untouched. The plan
// is validated before any mutation.
ApplyResult apply_plan(std::vector<DataRecord>& records, const TableSchema& schema, const StandardizationPlan& plan);

nlohmann::ordered_json to_json(const GroupingResult& g);
nlohmann::ordered_json to_json(const StandardizationPlan& p);
StandardizationPlan plan_from_json(const nlohmann::ordered_json& j);

}  // namespace scitab::standardize
