#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ancreg/experiments.hpp"
#include "ancreg/graph_search.hpp"
#include "ancreg/multiple_testing.hpp"
#include "ancreg/regression.hpp"

namespace ancreg {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Non-finite numbers become null.
[[nodiscard]] nlohmann::json number_or_null(double value);

struct AncestorRow {
    std::size_t candidate = 0;
    double z = 0.0;
    double p_raw = 1.0;
    double p_holm = 1.0;
    bool significant = false;
};

/// One row per candidate of a scan, Holm-corrected over the target's p - 1
/// hypotheses.
[[nodiscard]] std::vector<AncestorRow> ancestor_rows(const AncestorScan& scan, double alpha, bool cap);

[[nodiscard]] nlohmann::json ancestor_report_json(const AncestorScan& scan, const std::vector<AncestorRow>& rows,
                                                  const std::vector<std::string>& names, double alpha, bool cap,
                                                  std::size_t n, const std::optional<std::string>& environment);

/// Fixed-width table: candidate, z, raw p, Holm p, significance flag.
[[nodiscard]] std::string ancestor_table(const std::vector<AncestorRow>& rows, const std::vector<std::string>& names);

[[nodiscard]] nlohmann::json parent_report_json(const ParentReport& report, const std::vector<std::string>& names);

/// Graph result document; `parents` may be empty.
[[nodiscard]] nlohmann::json graph_result_json(const GraphResult& result, const std::vector<std::string>& names,
                                               const std::vector<ParentReport>& parents,
                                               const std::optional<std::string>& environment, bool centered);

/// Claimed ancestor relations as a DOT digraph; edges carry their corrected
/// p-value as a label.
[[nodiscard]] std::string graph_result_dot(const GraphResult& result, const std::vector<std::string>& names,
                                           std::string_view graph_name = "ancestors");

/// Per environment: which relations were suggested and whether the parent
/// t-test keeps them after a Bonferroni correction over all suggestions.
struct EnvironmentFit {
    std::string environment;
    GraphResult graph;
    std::vector<ParentReport> parents;  // one per node with claimed ancestors
};

struct EdgeSummary {
    std::size_t ancestor = 0;
    std::size_t target = 0;
    std::size_t suggested = 0;
    std::size_t significant = 0;
    double min_p = 1.0;
};

[[nodiscard]] std::vector<EdgeSummary> summarize_environments(const std::vector<EnvironmentFit>& fits, double level);
[[nodiscard]] nlohmann::json environment_summary_json(const std::vector<EnvironmentFit>& fits,
                                                      const std::vector<EdgeSummary>& edges,
                                                      const std::vector<std::string>& names, double level);
[[nodiscard]] std::string environment_summary_table(const std::vector<EdgeSummary>& edges,
                                                    const std::vector<std::string>& names);

/// Curves: one row per (n, alpha). Z table: one row per (node, n).
[[nodiscard]] std::string study_curves_csv(const StudyResult& result);
[[nodiscard]] std::string study_z_csv(const StudyResult& result);
[[nodiscard]] nlohmann::json study_summary_json(const StudyResult& result);

struct RunManifest {
    std::vector<std::string> command;
    std::string config_digest;  // "fnv1a64:<hex>" over the inputs
    std::uint64_t seed = 0;
    std::string tool_version = std::string(kToolVersion);
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
};

[[nodiscard]] nlohmann::json manifest_json(const RunManifest& manifest);

/// 64-bit FNV-1a digest.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
[[nodiscard]] std::string digest_string(std::uint64_t digest);
/// UTC time in ISO 8601 with second resolution.
[[nodiscard]] std::string utc_timestamp();

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace ancreg
