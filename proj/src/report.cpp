#include "ancreg/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ancreg/config_text.hpp"
#include "ancreg/errors.hpp"

namespace ancreg {

namespace {

using nlohmann::json;

std::string fixed(double value, int precision) {
    if (!std::isfinite(value)) return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

json name_list(const NodeSet& nodes, const std::vector<std::string>& names) {
    json out = json::array();
    for (std::size_t k : nodes) out.push_back(names.at(k));
    return out;
}

std::string dot_id(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace

json number_or_null(double value) {
    return std::isfinite(value) ? json(value) : json(nullptr);
}

std::vector<AncestorRow> ancestor_rows(const AncestorScan& scan, double alpha, bool cap) {
    const auto candidates = scan.candidates();
    const auto corrected = holm(scan.candidate_pvalues(), cap);
    std::vector<AncestorRow> rows;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(candidates[i]);
        rows.push_back({candidates[i], scan.z(k), scan.p_raw(k), corrected[i], corrected[i] < alpha});
    }
    return rows;
}

json ancestor_report_json(const AncestorScan& scan, const std::vector<AncestorRow>& rows,
                          const std::vector<std::string>& names, double alpha, bool cap, std::size_t n,
                          const std::optional<std::string>& environment) {
    json doc;
    doc["schema"] = "ancreg.ancestor_report";
    doc["schema_version"] = kSchemaVersion;
    doc["environment"] = environment ? json(*environment) : json(nullptr);
    doc["target"] = names.at(scan.target);
    doc["f"] = nonlinearity_name(scan.f);
    doc["n"] = n;
    doc["alpha"] = alpha;
    doc["capped"] = cap;
    json list = json::array();
    for (const auto& row : rows) {
        list.push_back({{"candidate", names.at(row.candidate)},
                        {"z", number_or_null(row.z)},
                        {"p_raw", row.p_raw},
                        {"p_holm", row.p_holm},
                        {"significant", row.significant}});
    }
    doc["candidates"] = std::move(list);
    return doc;
}

std::string ancestor_table(const std::vector<AncestorRow>& rows, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << pad("candidate", 12) << pad("z", 14) << pad("p_raw", 14) << pad("p_holm", 14) << "significant\n";
    for (const auto& row : rows) {
        out << pad(names.at(row.candidate), 12) << pad(fixed(row.z, 6), 14) << pad(fixed(row.p_raw, 6), 14)
            << pad(fixed(row.p_holm, 6), 14) << (row.significant ? "yes" : "no") << '\n';
    }
    return out.str();
}

json parent_report_json(const ParentReport& report, const std::vector<std::string>& names) {
    json tests = json::array();
    for (std::size_t i = 0; i < report.ancestors_used.size(); ++i) {
        tests.push_back({{"ancestor", names.at(report.ancestors_used[i])},
                         {"coef", number_or_null(report.coef[i])},
                         {"t", number_or_null(report.t_stat[i])},
                         {"p_value", report.p_value[i]}});
    }
    return {{"target", names.at(report.target)}, {"tests", std::move(tests)}};
}

json graph_result_json(const GraphResult& result, const std::vector<std::string>& names,
                       const std::vector<ParentReport>& parents, const std::optional<std::string>& environment,
                       bool centered) {
    json doc;
    doc["schema"] = "ancreg.graph_result";
    doc["schema_version"] = kSchemaVersion;
    doc["environment"] = environment ? json(*environment) : json(nullptr);
    doc["nodes"] = names;
    doc["n"] = result.n;
    doc["f"] = nonlinearity_name(result.f);
    doc["centered"] = centered;
    doc["alpha"] = result.alpha;
    doc["alpha_hat"] = result.alpha_hat;
    doc["tightened"] = result.tightened;
    doc["capped"] = result.capped;
    doc["model_check_p_value"] = result.capped ? json(model_check_pvalue(result)) : json(nullptr);
    json ancestors = json::object();
    for (std::size_t j = 0; j < result.ancestors.size(); ++j) {
        ancestors[names.at(j)] = name_list(result.ancestors[j], names);
    }
    doc["ancestors"] = std::move(ancestors);
    json edges = json::array();
    for (const auto& e : result.edges) {
        edges.push_back({{"from", names.at(e.ancestor)}, {"to", names.at(e.target)}, {"corrected_p", e.corrected_p}});
    }
    doc["edges"] = std::move(edges);
    json parent_list = json::array();
    for (const auto& report : parents) parent_list.push_back(parent_report_json(report, names));
    doc["parents"] = std::move(parent_list);
    doc["hols_check"] = nullptr;
    return doc;
}

std::string graph_result_dot(const GraphResult& result, const std::vector<std::string>& names,
                             std::string_view graph_name) {
    std::ostringstream out;
    out << "digraph " << dot_id(std::string(graph_name)) << " {\n";
    for (const auto& name : names) out << "  " << dot_id(name) << ";\n";
    for (const auto& e : result.edges) {
        out << "  " << dot_id(names.at(e.ancestor)) << " -> " << dot_id(names.at(e.target)) << " [label=\""
            << fixed(e.corrected_p, 3) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

std::vector<EdgeSummary> summarize_environments(const std::vector<EnvironmentFit>& fits, double level) {
    std::size_t total = 0;
    for (const auto& fit : fits) total += fit.graph.edges.size();
    std::map<std::pair<std::size_t, std::size_t>, EdgeSummary> table;
    for (const auto& fit : fits) {
        for (const auto& e : fit.graph.edges) {
            auto& row = table[{e.ancestor, e.target}];
            row.ancestor = e.ancestor;
            row.target = e.target;
            ++row.suggested;
        }
        for (const auto& report : fit.parents) {
            for (std::size_t i = 0; i < report.ancestors_used.size(); ++i) {
                auto& row = table[{report.ancestors_used[i], report.target}];
                const double p = report.p_value[i];
                row.min_p = std::min(row.min_p, p);
                if (p * static_cast<double>(total) < level) ++row.significant;
            }
        }
    }
    std::vector<EdgeSummary> out;
    for (auto& [key, row] : table) out.push_back(row);
    return out;
}

json environment_summary_json(const std::vector<EnvironmentFit>& fits, const std::vector<EdgeSummary>& edges,
                              const std::vector<std::string>& names, double level) {
    json doc;
    doc["schema"] = "ancreg.environment_summary";
    doc["schema_version"] = kSchemaVersion;
    doc["nodes"] = names;
    doc["level"] = level;
    json envs = json::array();
    for (const auto& fit : fits) {
        envs.push_back({{"environment", fit.environment},
                        {"n", fit.graph.n},
                        {"alpha_hat", fit.graph.alpha_hat},
                        {"tightened", fit.graph.tightened},
                        {"model_check_p_value",
                         fit.graph.capped ? json(model_check_pvalue(fit.graph)) : json(nullptr)}});
    }
    doc["environments"] = std::move(envs);
    json rows = json::array();
    for (const auto& e : edges) {
        rows.push_back({{"from", names.at(e.ancestor)},
                        {"to", names.at(e.target)},
                        {"suggested", e.suggested},
                        {"passing_hols", nullptr},
                        {"significant_in_linear_model", e.significant},
                        {"min_p", e.min_p}});
    }
    doc["edges"] = std::move(rows);
    return doc;
}

std::string environment_summary_table(const std::vector<EdgeSummary>& edges, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << pad("edge", 24) << pad("suggested", 11) << pad("hols", 6) << pad("significant", 13) << "min_p\n";
    for (const auto& e : edges) {
        out << pad(names.at(e.ancestor) + " -> " + names.at(e.target), 24) << pad(std::to_string(e.suggested), 11)
            << pad("-", 6) << pad(std::to_string(e.significant), 13) << fixed(e.min_p, 3) << '\n';
    }
    return out.str();
}

std::string study_curves_csv(const StudyResult& result) {
    std::string out = "scenario,n,alpha,fwer,power\n";
    for (std::size_t s = 0; s < result.sample_sizes.size(); ++s) {
        for (std::size_t a = 0; a < result.alphas.size(); ++a) {
            const auto si = static_cast<Eigen::Index>(s);
            const auto ai = static_cast<Eigen::Index>(a);
            out += result.scenario + ',' + std::to_string(result.sample_sizes[s]) + ',' +
                   format_double(result.alphas[a]) + ',' + format_double(result.fwer(si, ai)) + ',' +
                   format_double(result.power(si, ai)) + '\n';
        }
    }
    return out;
}

std::string study_z_csv(const StudyResult& result) {
    std::string out = "scenario,node,name,n,mean_abs_z\n";
    if (result.mean_abs_z.size() == 0) return out;
    for (std::size_t k = 0; k < result.p; ++k) {
        if (result.target && *result.target == k) continue;
        for (std::size_t s = 0; s < result.sample_sizes.size(); ++s) {
            out += result.scenario + ',' + std::to_string(k + 1) + ',' + result.names[k] + ',' +
                   std::to_string(result.sample_sizes[s]) + ',' +
                   format_double(result.mean_abs_z(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k))) +
                   '\n';
        }
    }
    return out;
}

json study_summary_json(const StudyResult& result) {
    json doc;
    doc["schema"] = "ancreg.study_summary";
    doc["schema_version"] = kSchemaVersion;
    doc["scenario"] = result.scenario;
    doc["kind"] = result.kind == StudyKind::Ancestor ? "ancestor" : "graph";
    doc["nodes"] = result.names;
    doc["target"] = result.target ? json(result.names.at(*result.target)) : json(nullptr);
    doc["runs"] = result.runs;
    doc["reference_alpha"] = result.reference_alpha;
    json sizes = json::array();
    for (std::size_t s = 0; s < result.sample_sizes.size(); ++s) {
        json entry;
        entry["n"] = result.sample_sizes[s];
        entry["fwer"] = result.fwer_at_reference[s];
        entry["detected_fraction"] = result.detected_fraction[s];
        if (result.mean_abs_z.size() > 0) {
            json z = json::object();
            for (std::size_t k = 0; k < result.p; ++k) {
                if (result.target && *result.target == k) continue;
                z[result.names[k]] =
                    number_or_null(result.mean_abs_z(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)));
            }
            entry["mean_abs_z"] = std::move(z);
        }
        if (result.kind == StudyKind::Graph) {
            std::size_t tightened = 0;
            for (double hat : result.alpha_hat[s]) tightened += hat < result.reference_alpha ? 1 : 0;
            entry["tightened_fraction"] =
                static_cast<double>(tightened) / static_cast<double>(std::max<std::size_t>(1, result.runs));
        }
        json rates = json::array();
        const auto& rate = result.relation_rate[s];
        for (Eigen::Index j = 0; j < rate.rows(); ++j) {
            for (Eigen::Index k = 0; k < rate.cols(); ++k) {
                if (rate(j, k) > 0.0) {
                    rates.push_back({{"from", result.names[static_cast<std::size_t>(k)]},
                                     {"to", result.names[static_cast<std::size_t>(j)]},
                                     {"rate", rate(j, k)}});
                }
            }
        }
        entry["claim_rates"] = std::move(rates);
        sizes.push_back(std::move(entry));
    }
    doc["sample_sizes"] = std::move(sizes);
    return doc;
}

json manifest_json(const RunManifest& manifest) {
    return {{"schema", "ancreg.run_manifest"},
            {"schema_version", kSchemaVersion},
            {"command", manifest.command},
            {"config_digest", manifest.config_digest},
            {"seed", manifest.seed},
            {"tool_version", manifest.tool_version},
            {"started_at", manifest.started_at},
            {"finished_at", manifest.finished_at},
            {"outputs", manifest.outputs}};
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string digest_string(std::uint64_t digest) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file_atomic(const std::string& path, std::string_view content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write " + temp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw InvalidInput("cannot write " + temp.string());
    }
    std::filesystem::rename(temp, target);
}

}  // namespace ancreg
