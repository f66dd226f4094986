#include "ancreg/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ancreg/config_text.hpp"
#include "ancreg/dataset.hpp"
#include "ancreg/errors.hpp"
#include "ancreg/experiments.hpp"
#include "ancreg/graph_search.hpp"
#include "ancreg/report.hpp"
#include "ancreg/rng.hpp"
#include "ancreg/sem_io.hpp"
#include "ancreg/study_io.hpp"

namespace ancreg {

namespace {

namespace fs = std::filesystem;

struct Options {
    // shared
    std::vector<std::string> inputs;
    double alpha = 0.05;
    std::string f = "cube";
    bool no_cap = false;
    bool no_center = false;
    bool no_header = false;
    std::optional<std::string> env_column;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    // per command
    std::string target;
    std::string ancestors;
    std::size_t n = 0;
    std::size_t environments = 0;
    std::string out_file;
    unsigned threads = 0;
    bool equilibrium = false;
};

struct Context {
    const std::vector<std::string>& args;
    std::ostream& out;
    std::ostream& err;
    std::string started_at = utc_timestamp();
};

std::string format_p(double p) {
    std::ostringstream s;
    s.precision(4);
    s << p;
    return s.str();
}

std::string safe_name(const std::string& label) {
    std::string out;
    for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
    return out.empty() ? "env" : out;
}

SemSpec load_spec(const std::string& source, bool require_dag, std::string& text) {
    constexpr std::string_view prefix = "builtin:";
    if (source.rfind(prefix, 0) == 0) {
        SemSpec spec = builtin_spec(source.substr(prefix.size()));
        if (require_dag) (void)validate_dag(spec.theta);
        text = format_sem_spec(spec);
        return spec;
    }
    text = read_text_file(source);
    return parse_sem_spec(text, require_dag);
}

/// All environments of all inputs. One file without an env column is a
/// single unnamed environment; several files are named by their stems.
std::vector<Dataset> load_datasets(const Options& opt, std::string& digest_input) {
    CsvOptions csv;
    csv.header = !opt.no_header;
    csv.env_column = opt.env_column;
    std::vector<Dataset> out;
    for (const auto& path : opt.inputs) {
        const std::string text = read_text_file(path);
        digest_input += text;
        std::vector<Dataset> parts;
        try {
            parts = parse_environments(text, csv);
        } catch (const NonFiniteError&) {
            throw;
        } catch (const ParseError& e) {
            const std::string first_line = text.substr(0, text.find('\n'));
            if (opt.env_column || opt.no_header || first_line.find("environment") == std::string::npos) throw;
            throw ParseError(std::string(e.what()) + "; for labelled data pass --env-column environment");
        }
        for (auto& d : parts) {
            if (!d.environment && opt.inputs.size() > 1) d.environment = fs::path(path).stem().string();
            out.push_back(std::move(d));
        }
    }
    for (const auto& d : out) {
        if (d.column_names != out.front().column_names) {
            throw InvalidInput("all environments must share the same columns");
        }
    }
    return out;
}

std::string env_label(const Dataset& d) { return d.environment.value_or("all"); }

void write_manifest(const Context& ctx, const Options& opt, const std::string& path, const std::string& digest_input,
                    std::vector<std::string> outputs) {
    RunManifest m;
    m.command = ctx.args;
    std::string canonical = digest_input;
    for (const auto& a : ctx.args) canonical += '\0' + a;
    m.config_digest = digest_string(fnv1a64(canonical));
    m.seed = opt.seed.value_or(0);
    m.started_at = ctx.started_at;
    m.finished_at = utc_timestamp();
    m.outputs = std::move(outputs);
    write_file_atomic(path, manifest_json(m).dump(2) + '\n');
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Context& ctx, const Options& opt) {
    std::string text;
    const SemSpec spec = load_spec(opt.inputs.at(0), !opt.equilibrium, text);
    const std::uint64_t seed = opt.seed.value_or(1);
    auto draw = [&](std::uint64_t s) {
        return opt.equilibrium ? simulate_equilibrium(spec, opt.n, s) : simulate(spec, opt.n, s);
    };
    std::string csv;
    if (opt.environments == 0) {
        Dataset d{column_names(spec), draw(seed), std::nullopt};
        csv = format_csv(d);
    } else {
        const std::string column = opt.env_column.value_or("environment");
        for (std::size_t e = 0; e < opt.environments; ++e) {
            Dataset d{column_names(spec), draw(derive_seed(seed, {e})),
                      "env" + std::to_string(e + 1)};
            std::string part = format_csv(d, column);
            if (e > 0) part.erase(0, part.find('\n') + 1);
            csv += part;
        }
    }
    const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
    const fs::path target = opt.out_file.empty() ? dir / "simulated.csv"
                            : fs::path(opt.out_file).is_absolute() || opt.out_dir.empty()
                                ? fs::path(opt.out_file)
                                : dir / opt.out_file;
    write_file_atomic(target.string(), csv);
    Options with_seed = opt;
    with_seed.seed = seed;
    write_manifest(ctx, with_seed, target.string() + ".manifest.json", text, {target.string()});
    ctx.out << "wrote " << target.string() << " (" << (opt.environments ? opt.environments : 1) << " x " << opt.n
            << " rows, " << spec.p() << " columns)\n";
    return kExitOk;
}

int cmd_ancestors(const Context& ctx, const Options& opt) {
    std::string digest_input;
    const auto datasets = load_datasets(opt, digest_input);
    const Nonlinearity f = parse_nonlinearity(opt.f);
    std::vector<std::string> written;
    for (const auto& d : datasets) {
        const std::size_t target = d.column_index(opt.target);
        const AncestorScan scan = ancestor_scan(d.data, target, ScanOptions{f, !opt.no_center});
        const auto rows = ancestor_rows(scan, opt.alpha, !opt.no_cap);
        if (datasets.size() > 1 || d.environment) ctx.out << "== environment " << env_label(d) << '\n';
        ctx.out << "target " << d.column_names[target] << ", n = " << d.data.n() << ", f = " << opt.f
                << ", alpha = " << opt.alpha << (opt.no_cap ? ", uncapped Holm" : ", Holm") << '\n';
        ctx.out << ancestor_table(rows, d.column_names);
        if (!opt.out_dir.empty()) {
            const std::string stem = d.environment ? safe_name(*d.environment) + "." : "";
            const fs::path path = fs::path(opt.out_dir) / (stem + "ancestors.json");
            write_file_atomic(path.string(), ancestor_report_json(scan, rows, d.column_names, opt.alpha,
                                                                  !opt.no_cap, d.data.n(), d.environment)
                                                     .dump(2) +
                                                 '\n');
            written.push_back(path.string());
        }
    }
    if (!opt.out_dir.empty()) {
        write_manifest(ctx, opt, (fs::path(opt.out_dir) / "manifest.json").string(), digest_input, written);
    }
    return kExitOk;
}

std::vector<ParentReport> parents_of(const DataMatrix& data, const GraphResult& graph, bool center) {
    std::vector<ParentReport> out;
    for (std::size_t j = 0; j < graph.ancestors.size(); ++j) {
        if (!graph.ancestors[j].empty()) out.push_back(parent_tests(data, j, graph.ancestors[j], center));
    }
    return out;
}

void print_graph(std::ostream& out, const EnvironmentFit& fit, const std::vector<std::string>& names) {
    const GraphResult& g = fit.graph;
    out << "claimed ancestor relations (" << g.edges.size() << "):\n";
    for (const auto& e : g.edges) {
        out << "  " << names[e.ancestor] << " -> " << names[e.target] << "  p_holm = " << format_p(e.corrected_p)
            << '\n';
    }
    if (g.capped) {
        out << "model check: alpha_hat = " << format_p(g.alpha_hat)
            << (g.tightened ? " (cycles forced a lower level)" : " (no cycles)")
            << ", p-value = " << format_p(model_check_pvalue(g)) << '\n';
    } else {
        out << "model check: alpha_hat = " << format_p(g.alpha_hat) << " (uncapped Holm, no p-value)\n";
    }
    if (!fit.parents.empty()) out << "parent tests:\n";
    for (const auto& report : fit.parents) {
        for (std::size_t i = 0; i < report.ancestors_used.size(); ++i) {
            out << "  " << names[report.ancestors_used[i]] << " -> " << names[report.target]
                << "  coef = " << format_p(report.coef[i]) << "  t = " << format_p(report.t_stat[i])
                << "  p = " << format_p(report.p_value[i]) << '\n';
        }
    }
}

int cmd_graph(const Context& ctx, const Options& opt) {
    std::string digest_input;
    const auto datasets = load_datasets(opt, digest_input);
    GraphOptions graph_options{opt.alpha, parse_nonlinearity(opt.f), !opt.no_cap, !opt.no_center};
    const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
    const auto& names = datasets.front().column_names;
    std::vector<EnvironmentFit> fits;
    std::vector<std::string> written;
    double hat_min = 1.0;
    double hat_max = 0.0;
    for (const auto& d : datasets) {
        EnvironmentFit fit{env_label(d), detect_graph(d.data, graph_options), {}};
        fit.parents = parents_of(d.data, fit.graph, !opt.no_center);
        hat_min = std::min(hat_min, fit.graph.alpha_hat);
        hat_max = std::max(hat_max, fit.graph.alpha_hat);

        ctx.out << "== environment " << fit.environment << " (n = " << d.data.n() << ", p = " << d.data.p() << ")\n";
        print_graph(ctx.out, fit, names);
        const std::string stem = d.environment ? safe_name(*d.environment) + "." : "";
        const fs::path json_path = dir / (stem + "graph.json");
        const fs::path dot_path = dir / (stem + "graph.dot");
        write_file_atomic(json_path.string(),
                          graph_result_json(fit.graph, names, fit.parents, d.environment, !opt.no_center).dump(2) +
                              '\n');
        write_file_atomic(dot_path.string(), graph_result_dot(fit.graph, names, fit.environment));
        written.push_back(json_path.string());
        written.push_back(dot_path.string());
        fits.push_back(std::move(fit));
    }
    if (fits.size() > 1) {
        const auto edges = summarize_environments(fits, opt.alpha);
        ctx.out << "== summary over " << fits.size() << " environments\n";
        ctx.out << "alpha_hat ranges from " << format_p(hat_max) << " to " << format_p(hat_min) << '\n';
        ctx.out << environment_summary_table(edges, names);
        const fs::path path = dir / "summary.json";
        write_file_atomic(path.string(), environment_summary_json(fits, edges, names, opt.alpha).dump(2) + '\n');
        written.push_back(path.string());
    }
    write_manifest(ctx, opt, (dir / "manifest.json").string(), digest_input, written);
    return kExitOk;
}

int cmd_parents(const Context& ctx, const Options& opt) {
    std::string digest_input;
    const auto datasets = load_datasets(opt, digest_input);
    for (const auto& d : datasets) {
        const DataMatrix& data = d.data;
        const std::size_t target = d.column_index(opt.target);
        NodeSet ancestors;
        if (opt.ancestors.empty()) {
            const GraphOptions graph_options{opt.alpha, parse_nonlinearity(opt.f), !opt.no_cap, !opt.no_center};
            ancestors = detect_graph(data, graph_options).ancestors[target];
        } else {
            for (const auto& token : split_list(opt.ancestors)) ancestors.push_back(d.column_index(token));
            std::sort(ancestors.begin(), ancestors.end());
            ancestors.erase(std::unique(ancestors.begin(), ancestors.end()), ancestors.end());
            if (std::find(ancestors.begin(), ancestors.end(), target) != ancestors.end()) {
                throw InvalidInput("the target cannot be one of its own ancestors");
            }
        }
        if (datasets.size() > 1 || d.environment) ctx.out << "== environment " << env_label(d) << '\n';
        try {
            const ParentReport report = parent_tests(data, target, ancestors, !opt.no_center);
            ctx.out << "parent tests for " << d.column_names[target] << " (df = " << d.data.n() - ancestors.size()
                    << "):\n";
            for (std::size_t i = 0; i < ancestors.size(); ++i) {
                ctx.out << "  " << d.column_names[ancestors[i]] << "  coef = " << format_p(report.coef[i])
                        << "  t = " << format_p(report.t_stat[i]) << "  p = " << format_p(report.p_value[i]) << '\n';
            }
        } catch (const EmptyAncestors&) {
            ctx.out << d.column_names[target] << " has no claimed ancestors; nothing to test\n";
        }
    }
    return kExitOk;
}

int cmd_study(const Context& ctx, const Options& opt) {
    const std::string& path = opt.inputs.at(0);
    auto configs = load_study_configs(path);
    const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
    std::vector<std::string> written;
    for (auto& config : configs) {
        if (opt.seed) config.seed = *opt.seed;
        if (opt.threads) config.threads = opt.threads;
        const StudyResult result = run_study(config);
        const std::string stem = safe_name(config.scenario);
        const fs::path curves = dir / (stem + ".curves.csv");
        const fs::path summary = dir / (stem + ".summary.json");
        write_file_atomic(curves.string(), study_curves_csv(result));
        write_file_atomic(summary.string(), study_summary_json(result).dump(2) + '\n');
        written.push_back(curves.string());
        written.push_back(summary.string());
        if (result.kind == StudyKind::Ancestor) {
            const fs::path z = dir / (stem + ".z.csv");
            write_file_atomic(z.string(), study_z_csv(result));
            written.push_back(z.string());
        }
        ctx.out << "== scenario " << config.scenario << " (" << result.runs << " runs)\n";
        for (std::size_t s = 0; s < result.sample_sizes.size(); ++s) {
            ctx.out << "  n = " << result.sample_sizes[s] << ": detected = " << format_p(result.detected_fraction[s])
                    << ", fwer = " << format_p(result.fwer_at_reference[s]) << " at alpha = "
                    << result.reference_alpha;
            if (result.mean_abs_z.size() > 0) {
                ctx.out << ", mean |z| =";
                for (std::size_t k = 0; k < result.p; ++k) {
                    if (result.target && *result.target == k) continue;
                    ctx.out << ' ' << result.names[k] << ':'
                            << format_p(result.mean_abs_z(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)));
                }
            }
            ctx.out << '\n';
        }
    }
    Options with_seed = opt;
    with_seed.seed = configs.front().seed;
    write_manifest(ctx, with_seed, (dir / "manifest.json").string(), read_text_file(path), written);
    return kExitOk;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Parse:
    case ErrorKind::Validation: return kExitParse;
    case ErrorKind::Numerical: return kExitNumerical;
    }
    return kExitInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ancestor regression for linear structural equation models"};
    app.name("ancreg");
    app.require_subcommand(1);
    Options opt;

    auto add_analysis_flags = [&](CLI::App* cmd) {
        cmd->add_option("--alpha", opt.alpha, "Significance level")->check(CLI::PositiveNumber);
        cmd->add_option("--f", opt.f, "Nonlinearity: cube, signed_square or tanh");
        cmd->add_flag("--no-cap", opt.no_cap, "Do not cap Holm-corrected p-values at 1");
        cmd->add_flag("--no-center", opt.no_center, "Skip centering (data already centered)");
        cmd->add_flag("--no-header", opt.no_header, "Input files have no header row");
        cmd->add_option("--env-column", opt.env_column, "Column holding environment labels");
        cmd->add_option("--out-dir", opt.out_dir, "Directory for output files");
        cmd->add_option("--seed", opt.seed, "Random seed");
    };

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate data from a model file or builtin:NAME");
    simulate_cmd->add_option("spec", opt.inputs, "Model file or builtin:NAME")->required()->expected(1);
    simulate_cmd->add_option("-n,--samples", opt.n, "Rows per environment")->required()->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", opt.seed, "Random seed (default 1)");
    simulate_cmd->add_option("--out", opt.out_file, "Output CSV (default simulated.csv)");
    simulate_cmd->add_option("--out-dir", opt.out_dir, "Directory for output files");
    simulate_cmd->add_option("--environments", opt.environments, "Write this many environments with an env column");
    simulate_cmd->add_option("--env-column", opt.env_column, "Name of the environment column");
    simulate_cmd->add_flag("--equilibrium", opt.equilibrium,
                           "Solve X = Theta X + Psi directly; accepts cyclic models");

    auto* ancestors_cmd = app.add_subcommand("ancestors", "Test every variable for being an ancestor of a target");
    ancestors_cmd->add_option("data", opt.inputs, "CSV file(s)")->required();
    ancestors_cmd->add_option("--target", opt.target, "Target column name or 1-based index")->required();
    add_analysis_flags(ancestors_cmd);

    auto* graph_cmd = app.add_subcommand("graph", "Estimate all ancestor sets and the model-check level");
    graph_cmd->add_option("data", opt.inputs, "CSV file(s), one per environment or split by --env-column")
        ->required();
    add_analysis_flags(graph_cmd);

    auto* parents_cmd = app.add_subcommand("parents", "t-tests of a target on its (claimed) ancestors");
    parents_cmd->add_option("data", opt.inputs, "CSV file(s)")->required();
    parents_cmd->add_option("--target", opt.target, "Target column name or 1-based index")->required();
    parents_cmd->add_option("--ancestors", opt.ancestors, "Comma-separated ancestors (default: estimated)");
    add_analysis_flags(parents_cmd);

    auto* study_cmd = app.add_subcommand("study", "Run a simulation study from a study file");
    study_cmd->add_option("config", opt.inputs, "Study file")->required()->expected(1);
    study_cmd->add_option("--out-dir", opt.out_dir, "Directory for output files");
    study_cmd->add_option("--seed", opt.seed, "Override the study seed");
    study_cmd->add_option("--threads", opt.threads, "Worker threads");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const Context ctx{args, out, err};
    try {
        if (*simulate_cmd) return cmd_simulate(ctx, opt);
        if (*ancestors_cmd) return cmd_ancestors(ctx, opt);
        if (*graph_cmd) return cmd_graph(ctx, opt);
        if (*parents_cmd) return cmd_parents(ctx, opt);
        if (*study_cmd) return cmd_study(ctx, opt);
    } catch (const ShapeError& e) {
        err << "error: " << e.what()
            << "\nhint: ancestor regression needs more rows than columns (n > p); add samples or drop columns\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace ancreg
