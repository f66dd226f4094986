#include "ancreg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "ancreg/errors.hpp"
#include "ancreg/multiple_testing.hpp"
#include "ancreg/rng.hpp"

namespace ancreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Heteroskedasticity-robust (HC0) standard errors of least squares
// coefficients, given the design and the fitted residuals.
Eigen::VectorXd sandwich_errors(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals) {
    const Eigen::MatrixXd gram = x.transpose() * x;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::MatrixXd scored = x.array().colwise() * residuals.array();
    const Eigen::MatrixXd meat = scored.transpose() * scored;
    const Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    return (bread * meat * bread).diagonal().cwiseMax(0.0).cwiseSqrt();
}

NodeSet all_but(std::size_t p, std::size_t node) {
    NodeSet out;
    for (std::size_t k = 0; k < p; ++k) {
        if (k != node) out.push_back(k);
    }
    return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const NodeSet& cols) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(cols[i]));
    }
    return out;
}

// beta via the normal equations on one sample, robust errors.
void normal_equation_route(const Eigen::MatrixXd& x, const Eigen::VectorXd& fx, PopulationBeta& out) {
    const OlsFit fit = ols(fx, x);
    out.beta = fit.beta;
    out.mc_error = sandwich_errors(x, fit.residuals);
}

// beta_k = E(Z_k W_k) / E(Z_k^2) with Z_k, W_k the residuals of x_k and
// f(x_j) on the remaining columns; influence function Z_k * e with e the
// full-model residual.
void partial_regression_route(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram, const Eigen::VectorXd& fx,
                              PopulationBeta& out) {
    const Eigen::Index p = x.cols();
    const Eigen::VectorXd cross = x.transpose() * fx;
    out.partial_beta.resize(p);
    out.partial_error.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const NodeSet others = all_but(static_cast<std::size_t>(p), static_cast<std::size_t>(k));
        Eigen::MatrixXd s_oo(p - 1, p - 1);
        Eigen::VectorXd s_ok(p - 1);
        Eigen::VectorXd c_o(p - 1);
        for (Eigen::Index a = 0; a < p - 1; ++a) {
            const auto ia = static_cast<Eigen::Index>(others[static_cast<std::size_t>(a)]);
            s_ok(a) = gram(ia, k);
            c_o(a) = cross(ia);
            for (Eigen::Index b = 0; b < p - 1; ++b) {
                s_oo(a, b) = gram(ia, static_cast<Eigen::Index>(others[static_cast<std::size_t>(b)]));
            }
        }
        Eigen::VectorXd z = x.col(k);
        Eigen::VectorXd w = fx;
        if (p > 1) {
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(s_oo);
            const Eigen::MatrixXd x_o = select_columns(x, others);
            z -= x_o * ldlt.solve(s_ok);
            w -= x_o * ldlt.solve(c_o);
        }
        const double zz = z.squaredNorm();
        const double b = z.dot(w) / zz;
        const Eigen::VectorXd e = w - b * z;
        out.partial_beta(k) = b;
        out.partial_error(k) = std::sqrt((z.array() * e.array()).square().sum()) / zz;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

SemSpec reference_spec() {
    SemSpec spec(6);
    spec.add_edge(0, 1, 0.9).add_edge(0, 2, 0.6).add_edge(1, 3, 0.8);
    spec.add_edge(2, 3, 0.9).add_edge(3, 5, 0.7).add_edge(4, 5, 0.7);
    const double sigma[6] = {1.0, 0.5, 0.5, 1.0, 1.0, 0.5};
    for (std::size_t j = 0; j < 5; ++j) {
        spec.noise[j] = NoiseSpec::uniform(sigma[j]);
    }
    spec.noise[5] = NoiseSpec::gaussian(sigma[5]);
    return spec;
}

SemSpec two_gaussian_spec() {
    SemSpec spec = reference_spec();
    spec.noise[4] = NoiseSpec::gaussian(spec.noise[4].sigma);
    return spec;
}

SemSpec cyclic_pair_spec() {
    SemSpec spec(2);
    spec.add_edge(0, 1, 0.8).add_edge(1, 0, 0.5);
    spec.noise = {NoiseSpec::uniform(1.0), NoiseSpec::uniform(0.7)};
    return spec;
}

SemSpec builtin_spec(const std::string& name) {
    if (name == "reference") return reference_spec();
    if (name == "two_gaussian") return two_gaussian_spec();
    if (name == "cyclic_pair") return cyclic_pair_spec();
    for (auto& fixture : adversarial_fixtures()) {
        if (fixture.name == name) return fixture.spec;
    }
    throw InvalidInput("unknown built-in model '" + name + "'");
}

std::vector<Fixture> adversarial_fixtures() {
    std::vector<Fixture> out;
    {
        // 1 -> 2 -> 3; every path from 1 starts with a Gaussian-Gaussian edge.
        SemSpec spec(3);
        spec.add_edge(0, 1, 0.8).add_edge(1, 2, 0.9);
        spec.noise = {NoiseSpec::gaussian(1.0), NoiseSpec::gaussian(0.7), NoiseSpec::uniform(0.6)};
        out.push_back({"gaussian_path",
                       "chain 1 -> 2 -> 3 with Gaussian errors on 1 and 2: node 1 is invisible as an ancestor",
                       std::move(spec),
                       {{0, 1}, {0, 2}}});
    }
    {
        // 1 -> 2 -> 3 with Psi_2 distributed exactly like theta_21 Psi_1.
        SemSpec spec(3);
        spec.add_edge(0, 1, 0.8).add_edge(1, 2, 0.9);
        spec.noise = {NoiseSpec::uniform(1.0), NoiseSpec::uniform(0.8), NoiseSpec::shifted_exponential(0.6)};
        out.push_back({"matched_child",
                       "chain 1 -> 2 -> 3 where the error of 2 matches the contribution it inherits from 1",
                       std::move(spec),
                       {{0, 1}, {0, 2}}});
    }
    out.push_back({"two_gaussian",
                   "reference graph with Gaussian errors on nodes 5 and 6",
                   two_gaussian_spec(),
                   {{4, 5}}});
    return out;
}

SemSpec random_sem(std::size_t p, double edge_prob, std::uint64_t seed) {
    Engine engine = make_engine(seed);
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), engine);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    std::uniform_real_distribution<double> scale(0.5, 1.5);
    std::uniform_int_distribution<int> family(0, 3);

    SemSpec spec(p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            if (unit(engine) < edge_prob) {
                const double sign = unit(engine) < 0.5 ? -1.0 : 1.0;
                spec.add_edge(order[a], order[b], sign * magnitude(engine));
            }
        }
    }
    for (auto& noise : spec.noise) {
        const double sigma = scale(engine);
        switch (family(engine)) {
        case 0: noise = NoiseSpec::gaussian(sigma); break;
        case 1: noise = NoiseSpec::uniform(sigma); break;
        case 2: noise = NoiseSpec::laplace(sigma); break;
        default: noise = NoiseSpec::shifted_exponential(sigma); break;
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------

void check_moments(const SemSpec& spec, std::size_t target, Nonlinearity f) {
    const auto truth = ground_truth(spec);
    if (target >= spec.p()) {
        throw InvalidInput("target out of range");
    }
    const int order = required_moment(f);
    auto feeds_target = truth.ancestors[target];
    feeds_target.push_back(target);
    for (std::size_t l : feeds_target) {
        if (!spec.noise[l].has_moment(order)) {
            throw MomentError("error term of node " + std::to_string(l + 1) + " lacks the moment of order " +
                              std::to_string(order) + " needed for E f(X_j)^2 < inf");
        }
    }
    for (std::size_t l = 0; l < spec.p(); ++l) {
        if (!spec.noise[l].has_moment(4)) {
            throw MomentError("error term of node " + std::to_string(l + 1) + " lacks a fourth moment");
        }
    }
}

double PopulationBeta::max_disagreement() const {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < beta.size(); ++k) {
        const double joint = std::hypot(mc_error(k), partial_error(k));
        worst = std::max(worst, std::fabs(beta(k) - partial_beta(k)) / joint);
    }
    return worst;
}

std::vector<PopulationBeta> population_beta_oracle_all(const SemSpec& spec, Nonlinearity f, std::size_t mc_n,
                                                       std::uint64_t seed) {
    for (std::size_t j = 0; j < spec.p(); ++j) {
        check_moments(spec, j, f);
    }
    const Eigen::MatrixXd first = simulate(spec, mc_n, derive_seed(seed, {0})).values();
    const Eigen::MatrixXd second = simulate(spec, mc_n, derive_seed(seed, {1})).values();
    const Eigen::MatrixXd second_gram = second.transpose() * second;

    std::vector<PopulationBeta> out(spec.p());
    for (std::size_t j = 0; j < spec.p(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        out[j].target = j;
        out[j].mc_n = mc_n;
        normal_equation_route(first, apply_nonlinearity(f, first.col(col)), out[j]);
        partial_regression_route(second, second_gram, apply_nonlinearity(f, second.col(col)), out[j]);
    }
    return out;
}

PopulationBeta population_beta_oracle(const SemSpec& spec, std::size_t target, Nonlinearity f, std::size_t mc_n,
                                      std::uint64_t seed) {
    check_moments(spec, target, f);
    const Eigen::MatrixXd first = simulate(spec, mc_n, derive_seed(seed, {0})).values();
    const Eigen::MatrixXd second = simulate(spec, mc_n, derive_seed(seed, {1})).values();
    const auto col = static_cast<Eigen::Index>(target);
    PopulationBeta out;
    out.target = target;
    out.mc_n = mc_n;
    normal_equation_route(first, apply_nonlinearity(f, first.col(col)), out);
    partial_regression_route(second, second.transpose() * second, apply_nonlinearity(f, second.col(col)), out);
    return out;
}

double ResidualRep::max_outside_boundary() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < others.size(); ++i) {
        if (std::binary_search(markov_boundary.begin(), markov_boundary.end(), others[i])) continue;
        const auto a = static_cast<Eigen::Index>(i);
        worst = std::max(worst, std::fabs(gamma(a)) / gamma_error(a));
    }
    return worst;
}

ResidualRep residual_representation(const SemSpec& spec, std::size_t node, std::size_t mc_n, std::uint64_t seed,
                                    std::optional<std::size_t> target, Nonlinearity f) {
    if (node >= spec.p()) {
        throw InvalidInput("node out of range");
    }
    const auto truth = ground_truth(spec);
    check_moments(spec, target.value_or(node), f);

    const Eigen::MatrixXd x = simulate(spec, mc_n, seed).values();
    ResidualRep rep;
    rep.node = node;
    rep.others = all_but(spec.p(), node);
    rep.markov_boundary = markov_boundary(truth, node);
    const Eigen::MatrixXd x_o = select_columns(x, rep.others);
    const Eigen::VectorXd x_k = x.col(static_cast<Eigen::Index>(node));

    if (x_o.cols() > 0) {
        const OlsFit fit = ols(x_k, x_o);
        rep.gamma = fit.beta;
        rep.gamma_error = sandwich_errors(x_o, fit.residuals);
        rep.z_samples = fit.residuals;
    } else {
        rep.z_samples = x_k;
    }

    if (target) {
        const Eigen::VectorXd fx = apply_nonlinearity(f, x.col(static_cast<Eigen::Index>(*target)));
        if (x_o.cols() > 0) {
            const OlsFit fit = ols(fx, x_o);
            rep.zeta = fit.beta;
            rep.w_samples = fit.residuals;
        } else {
            rep.w_samples = fx;
        }
        const Eigen::ArrayXd prod = rep.z_samples.array() * fx.array();
        const double n = static_cast<double>(prod.size());
        rep.zf_mean = prod.mean();
        rep.zf_error = std::sqrt((prod - rep.zf_mean).square().sum() / (n - 1.0) / n);
    }
    return rep;
}

// ---------------------------------------------------------------------------

void StudyConfig::validate() const {
    spec.check_shape();
    (void)validate_dag(spec.theta);
    if (runs < 1) {
        throw InvalidInput("runs must be at least 1");
    }
    if (sample_sizes.empty()) {
        throw InvalidInput("at least one sample size is required");
    }
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        if (sample_sizes[i] <= spec.p()) {
            throw InvalidInput("every sample size must exceed the number of variables");
        }
        if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
            throw InvalidInput("sample sizes must be strictly increasing");
        }
    }
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i]) || (i > 0 && alphas[i] <= alphas[i - 1])) {
            throw InvalidInput("alpha grid must be positive and strictly increasing");
        }
    }
    if (!(reference_alpha > 0.0)) {
        throw InvalidInput("reference alpha must be positive");
    }
    if (kind == StudyKind::Ancestor && (!target || *target >= spec.p())) {
        throw InvalidInput("ancestor studies need a target node within the model");
    }
    if (threads < 1) {
        throw InvalidInput("threads must be at least 1");
    }
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 26; ++i) {
        grid.push_back(std::pow(10.0, -6.0 + 0.25 * i));  // 1e-6 .. ~3.2
    }
    grid.erase(std::remove_if(grid.begin(), grid.end(), [](double a) { return a > 2.0; }), grid.end());
    const double nominal[] = {0.01, 0.05, 0.1, 1.0, 2.0};
    grid.insert(grid.end(), std::begin(nominal), std::end(nominal));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::fabs(a - b) < 1e-12 * b; }),
               grid.end());
    return grid;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

namespace {

struct RunOutcome {
    Eigen::VectorXd abs_z;
    std::vector<bool> false_claim;  // per alpha
    std::vector<double> detected;   // per alpha
    bool false_at_reference = false;
    double detected_at_reference = 0.0;
    Eigen::MatrixXd claimed;  // p x p indicator at reference alpha
    double alpha_hat = kNaN;
};

StudyResult empty_result(const StudyConfig& config) {
    StudyResult r;
    r.kind = config.kind;
    r.scenario = config.scenario;
    r.sample_sizes = config.sample_sizes;
    r.alphas = config.alphas.empty() ? default_alpha_grid() : config.alphas;
    r.runs = config.runs;
    r.reference_alpha = config.reference_alpha;
    r.target = config.target;
    r.p = config.spec.p();
    for (std::size_t j = 0; j < r.p; ++j) r.names.push_back(config.spec.name(j));
    const auto sizes = static_cast<Eigen::Index>(config.sample_sizes.size());
    r.fwer = Eigen::MatrixXd::Zero(sizes, static_cast<Eigen::Index>(r.alphas.size()));
    r.power = Eigen::MatrixXd::Zero(sizes, static_cast<Eigen::Index>(r.alphas.size()));
    return r;
}

void aggregate(StudyResult& result, std::size_t size_index, const std::vector<RunOutcome>& runs) {
    const auto s = static_cast<Eigen::Index>(size_index);
    const double count = static_cast<double>(runs.size());
    const auto p = static_cast<Eigen::Index>(result.p);
    Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(p, p);
    double fwer_ref = 0.0;
    double detected_ref = 0.0;
    std::vector<double> hats;
    for (const auto& run : runs) {
        for (std::size_t a = 0; a < result.alphas.size(); ++a) {
            const auto ai = static_cast<Eigen::Index>(a);
            result.fwer(s, ai) += run.false_claim[a] ? 1.0 : 0.0;
            result.power(s, ai) += run.detected[a];
        }
        if (run.abs_z.size() > 0) result.mean_abs_z.row(s) += run.abs_z.transpose();
        fwer_ref += run.false_at_reference ? 1.0 : 0.0;
        detected_ref += run.detected_at_reference;
        rate += run.claimed;
        hats.push_back(run.alpha_hat);
    }
    result.fwer.row(s) /= count;
    result.power.row(s) /= count;
    if (result.mean_abs_z.size() > 0) result.mean_abs_z.row(s) /= count;
    result.fwer_at_reference.push_back(fwer_ref / count);
    result.detected_fraction.push_back(detected_ref / count);
    result.relation_rate.push_back(rate / count);
    result.alpha_hat.push_back(std::move(hats));
}

}  // namespace

StudyResult run_ancestor_study(const StudyConfig& config) {
    config.validate();
    if (config.kind != StudyKind::Ancestor) {
        throw InvalidInput("run_ancestor_study needs an ancestor study config");
    }
    StudyResult result = empty_result(config);
    const std::size_t target = *config.target;
    const auto truth = ground_truth(config.spec);
    const auto p = static_cast<Eigen::Index>(config.spec.p());
    result.mean_abs_z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.sample_sizes.size()), p);
    const std::size_t true_count = truth.ancestors[target].size();

    for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
        const std::size_t n = config.sample_sizes[si];
        std::vector<RunOutcome> outcomes(config.runs);
        parallel_for(config.runs, config.threads, [&](std::size_t run) {
            const DataMatrix data = simulate(config.spec, n, derive_seed(config.seed, {n, run}));
            const AncestorScan scan = ancestor_scan(data, target, ScanOptions{config.f, config.center});
            const auto candidates = scan.candidates();
            const auto corrected = holm(scan.candidate_pvalues(), config.cap);

            RunOutcome out;
            out.abs_z = scan.z.cwiseAbs();
            out.abs_z(static_cast<Eigen::Index>(target)) = 0.0;
            out.claimed = Eigen::MatrixXd::Zero(p, p);
            auto evaluate = [&](double alpha, bool& any_false, double& detected, bool record) {
                std::size_t hits = 0;
                any_false = false;
                for (std::size_t i = 0; i < candidates.size(); ++i) {
                    if (!(corrected[i] < alpha)) continue;
                    if (truth.is_ancestor(candidates[i], target)) {
                        ++hits;
                    } else {
                        any_false = true;
                    }
                    if (record) {
                        out.claimed(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(candidates[i])) = 1.0;
                    }
                }
                detected = true_count == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(true_count);
            };
            out.false_claim.resize(result.alphas.size());
            out.detected.resize(result.alphas.size());
            for (std::size_t a = 0; a < result.alphas.size(); ++a) {
                bool any_false = false;
                evaluate(result.alphas[a], any_false, out.detected[a], false);
                out.false_claim[a] = any_false;
            }
            evaluate(config.reference_alpha, out.false_at_reference, out.detected_at_reference, true);
            outcomes[run] = std::move(out);
        });
        aggregate(result, si, outcomes);
    }
    result.mean_abs_z.col(static_cast<Eigen::Index>(target)).setConstant(kNaN);
    return result;
}

StudyResult run_graph_study(const StudyConfig& config) {
    config.validate();
    if (config.kind != StudyKind::Graph) {
        throw InvalidInput("run_graph_study needs a graph study config");
    }
    StudyResult result = empty_result(config);
    const auto truth = ground_truth(config.spec);
    const std::size_t p = config.spec.p();
    const double relations = static_cast<double>(truth.relation_count());

    for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
        const std::size_t n = config.sample_sizes[si];
        std::vector<RunOutcome> outcomes(config.runs);
        parallel_for(config.runs, config.threads, [&](std::size_t run) {
            const DataMatrix data = simulate(config.spec, n, derive_seed(config.seed, {n, run}));
            const auto scans = scan_all(data, ScanOptions{config.f, config.center});
            const PMatrix pm = assemble_pmatrix(scans, config.cap);

            auto evaluate = [&](const StructureFit& fit, bool& any_false, double& detected) {
                std::size_t hits = 0;
                any_false = false;
                for (std::size_t j = 0; j < p; ++j) {
                    for (std::size_t k = 0; k < p; ++k) {
                        if (!fit.adjacency(j, k)) continue;
                        if (truth.is_ancestor(k, j)) ++hits; else any_false = true;
                    }
                }
                detected = relations == 0.0 ? 0.0 : static_cast<double>(hits) / relations;
            };
            RunOutcome out;
            out.false_claim.resize(result.alphas.size());
            out.detected.resize(result.alphas.size());
            for (std::size_t a = 0; a < result.alphas.size(); ++a) {
                bool any_false = false;
                evaluate(find_structure(pm, result.alphas[a]), any_false, out.detected[a]);
                out.false_claim[a] = any_false;
            }
            const StructureFit reference = find_structure(pm, config.reference_alpha);
            evaluate(reference, out.false_at_reference, out.detected_at_reference);
            out.alpha_hat = reference.alpha_hat;
            out.claimed = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
            for (std::size_t j = 0; j < p; ++j) {
                for (std::size_t k = 0; k < p; ++k) {
                    if (reference.adjacency(j, k)) {
                        out.claimed(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
                    }
                }
            }
            outcomes[run] = std::move(out);
        });
        aggregate(result, si, outcomes);
    }
    return result;
}

StudyResult run_study(const StudyConfig& config) {
    return config.kind == StudyKind::Ancestor ? run_ancestor_study(config) : run_graph_study(config);
}

}  // namespace ancreg
