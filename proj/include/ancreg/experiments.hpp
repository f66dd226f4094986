#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ancreg/graph_search.hpp"
#include "ancreg/regression.hpp"
#include "ancreg/sem_model.hpp"

namespace ancreg {

// ---------------------------------------------------------------------------
// Reference models and fixtures

/// Six-node reference graph 1->2, 1->3, 2->4, 3->4, 4->6, 5->6 with uniform
/// errors on nodes 1-5 and a Gaussian error on node 6. Weights and scales
/// are chosen so that no error term matches the inherited contribution of a
/// parent (see the README for the values).
[[nodiscard]] SemSpec reference_spec();
/// Same graph with Gaussian errors on nodes 5 and 6; the 5 -> 6 relation is
/// then not identifiable.
[[nodiscard]] SemSpec two_gaussian_spec();
/// Two nodes feeding each other (1 -> 2 and 2 -> 1). Not a valid SEM; for
/// simulate_equilibrium, to exercise the model check.
[[nodiscard]] SemSpec cyclic_pair_spec();
/// Looks up "reference", "two_gaussian", "cyclic_pair" or a
/// fixture name; throws InvalidInput otherwise.
[[nodiscard]] SemSpec builtin_spec(const std::string& name);

/// A model in which some true ancestor relations have a zero population
/// coefficient. Pairs are (ancestor, target), 0-based.
struct Fixture {
    std::string name;
    std::string description;
    SemSpec spec;
    std::vector<std::pair<std::size_t, std::size_t>> undetectable;
};

/// Gaussian-path fixture, matched-error-distribution fixture and the
/// two-Gaussian variant of the reference graph.
[[nodiscard]] std::vector<Fixture> adversarial_fixtures();

/// Random DAG over a shuffled node order; each forward pair gets an edge with
/// probability `edge_prob`, weight magnitude in [0.5, 1.5] with random sign.
/// Errors are drawn from families with all moments finite.
[[nodiscard]] SemSpec random_sem(std::size_t p, double edge_prob, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Population oracles

/// Throws MomentError unless every error term feeding x_target has the moment
/// order required by f and every error term has a fourth moment.
void check_moments(const SemSpec& spec, std::size_t target, Nonlinearity f);

/// Monte-Carlo estimate of the population coefficient E(XX^T)^{-1} E{X f(X_j)}
/// by two routes on independent samples: the normal equations (`beta`) and
/// the partial-regression ratio E(Z_k W_k) / E(Z_k^2) (`partial_beta`).
/// Standard errors are heteroskedasticity-robust (sandwich) estimates.
struct PopulationBeta {
    std::size_t target = 0;
    Eigen::VectorXd beta;
    Eigen::VectorXd mc_error;
    Eigen::VectorXd partial_beta;
    Eigen::VectorXd partial_error;
    std::size_t mc_n = 0;

    /// max_k |beta_k - partial_beta_k| / sqrt(mc_error_k^2 + partial_error_k^2)
    [[nodiscard]] double max_disagreement() const;
};

[[nodiscard]] PopulationBeta population_beta_oracle(const SemSpec& spec, std::size_t target, Nonlinearity f,
                                                    std::size_t mc_n, std::uint64_t seed);

/// Oracle for every target at once, sharing the two Monte-Carlo samples.
[[nodiscard]] std::vector<PopulationBeta> population_beta_oracle_all(const SemSpec& spec, Nonlinearity f,
                                                                     std::size_t mc_n, std::uint64_t seed);

/// Z_k = X_k - X_{-k}^T gamma_k and, when a target is given,
/// W_k = f(X_j) - X_{-k}^T zeta_k, estimated by least squares on mc_n draws.
struct ResidualRep {
    std::size_t node = 0;
    NodeSet others;  // column order of gamma and zeta
    NodeSet markov_boundary;
    Eigen::VectorXd gamma;
    Eigen::VectorXd gamma_error;
    Eigen::VectorXd zeta;  // empty without a target
    Eigen::VectorXd z_samples;
    Eigen::VectorXd w_samples;  // empty without a target
    double zf_mean = 0.0;       // mean of Z_k f(X_j)
    double zf_error = 0.0;

    /// Largest |gamma| / error over entries outside the Markov boundary.
    [[nodiscard]] double max_outside_boundary() const;
};

[[nodiscard]] ResidualRep residual_representation(const SemSpec& spec, std::size_t node, std::size_t mc_n,
                                                  std::uint64_t seed, std::optional<std::size_t> target = {},
                                                  Nonlinearity f = Nonlinearity::Cube);

// ---------------------------------------------------------------------------
// Simulation studies

enum class StudyKind { Ancestor, Graph };

struct StudyConfig {
    StudyKind kind = StudyKind::Ancestor;
    std::string scenario = "default";
    SemSpec spec;
    std::optional<std::size_t> target;  // required for ancestor studies
    std::vector<std::size_t> sample_sizes;
    std::size_t runs = 200;
    std::vector<double> alphas;  // curve grid, ascending
    double reference_alpha = 0.05;
    Nonlinearity f = Nonlinearity::Cube;
    std::uint64_t seed = 1;
    bool cap = false;  // curves use uncapped Holm p-values
    bool center = true;
    unsigned threads = 1;

    /// Throws InvalidInput describing the first violated constraint.
    void validate() const;
};

/// Log-spaced grid from 1e-6 up to 2 (uncapped levels trace the full curve).
[[nodiscard]] std::vector<double> default_alpha_grid();

struct StudyResult {
    StudyKind kind = StudyKind::Ancestor;
    std::string scenario;
    std::vector<std::size_t> sample_sizes;
    std::vector<double> alphas;
    std::size_t runs = 0;
    double reference_alpha = 0.05;
    std::optional<std::size_t> target;
    std::size_t p = 0;
    std::vector<std::string> names;

    Eigen::MatrixXd mean_abs_z;  // sizes x p (target column NaN); ancestor studies only
    Eigen::MatrixXd fwer;        // sizes x alphas
    Eigen::MatrixXd power;       // sizes x alphas
    std::vector<double> detected_fraction;  // per size, at reference_alpha
    std::vector<double> fwer_at_reference;  // per size
    /// Per size, p x p detection rate of each (target j, ancestor k) at
    /// reference_alpha. Ancestor studies fill only row `target`.
    std::vector<Eigen::MatrixXd> relation_rate;
    /// Per size and run, alpha_hat at reference_alpha (graph studies).
    std::vector<std::vector<double>> alpha_hat;
};

[[nodiscard]] StudyResult run_ancestor_study(const StudyConfig& config);
[[nodiscard]] StudyResult run_graph_study(const StudyConfig& config);
/// Dispatches on config.kind.
[[nodiscard]] StudyResult run_study(const StudyConfig& config);

/// Runs `body(i)` for i in [0, count) on up to `threads` threads. The first
/// exception thrown is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ancreg
