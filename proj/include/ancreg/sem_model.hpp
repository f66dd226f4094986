#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ancreg/rng.hpp"

namespace ancreg {

using NodeSet = std::vector<std::size_t>;

enum class NoiseFamily {
    Gaussian,
    Uniform,
    Laplace,
    StudentT,
    ShiftedExponential,
};

/// Distribution of one structural error term. Every family is standardized
/// to mean zero and standard deviation `sigma`.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::Gaussian;
    double sigma = 1.0;
    double df = 0.0;  // student_t only; must exceed 2 for a finite variance

    static NoiseSpec gaussian(double sigma = 1.0) { return {NoiseFamily::Gaussian, sigma, 0.0}; }
    static NoiseSpec uniform(double sigma = 1.0) { return {NoiseFamily::Uniform, sigma, 0.0}; }
    static NoiseSpec laplace(double sigma = 1.0) { return {NoiseFamily::Laplace, sigma, 0.0}; }
    static NoiseSpec student_t(double df, double sigma = 1.0) { return {NoiseFamily::StudentT, sigma, df}; }
    static NoiseSpec shifted_exponential(double sigma = 1.0) {
        return {NoiseFamily::ShiftedExponential, sigma, 0.0};
    }

    /// Throws std::invalid_argument unless sigma > 0 (finite) and df > 2 for student_t.
    void validate() const;

    /// True when E|Psi|^order is finite.
    [[nodiscard]] bool has_moment(int order) const noexcept;
    [[nodiscard]] bool has_sixth_moment() const noexcept { return has_moment(6); }
    [[nodiscard]] bool is_gaussian() const noexcept { return family == NoiseFamily::Gaussian; }

    /// Draws `out.size()` values from the standardized distribution.
    void sample(Engine& engine, Eigen::Ref<Eigen::VectorXd> out) const;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Family keyword as used in model files: "gaussian", "uniform", "laplace",
/// "student_t(8)", "shifted_exponential".
[[nodiscard]] std::string noise_family_name(const NoiseSpec& noise);

/// Linear SEM over p nodes. theta(j, k) is the weight of edge k -> j.
struct SemSpec {
    Eigen::MatrixXd theta;
    std::vector<NoiseSpec> noise;
    std::vector<std::string> names;  // empty means X1..Xp

    SemSpec() = default;
    explicit SemSpec(std::size_t p);

    [[nodiscard]] std::size_t p() const noexcept { return noise.size(); }
    [[nodiscard]] std::string name(std::size_t node) const;

    /// Sets the weight of edge `from -> to` (0-based).
    SemSpec& add_edge(std::size_t from, std::size_t to, double weight);

    /// Shape, zero diagonal, finite weights and noise parameters. Acyclicity
    /// is checked separately by validate_dag.
    void check_shape() const;

    friend bool operator==(const SemSpec& a, const SemSpec& b);
};

struct MixingMatrix {
    Eigen::MatrixXd omega;  // X = omega * Psi
};

struct GroundTruth {
    std::vector<NodeSet> parents;
    std::vector<NodeSet> children;
    std::vector<NodeSet> ancestors;
    std::vector<std::size_t> causal_order;

    [[nodiscard]] bool is_ancestor(std::size_t k, std::size_t j) const;
    [[nodiscard]] std::size_t relation_count() const;
};

/// n x p observations, rows i.i.d. samples.
class DataMatrix {
public:
    DataMatrix() = default;
    /// Throws NonFiniteError when any entry is NaN or infinite.
    explicit DataMatrix(Eigen::MatrixXd values);

    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t p() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] auto column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

    /// Copy with every column shifted to sample mean zero.
    [[nodiscard]] DataMatrix centered() const;

    friend bool operator==(const DataMatrix& a, const DataMatrix& b);

private:
    Eigen::MatrixXd values_;
};

/// Topological order of the graph with an edge k -> j wherever theta(j, k) != 0.
/// Ties are broken by ascending node index. Throws CycleError carrying the
/// lexicographically smallest directed cycle.
[[nodiscard]] std::vector<std::size_t> validate_dag(const Eigen::MatrixXd& theta);

[[nodiscard]] GroundTruth ground_truth(const SemSpec& spec);

/// omega = (I - Theta)^{-1}, computed by forward substitution in causal order.
[[nodiscard]] MixingMatrix mixing_matrix(const SemSpec& spec);

/// Parents, children and co-parents of `node`, ascending.
[[nodiscard]] NodeSet markov_boundary(const GroundTruth& truth, std::size_t node);

/// Draws n i.i.d. rows of X. Node j's noise comes from its own stream
/// derived from (seed, j), so the output is a pure function of the inputs.
[[nodiscard]] DataMatrix simulate(const SemSpec& spec, std::size_t n, std::uint64_t seed);

/// Samples the equilibrium X = Theta X + Psi, X = (I - Theta)^{-1} Psi, with
/// the same noise streams as simulate. Theta may contain cycles; throws
/// InvalidInput when I - Theta is singular.
[[nodiscard]] DataMatrix simulate_equilibrium(const SemSpec& spec, std::size_t n, std::uint64_t seed);

/// Closed-form covariance omega * diag(sigma^2) * omega^T.
[[nodiscard]] Eigen::MatrixXd implied_covariance(const SemSpec& spec);

}  // namespace ancreg
