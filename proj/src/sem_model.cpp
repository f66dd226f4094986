#include "ancreg/sem_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "ancreg/config_text.hpp"
#include "ancreg/errors.hpp"

namespace ancreg {

namespace {

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// succ[u] lists v with an edge u -> v, ascending.
std::vector<NodeSet> successors(const Eigen::MatrixXd& theta) {
    const auto p = static_cast<std::size_t>(theta.rows());
    std::vector<NodeSet> succ(p);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t j = 0; j < p; ++j) {
            if (theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != 0.0) {
                succ[k].push_back(j);
            }
        }
    }
    return succ;
}

// Can `target` be reached from `from` without entering a node in `blocked`?
bool reaches(const std::vector<NodeSet>& succ, std::size_t from, std::size_t target,
             const std::vector<bool>& blocked) {
    std::vector<bool> seen(succ.size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v : succ[u]) {
            if (v == target) {
                return true;
            }
            if (!seen[v] && !blocked[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return false;
}

// Lexicographically smallest simple cycle, written from its smallest node.
std::vector<std::size_t> smallest_cycle(const std::vector<NodeSet>& succ) {
    const std::size_t p = succ.size();
    for (std::size_t start = 0; start < p; ++start) {
        std::vector<bool> none(p, false);
        if (!reaches(succ, start, start, none)) {
            continue;
        }
        std::vector<std::size_t> cycle{start};
        std::vector<bool> used(p, false);
        used[start] = true;
        std::size_t current = start;
        while (true) {
            const auto& next = succ[current];
            if (std::find(next.begin(), next.end(), start) != next.end()) {
                cycle.push_back(start);
                return cycle;
            }
            // Smallest unused successor from which start is still reachable.
            for (std::size_t v : next) {
                if (!used[v] && v > start && reaches(succ, v, start, used)) {
                    used[v] = true;
                    cycle.push_back(v);
                    current = v;
                    break;
                }
            }
        }
    }
    return {};
}

}  // namespace

void NoiseSpec::validate() const {
    if (!std::isfinite(sigma) || sigma <= 0.0) {
        throw std::invalid_argument("noise sigma must be finite and positive");
    }
    if (family == NoiseFamily::StudentT && !(df > 2.0 && std::isfinite(df))) {
        throw std::invalid_argument("student_t noise needs df > 2 for a finite variance");
    }
}

bool NoiseSpec::has_moment(int order) const noexcept {
    if (family == NoiseFamily::StudentT) {
        return df > static_cast<double>(order);
    }
    return true;
}

void NoiseSpec::sample(Engine& engine, Eigen::Ref<Eigen::VectorXd> out) const {
    switch (family) {
    case NoiseFamily::Gaussian: {
        std::normal_distribution<double> dist(0.0, sigma);
        for (auto& v : out) v = dist(engine);
        break;
    }
    case NoiseFamily::Uniform: {
        const double half_width = sigma * std::numbers::sqrt3;
        std::uniform_real_distribution<double> dist(-half_width, half_width);
        for (auto& v : out) v = dist(engine);
        break;
    }
    case NoiseFamily::Laplace: {
        // Laplace(0, b) has variance 2 b^2.
        const double b = sigma / std::numbers::sqrt2;
        std::exponential_distribution<double> dist(1.0);
        for (auto& v : out) v = b * (dist(engine) - dist(engine));
        break;
    }
    case NoiseFamily::StudentT: {
        std::student_t_distribution<double> dist(df);
        const double scale = sigma * std::sqrt((df - 2.0) / df);
        for (auto& v : out) v = scale * dist(engine);
        break;
    }
    case NoiseFamily::ShiftedExponential: {
        std::exponential_distribution<double> dist(1.0);
        for (auto& v : out) v = sigma * (dist(engine) - 1.0);
        break;
    }
    }
}

std::string noise_family_name(const NoiseSpec& noise) {
    switch (noise.family) {
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::Laplace: return "laplace";
    case NoiseFamily::StudentT: {
        return "student_t(" + format_double(noise.df) + ")";
    }
    case NoiseFamily::ShiftedExponential: return "shifted_exponential";
    }
    return "unknown";
}

SemSpec::SemSpec(std::size_t p)
    : theta(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))),
      noise(p, NoiseSpec::gaussian()) {}

std::string SemSpec::name(std::size_t node) const {
    if (node < names.size()) {
        return names[node];
    }
    return "X" + std::to_string(node + 1);
}

SemSpec& SemSpec::add_edge(std::size_t from, std::size_t to, double weight) {
    if (from >= p() || to >= p()) {
        throw std::out_of_range("edge endpoint out of range");
    }
    if (from == to) {
        throw std::invalid_argument("self loops are not allowed");
    }
    theta(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = weight;
    return *this;
}

void SemSpec::check_shape() const {
    const auto p_ = static_cast<Eigen::Index>(p());
    if (theta.rows() != p_ || theta.cols() != p_) {
        throw std::invalid_argument("theta must be p x p with one noise entry per node");
    }
    if (!names.empty() && names.size() != p()) {
        throw std::invalid_argument("names must be empty or list every node");
    }
    if (!theta.allFinite()) {
        throw std::invalid_argument("edge weights must be finite");
    }
    for (Eigen::Index j = 0; j < p_; ++j) {
        if (theta(j, j) != 0.0) {
            throw std::invalid_argument("theta must have a zero diagonal");
        }
    }
    for (const auto& n : noise) {
        n.validate();
    }
}

bool operator==(const SemSpec& a, const SemSpec& b) {
    return same_matrix(a.theta, b.theta) && a.noise == b.noise && a.names == b.names;
}

bool GroundTruth::is_ancestor(std::size_t k, std::size_t j) const {
    const auto& an = ancestors.at(j);
    return std::binary_search(an.begin(), an.end(), k);
}

std::size_t GroundTruth::relation_count() const {
    std::size_t count = 0;
    for (const auto& an : ancestors) {
        count += an.size();
    }
    return count;
}

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
        for (Eigen::Index r = 0; r < values_.rows(); ++r) {
            if (!std::isfinite(values_(r, c))) {
                throw NonFiniteError("non-finite value in data matrix", static_cast<std::size_t>(r) + 1,
                                     static_cast<std::size_t>(c) + 1);
            }
        }
    }
}

DataMatrix DataMatrix::centered() const {
    DataMatrix out;
    out.values_ = values_.rowwise() - values_.colwise().mean();
    return out;
}

bool operator==(const DataMatrix& a, const DataMatrix& b) { return same_matrix(a.values_, b.values_); }

std::vector<std::size_t> validate_dag(const Eigen::MatrixXd& theta) {
    if (theta.rows() != theta.cols()) {
        throw InvalidInput("weight matrix must be square");
    }
    const auto p = static_cast<std::size_t>(theta.rows());
    for (Eigen::Index j = 0; j < theta.rows(); ++j) {
        if (theta(j, j) != 0.0) {
            throw InvalidInput("weight matrix must have a zero diagonal");
        }
    }
    const auto succ = successors(theta);
    std::vector<std::size_t> indegree(p, 0);
    for (const auto& s : succ) {
        for (std::size_t v : s) ++indegree[v];
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t v = 0; v < p; ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    std::vector<std::size_t> order;
    order.reserve(p);
    while (!ready.empty()) {
        const std::size_t u = ready.top();
        ready.pop();
        order.push_back(u);
        for (std::size_t v : succ[u]) {
            if (--indegree[v] == 0) ready.push(v);
        }
    }
    if (order.size() != p) {
        throw CycleError(smallest_cycle(succ));
    }
    return order;
}

GroundTruth ground_truth(const SemSpec& spec) {
    spec.check_shape();
    GroundTruth truth;
    truth.causal_order = validate_dag(spec.theta);
    const std::size_t p = spec.p();
    truth.parents.resize(p);
    truth.children.resize(p);
    truth.ancestors.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) {
            if (spec.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != 0.0) {
                truth.parents[j].push_back(k);
                truth.children[k].push_back(j);
            }
        }
    }
    // Ancestors of j are its parents plus their ancestors; causal order makes
    // every parent's set final before j is visited.
    for (std::size_t j : truth.causal_order) {
        std::vector<bool> mark(p, false);
        for (std::size_t k : truth.parents[j]) {
            mark[k] = true;
            for (std::size_t a : truth.ancestors[k]) mark[a] = true;
        }
        for (std::size_t k = 0; k < p; ++k) {
            if (mark[k]) truth.ancestors[j].push_back(k);
        }
    }
    return truth;
}

MixingMatrix mixing_matrix(const SemSpec& spec) {
    spec.check_shape();
    const auto order = validate_dag(spec.theta);
    const auto p = static_cast<Eigen::Index>(spec.p());
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t node : order) {
        const auto j = static_cast<Eigen::Index>(node);
        omega(j, j) = 1.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            if (spec.theta(j, k) != 0.0) {
                omega.row(j) += spec.theta(j, k) * omega.row(k);
            }
        }
    }
    return {std::move(omega)};
}

NodeSet markov_boundary(const GroundTruth& truth, std::size_t node) {
    std::vector<bool> mark(truth.parents.size(), false);
    for (std::size_t k : truth.parents.at(node)) mark[k] = true;
    for (std::size_t c : truth.children.at(node)) {
        mark[c] = true;
        for (std::size_t co : truth.parents[c]) mark[co] = true;
    }
    mark[node] = false;
    NodeSet out;
    for (std::size_t k = 0; k < mark.size(); ++k) {
        if (mark[k]) out.push_back(k);
    }
    return out;
}

DataMatrix simulate(const SemSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw InvalidInput("sample size must be at least 1");
    }
    spec.check_shape();
    const auto order = validate_dag(spec.theta);
    const auto p = static_cast<Eigen::Index>(spec.p());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
    for (std::size_t node : order) {
        const auto j = static_cast<Eigen::Index>(node);
        Engine engine = make_engine(derive_seed(seed, {node}));
        spec.noise[node].sample(engine, x.col(j));
        for (Eigen::Index k = 0; k < p; ++k) {
            if (spec.theta(j, k) != 0.0) {
                x.col(j) += spec.theta(j, k) * x.col(k);
            }
        }
    }
    return DataMatrix(std::move(x));
}

DataMatrix simulate_equilibrium(const SemSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw InvalidInput("sample size must be at least 1");
    }
    spec.check_shape();
    const auto p = static_cast<Eigen::Index>(spec.p());
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(p, p) - spec.theta;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible()) {
        throw InvalidInput("I - Theta is singular; the linear system has no unique equilibrium");
    }
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(n), p);
    for (std::size_t node = 0; node < spec.p(); ++node) {
        Engine engine = make_engine(derive_seed(seed, {node}));
        spec.noise[node].sample(engine, psi.col(static_cast<Eigen::Index>(node)));
    }
    const Eigen::MatrixXd mixing = lu.inverse();
    return DataMatrix(psi * mixing.transpose());
}

Eigen::MatrixXd implied_covariance(const SemSpec& spec) {
    const auto omega = mixing_matrix(spec).omega;
    Eigen::VectorXd var(static_cast<Eigen::Index>(spec.p()));
    for (std::size_t j = 0; j < spec.p(); ++j) {
        var(static_cast<Eigen::Index>(j)) = spec.noise[j].sigma * spec.noise[j].sigma;
    }
    return omega * var.asDiagonal() * omega.transpose();
}

}  // namespace ancreg
