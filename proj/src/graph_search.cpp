#include "ancreg/graph_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ancreg/errors.hpp"
#include "ancreg/multiple_testing.hpp"

namespace ancreg {

PMatrix::PMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) {
        throw InvalidInput("p-value matrix must be square");
    }
    for (Eigen::Index j = 0; j < values_.rows(); ++j) {
        for (Eigen::Index k = 0; k < values_.cols(); ++k) {
            const double v = values_(j, k);
            if (j == k ? v != 1.0 : !(v >= 0.0 && std::isfinite(v))) {
                throw InvalidInput("p-value matrix needs a unit diagonal and finite nonnegative entries");
            }
        }
    }
}

PMatrix PMatrix::submatrix(const NodeSet& nodes) const {
    const auto d = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd out(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            out(a, b) = values_(static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]),
                                static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(b)]));
        }
    }
    return PMatrix(std::move(out));
}

std::size_t Adjacency::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

NodeSet Adjacency::row(std::size_t j) const {
    NodeSet out;
    for (std::size_t k = 0; k < size_; ++k) {
        if ((*this)(j, k)) out.push_back(k);
    }
    return out;
}

bool Adjacency::has_self_loop() const noexcept {
    for (std::size_t j = 0; j < size_; ++j) {
        if ((*this)(j, j)) return true;
    }
    return false;
}

Adjacency build_recursive(const Adjacency& a) {
    const std::size_t d = a.size();
    Adjacency out(d);
    std::vector<std::size_t> stack;
    std::vector<bool> reached(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::fill(reached.begin(), reached.end(), false);
        stack.clear();
        for (std::size_t k = 0; k < d; ++k) {
            if (a(j, k)) {
                reached[k] = true;
                stack.push_back(k);
            }
        }
        // Worklist: absorb the direct claims of every newly reached ancestor.
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            for (std::size_t m = 0; m < d; ++m) {
                if (a(k, m) && !reached[m]) {
                    reached[m] = true;
                    stack.push_back(m);
                }
            }
        }
        for (std::size_t k = 0; k < d; ++k) {
            if (reached[k]) out.set(j, k);
        }
    }
    return out;
}

NodeSet cycle_nodes(const Adjacency& a) {
    NodeSet out;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a(j, j)) out.push_back(j);
    }
    return out;
}

namespace {

StructureFit find_structure_at(const PMatrix& p, double level) {
    const std::size_t d = p.size();
    Adjacency a(d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
            if (j != k && p(j, k) < level) a.set(j, k);
        }
    }
    a = build_recursive(a);
    const NodeSet cyclic = cycle_nodes(a);
    if (cyclic.empty()) {
        return {std::move(a), level, false};
    }

    double lowered = 0.0;
    for (std::size_t j : cyclic) {
        for (std::size_t k : cyclic) {
            if (j != k && p(j, k) < level) lowered = std::max(lowered, p(j, k));
        }
    }
    const StructureFit inner = find_structure_at(p.submatrix(cyclic), lowered);
    for (std::size_t x = 0; x < cyclic.size(); ++x) {
        for (std::size_t y = 0; y < cyclic.size(); ++y) {
            a.set(cyclic[x], cyclic[y], inner.adjacency(x, y));
        }
    }
    a = build_recursive(a);
    if (a.has_self_loop()) {
        throw std::logic_error("find_structure left a directed cycle");
    }
    return {std::move(a), inner.alpha_hat, true};
}

}  // namespace

StructureFit find_structure(const PMatrix& p, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw InvalidInput("significance level must be positive and finite");
    }
    return find_structure_at(p, alpha);
}

std::vector<AncestorScan> scan_all(const DataMatrix& data, const ScanOptions& options) {
    std::vector<AncestorScan> scans;
    scans.reserve(data.p());
    for (std::size_t j = 0; j < data.p(); ++j) {
        scans.push_back(ancestor_scan(data, j, options));
    }
    return scans;
}

GraphResult graph_from_pmatrix(const PMatrix& p, const GraphOptions& options) {
    StructureFit fit = find_structure(p, options.alpha);
    GraphResult result;
    result.alpha = options.alpha;
    result.alpha_hat = fit.alpha_hat;
    result.tightened = fit.tightened;
    result.capped = options.cap;
    result.f = options.f;
    result.pmatrix = p;
    for (std::size_t j = 0; j < p.size(); ++j) {
        result.ancestors.push_back(fit.adjacency.row(j));
        for (std::size_t k : result.ancestors.back()) {
            result.edges.push_back({k, j, p(j, k)});
        }
    }
    result.adjacency = std::move(fit.adjacency);
    return result;
}

GraphResult detect_graph(const DataMatrix& data, const GraphOptions& options) {
    auto scans = scan_all(data, ScanOptions{options.f, options.center});
    GraphResult result = graph_from_pmatrix(assemble_pmatrix(scans, options.cap), options);
    result.n = data.n();
    result.scans = std::move(scans);
    return result;
}

double model_check_pvalue(const GraphResult& result) {
    if (!result.capped) {
        throw InvalidInput("model check needs capped Holm p-values");
    }
    return result.tightened ? result.alpha_hat : 1.0;
}

}  // namespace ancreg
