#pragma once

#include <cstddef>
#include <vector>

#include "ancreg/graph_types.hpp"
#include "ancreg/regression.hpp"

namespace ancreg {

/// Transitive closure: every claimed ancestor's claimed ancestors are added
/// until nothing changes.
[[nodiscard]] Adjacency build_recursive(const Adjacency& a);

/// Nodes j with (j, j) set, i.e. nodes on a directed cycle of a closed relation.
[[nodiscard]] NodeSet cycle_nodes(const Adjacency& a);

struct StructureFit {
    Adjacency adjacency;
    double alpha_hat = 0.0;
    bool tightened = false;  // alpha_hat < alpha
};

/// Thresholds P(j, k) < alpha, closes the relation and, while some nodes sit
/// on cycles, lowers the level to the largest p-value among the qualifying
/// edges inside the cycle nodes and re-solves that block at the lower level.
/// The result is acyclic and transitively closed. `alpha` may exceed 1 for
/// uncapped p-values.
[[nodiscard]] StructureFit find_structure(const PMatrix& p, double alpha);

struct GraphOptions {
    double alpha = 0.05;
    Nonlinearity f = Nonlinearity::Cube;
    bool cap = true;
    bool center = true;
};

struct ClaimedEdge {
    std::size_t ancestor = 0;
    std::size_t target = 0;
    double corrected_p = 1.0;  // may exceed alpha_hat when the claim comes from closure
};

struct GraphResult {
    std::vector<NodeSet> ancestors;
    Adjacency adjacency;
    double alpha = 0.05;
    double alpha_hat = 0.05;
    bool tightened = false;
    bool capped = true;
    Nonlinearity f = Nonlinearity::Cube;
    std::size_t n = 0;
    PMatrix pmatrix;
    std::vector<ClaimedEdge> edges;
    std::vector<AncestorScan> scans;
};

/// Builds a GraphResult from a corrected p-value matrix.
[[nodiscard]] GraphResult graph_from_pmatrix(const PMatrix& p, const GraphOptions& options);

/// Full pipeline: one ancestor scan per node, pooled Holm correction, then
/// find_structure.
[[nodiscard]] GraphResult detect_graph(const DataMatrix& data, const GraphOptions& options = {});

/// alpha_hat of a tightened result, else 1. Only meaningful for capped Holm
/// p-values; throws InvalidInput otherwise.
[[nodiscard]] double model_check_pvalue(const GraphResult& result);

/// All scans of a data set, node by node.
[[nodiscard]] std::vector<AncestorScan> scan_all(const DataMatrix& data, const ScanOptions& options);

}  // namespace ancreg
