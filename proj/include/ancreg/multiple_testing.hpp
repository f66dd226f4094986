#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ancreg/graph_types.hpp"
#include "ancreg/regression.hpp"

namespace ancreg {

/// Step-down Bonferroni-Holm. The i-th smallest of m p-values (1-based) is
/// multiplied by m - i + 1 and a running maximum keeps the result monotone.
/// Values are capped at 1 only when `cap` is set. Ties keep input order.
/// Throws DomainError on inputs outside [0, 1].
[[nodiscard]] std::vector<double> holm(std::span<const double> p_values, bool cap = true);

struct CorrectedEntry {
    std::size_t target = 0;     // j
    std::size_t candidate = 0;  // k
    double raw_p = 1.0;
    double corrected_p = 1.0;
};

struct CorrectedPValues {
    std::vector<CorrectedEntry> entries;
    bool capped = true;
};

/// Pools the p (p - 1) raw p-values of one scan per node into a single Holm
/// correction. Scans may come in any order but must cover every node once.
[[nodiscard]] CorrectedPValues correct_scans(std::span<const AncestorScan> scans, bool cap = true);

/// P(j, k) = corrected p-value of "k is an ancestor of j", unit diagonal.
[[nodiscard]] PMatrix assemble_pmatrix(std::span<const AncestorScan> scans, bool cap = true);

}  // namespace ancreg
