#include "ancreg/multiple_testing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ancreg/errors.hpp"

namespace ancreg {

std::vector<double> holm(std::span<const double> p_values, bool cap) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("p-values must lie in [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> corrected(m);
    double running = 0.0;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const std::size_t idx = order[rank];
        running = std::max(running, static_cast<double>(m - rank) * p_values[idx]);
        corrected[idx] = cap ? std::min(running, 1.0) : running;
    }
    return corrected;
}

CorrectedPValues correct_scans(std::span<const AncestorScan> scans, bool cap) {
    const std::size_t p = scans.size();
    std::vector<bool> covered(p, false);
    CorrectedPValues out;
    out.capped = cap;
    std::vector<double> raw;
    for (const auto& scan : scans) {
        if (scan.target >= p || covered[scan.target] || static_cast<std::size_t>(scan.p_raw.size()) != p) {
            throw InvalidInput("need exactly one scan per node, each over all p columns");
        }
        covered[scan.target] = true;
        for (std::size_t k = 0; k < p; ++k) {
            if (k == scan.target) continue;
            const double value = scan.p_raw(static_cast<Eigen::Index>(k));
            out.entries.push_back({scan.target, k, value, 1.0});
            raw.push_back(value);
        }
    }
    const auto corrected = holm(raw, cap);
    for (std::size_t i = 0; i < corrected.size(); ++i) {
        out.entries[i].corrected_p = corrected[i];
    }
    return out;
}

PMatrix assemble_pmatrix(std::span<const AncestorScan> scans, bool cap) {
    const auto corrected = correct_scans(scans, cap);
    const auto p = static_cast<Eigen::Index>(scans.size());
    Eigen::MatrixXd values = Eigen::MatrixXd::Identity(p, p);
    for (const auto& e : corrected.entries) {
        values(static_cast<Eigen::Index>(e.target), static_cast<Eigen::Index>(e.candidate)) = e.corrected_p;
    }
    return PMatrix(std::move(values));
}

}  // namespace ancreg
