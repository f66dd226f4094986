#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ancreg/sem_model.hpp"

namespace ancreg {

/// Square matrix of corrected p-values; entry (j, k) belongs to the
/// hypothesis "k is not an ancestor of j". Diagonal exactly 1, off-diagonal
/// entries nonnegative (they may exceed 1 when Holm is left uncapped).
class PMatrix {
public:
    PMatrix() = default;
    /// Throws InvalidInput when the invariants above do not hold.
    explicit PMatrix(Eigen::MatrixXd values);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] double operator()(std::size_t j, std::size_t k) const {
        return values_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }

    /// Principal submatrix on `nodes`, relabelled 0..|nodes|-1 in the given order.
    [[nodiscard]] PMatrix submatrix(const NodeSet& nodes) const;

private:
    Eigen::MatrixXd values_;
};

/// Boolean square matrix; (j, k) set means k is claimed to be an ancestor of j.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(std::size_t size) : size_(size), bits_(size * size, 0) {}

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool operator()(std::size_t j, std::size_t k) const { return bits_[j * size_ + k] != 0; }
    void set(std::size_t j, std::size_t k, bool value = true) { bits_[j * size_ + k] = value ? 1 : 0; }

    [[nodiscard]] std::size_t count() const noexcept;
    /// Ancestors claimed for j, ascending.
    [[nodiscard]] NodeSet row(std::size_t j) const;
    [[nodiscard]] bool has_self_loop() const noexcept;

    friend bool operator==(const Adjacency&, const Adjacency&) = default;

private:
    std::size_t size_ = 0;
    std::vector<std::uint8_t> bits_;
};

}  // namespace ancreg
