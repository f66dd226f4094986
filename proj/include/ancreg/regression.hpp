#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ancreg/sem_model.hpp"

namespace ancreg {

/// Nonlinear transform applied to the target before regressing it on all
/// variables.
enum class Nonlinearity {
    Cube,          // x^3
    SignedSquare,  // sign(x) x^2
    ScaledTanh,    // tanh(x / sd(x))
    Identity,      // linear; every scan is an exact fit (DegenerateFit)
};

[[nodiscard]] std::string nonlinearity_name(Nonlinearity f);
/// Throws InvalidInput for unknown names.
[[nodiscard]] Nonlinearity parse_nonlinearity(std::string_view name);
[[nodiscard]] Eigen::VectorXd apply_nonlinearity(Nonlinearity f, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Highest moment of the structural errors needed for E f(X_j)^2 < inf.
[[nodiscard]] int required_moment(Nonlinearity f);

/// Smallest |R_ii| / largest |R_ii| of the pivoted QR below which the design
/// is treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;
/// Residual variance relative to var(f(x_j)) below which the fit is exact.
inline constexpr double kDegenerateTolerance = 1e-12;

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double sigma_sq = 0.0;     // ||residuals||^2 / df
    Eigen::VectorXd variance;  // (x^T x)^{-1}_{kk} * sigma_sq
    std::size_t df = 0;        // n - p
};

/// Least squares through the origin: no centering happens here. Solved by a
/// column-pivoted Householder QR; the Gram matrix is never formed.
/// Throws ShapeError when n <= p and RankDeficient when the design is
/// numerically singular.
[[nodiscard]] OlsFit ols(const Eigen::Ref<const Eigen::VectorXd>& response,
                         const Eigen::Ref<const Eigen::MatrixXd>& design);

/// Two-sided standard normal tail 2 (1 - Phi(|z|)).
[[nodiscard]] double pvalue_from_z(double z);
/// log of pvalue_from_z, finite far beyond the double underflow point.
[[nodiscard]] double log_pvalue_from_z(double z);
/// Two-sided Student t tail probability.
[[nodiscard]] double pvalue_from_t(double t, double df);

struct ScanOptions {
    Nonlinearity f = Nonlinearity::Cube;
    bool center = true;
};

struct AncestorScan {
    std::size_t target = 0;
    Nonlinearity f = Nonlinearity::Cube;
    Eigen::VectorXd beta;   // coefficient of every column, target included
    Eigen::VectorXd z;      // z(target) is NaN
    Eigen::VectorXd p_raw;  // p_raw(target) is NaN
    double sigma_sq = 0.0;

    /// Raw p-values of all k != target, in column order.
    [[nodiscard]] std::vector<double> candidate_pvalues() const;
    [[nodiscard]] std::vector<std::size_t> candidates() const;
};

/// Regresses f(x_target) on every column (x_target included) and turns each
/// other coefficient into a z-statistic and a normal p-value.
/// Throws DegenerateFit when f(x_target) is fitted exactly (f affine).
[[nodiscard]] AncestorScan ancestor_scan(const DataMatrix& data, std::size_t target,
                                         const ScanOptions& options = {});

struct ParentReport {
    std::size_t target = 0;
    NodeSet ancestors_used;
    std::vector<double> coef;
    std::vector<double> t_stat;
    std::vector<double> p_value;
};

/// OLS of x_target on x_ancestors with t-tests on n - |ancestors| degrees of
/// freedom. An exact fit yields infinite t and p = 0.
/// Throws EmptyAncestors for an empty set.
[[nodiscard]] ParentReport parent_tests(const DataMatrix& data, std::size_t target, const NodeSet& ancestors,
                                        bool center = true);

}  // namespace ancreg
