#include "ancreg/regression.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "ancreg/errors.hpp"

namespace ancreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Beyond this |z| the tail is evaluated in log space.
constexpr double kDirectTailLimit = 8.0;

// log Q(z) for z > 0 from the Laplace continued fraction
// Q(z) = phi(z) / (z + 1/(z + 2/(z + 3/(z + ...)))).
double log_upper_tail_cf(double z) {
    double frac = z;
    for (int k = 80; k >= 1; --k) {
        frac = z + k / frac;
    }
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(frac);
}

Eigen::MatrixXd centered_columns(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    return x.rowwise() - x.colwise().mean();
}

}  // namespace

std::string nonlinearity_name(Nonlinearity f) {
    switch (f) {
    case Nonlinearity::Cube: return "cube";
    case Nonlinearity::SignedSquare: return "signed_square";
    case Nonlinearity::ScaledTanh: return "tanh";
    case Nonlinearity::Identity: return "identity";
    }
    return "unknown";
}

Nonlinearity parse_nonlinearity(std::string_view name) {
    if (name == "cube") return Nonlinearity::Cube;
    if (name == "signed_square") return Nonlinearity::SignedSquare;
    if (name == "tanh") return Nonlinearity::ScaledTanh;
    if (name == "identity") return Nonlinearity::Identity;
    throw InvalidInput("unknown nonlinearity '" + std::string(name) + "' (expected cube, signed_square or tanh)");
}

Eigen::VectorXd apply_nonlinearity(Nonlinearity f, const Eigen::Ref<const Eigen::VectorXd>& x) {
    switch (f) {
    case Nonlinearity::Cube: return x.array().cube().matrix();
    case Nonlinearity::SignedSquare: return (x.array().sign() * x.array().square()).matrix();
    case Nonlinearity::ScaledTanh: {
        const double n = static_cast<double>(x.size());
        const double mean = x.mean();
        const double sd = std::sqrt((x.array() - mean).square().sum() / std::max(n - 1.0, 1.0));
        const double scale = sd > 0.0 ? sd : 1.0;
        return (x.array() / scale).tanh().matrix();
    }
    case Nonlinearity::Identity: return x;
    }
    return x;
}

int required_moment(Nonlinearity f) {
    switch (f) {
    case Nonlinearity::Cube: return 6;
    case Nonlinearity::SignedSquare: return 4;
    case Nonlinearity::ScaledTanh: return 4;  // bounded f, but the regressors need fourth moments
    case Nonlinearity::Identity: return 4;
    }
    return 6;
}

OlsFit ols(const Eigen::Ref<const Eigen::VectorXd>& response, const Eigen::Ref<const Eigen::MatrixXd>& design) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (response.size() != n) {
        throw ShapeError("response length does not match design rows");
    }
    if (n <= p) {
        throw ShapeError("need more samples than regressors (n = " + std::to_string(n) +
                         ", p = " + std::to_string(p) + ")");
    }
    OlsFit fit;
    fit.df = static_cast<std::size_t>(n - p);
    if (p == 0) {
        fit.residuals = response;
        fit.sigma_sq = response.squaredNorm() / static_cast<double>(n);
        return fit;
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const auto r_diag = qr.matrixR().diagonal().head(p).cwiseAbs();
    const double largest = r_diag.maxCoeff();
    if (!(largest > 0.0) || r_diag.minCoeff() < kRankTolerance * largest) {
        throw RankDeficient("design matrix is numerically rank deficient");
    }
    fit.beta = qr.solve(response);
    fit.residuals = response - design * fit.beta;
    fit.sigma_sq = fit.residuals.squaredNorm() / static_cast<double>(fit.df);

    // (x^T x)^{-1} = P R^{-1} R^{-T} P^T; its diagonal is the squared row norms of R^{-1}.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::VectorXd inv_diag = r_inv.rowwise().squaredNorm();
    const auto& perm = qr.colsPermutation().indices();
    fit.variance.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        fit.variance(perm(i)) = inv_diag(i) * fit.sigma_sq;
    }
    return fit;
}

double pvalue_from_z(double z) {
    const double a = std::fabs(z);
    if (a <= kDirectTailLimit) {
        return std::erfc(a / std::numbers::sqrt2);
    }
    return std::exp(log_pvalue_from_z(a));
}

double log_pvalue_from_z(double z) {
    const double a = std::fabs(z);
    if (std::isinf(a)) {
        return -std::numeric_limits<double>::infinity();
    }
    if (a <= kDirectTailLimit) {
        return std::log(std::erfc(a / std::numbers::sqrt2));
    }
    return std::numbers::ln2 + log_upper_tail_cf(a);
}

double pvalue_from_t(double t, double df) {
    const double a = std::fabs(t);
    if (std::isinf(a)) {
        return 0.0;
    }
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, a)));
}

std::vector<double> AncestorScan::candidate_pvalues() const {
    std::vector<double> out;
    for (Eigen::Index k = 0; k < p_raw.size(); ++k) {
        if (static_cast<std::size_t>(k) != target) out.push_back(p_raw(k));
    }
    return out;
}

std::vector<std::size_t> AncestorScan::candidates() const {
    std::vector<std::size_t> out;
    for (Eigen::Index k = 0; k < p_raw.size(); ++k) {
        if (static_cast<std::size_t>(k) != target) out.push_back(static_cast<std::size_t>(k));
    }
    return out;
}

AncestorScan ancestor_scan(const DataMatrix& data, std::size_t target, const ScanOptions& options) {
    if (target >= data.p()) {
        throw InvalidInput("target column out of range");
    }
    if (data.n() <= data.p()) {
        throw ShapeError("need more samples than variables (n = " + std::to_string(data.n()) +
                         ", p = " + std::to_string(data.p()) + ")");
    }
    const auto j = static_cast<Eigen::Index>(target);
    Eigen::MatrixXd x = options.center ? centered_columns(data.values()) : data.values();
    Eigen::VectorXd y = apply_nonlinearity(options.f, x.col(j));
    const double y_mean = y.mean();
    const double y_var = (y.array() - y_mean).square().mean();
    if (options.center) {
        y.array() -= y_mean;
    }

    const OlsFit fit = ols(y, x);
    if (!(fit.sigma_sq >= kDegenerateTolerance * y_var) || y_var == 0.0) {
        throw DegenerateFit("f(x_" + std::to_string(target + 1) +
                            ") is fitted exactly by the linear model; is f affine?");
    }

    AncestorScan scan;
    scan.target = target;
    scan.f = options.f;
    scan.beta = fit.beta;
    scan.sigma_sq = fit.sigma_sq;
    const Eigen::Index p = x.cols();
    scan.z.resize(p);
    scan.p_raw.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        if (k == j) {
            scan.z(k) = kNaN;
            scan.p_raw(k) = kNaN;
            continue;
        }
        scan.z(k) = fit.beta(k) / std::sqrt(fit.variance(k));
        scan.p_raw(k) = pvalue_from_z(scan.z(k));
    }
    return scan;
}

ParentReport parent_tests(const DataMatrix& data, std::size_t target, const NodeSet& ancestors, bool center) {
    if (ancestors.empty()) {
        throw EmptyAncestors("no ancestors to test for node " + std::to_string(target + 1));
    }
    if (target >= data.p()) {
        throw InvalidInput("target column out of range");
    }
    Eigen::MatrixXd design(static_cast<Eigen::Index>(data.n()), static_cast<Eigen::Index>(ancestors.size()));
    for (std::size_t i = 0; i < ancestors.size(); ++i) {
        if (ancestors[i] == target || ancestors[i] >= data.p()) {
            throw InvalidInput("ancestor set must exclude the target and stay in range");
        }
        design.col(static_cast<Eigen::Index>(i)) = data.column(ancestors[i]);
    }
    Eigen::VectorXd y = data.column(target);
    if (center) {
        design = centered_columns(design);
        y.array() -= y.mean();
    }
    const OlsFit fit = ols(y, design);
    const double y_ss = y.squaredNorm();

    ParentReport report;
    report.target = target;
    report.ancestors_used = ancestors;
    const bool exact = fit.sigma_sq <= kDegenerateTolerance * y_ss / static_cast<double>(y.size());
    for (std::size_t i = 0; i < ancestors.size(); ++i) {
        const double coef = fit.beta(static_cast<Eigen::Index>(i));
        double t = coef / std::sqrt(fit.variance(static_cast<Eigen::Index>(i)));
        if (exact || !std::isfinite(t)) {
            // Exact dependence: the standard error vanishes.
            t = coef == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), coef);
        }
        report.coef.push_back(coef);
        report.t_stat.push_back(t);
        report.p_value.push_back(t == 0.0 && exact ? 1.0 : pvalue_from_t(t, static_cast<double>(fit.df)));
    }
    return report;
}

}  // namespace ancreg
