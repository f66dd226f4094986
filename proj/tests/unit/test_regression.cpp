#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "ancreg/errors.hpp"
#include "ancreg/experiments.hpp"
#include "ancreg/regression.hpp"
#include "ancreg/rng.hpp"
#include "test_support.hpp"

using namespace ancreg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd random_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    Engine engine = make_engine(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < p; ++k) x(i, k) = normal(engine);
    return x;
}

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

// Kolmogorov-Smirnov distance of a sample to the standard normal law.
double ks_distance(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = normal_cdf(sample[i]);
        d = std::max({d, std::fabs(f - static_cast<double>(i) / m), std::fabs(static_cast<double>(i + 1) / m - f)});
    }
    return d;
}

}  // namespace

TEST_CASE("ols of an exact copy of the first column", "[regression]") {
    const Eigen::MatrixXd x = random_design(20, 3, 1);
    const OlsFit fit = ols(x.col(0), x);
    CHECK_THAT(fit.beta(0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(fit.beta(1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(fit.beta(2), WithinAbs(0.0, 1e-12));
    CHECK(fit.sigma_sq < 1e-25);
}

TEST_CASE("ols solves the normal equations of a small design", "[regression]") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 0, 0, 1, 1, 1;
    const Eigen::Vector3d y(1, 2, 3);
    const OlsFit fit = ols(y, x);
    // x^T x = [[2,1],[1,2]], x^T y = (4,5) -> beta = (1,2).
    CHECK_THAT(fit.beta(0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(fit.beta(1), WithinAbs(2.0, 1e-12));
    CHECK(fit.df == 1);
}

TEST_CASE("ols rejects collinear and short designs", "[regression]") {
    Eigen::MatrixXd x = random_design(30, 3, 2);
    x.col(2) = x.col(0);
    CHECK_THROWS_AS(ols(x.col(1), x), RankDeficient);
    const Eigen::MatrixXd square = random_design(3, 3, 3);
    CHECK_THROWS_AS(ols(square.col(0), square), ShapeError);
}

TEST_CASE("ols residuals, noise variance and coefficient variances", "[regression][property]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::MatrixXd x = random_design(60, 4, seed + 10);
        const Eigen::VectorXd y = random_design(60, 1, seed + 1000).col(0) + x.col(1) * 0.3;
        const OlsFit fit = ols(y, x);
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            CHECK(std::fabs(x.col(k).dot(fit.residuals)) <= 1e-8 * x.col(k).norm());
        }
        CHECK_THAT(fit.sigma_sq, WithinRel(fit.residuals.squaredNorm() / 56.0, 1e-12));
        // Explicit inverse as an independent oracle.
        const Eigen::MatrixXd inv = (x.transpose() * x).inverse();
        const Eigen::VectorXd beta = inv * x.transpose() * y;
        CHECK((beta - fit.beta).cwiseAbs().maxCoeff() < 1e-10);
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            CHECK_THAT(fit.variance(k), WithinRel(inv(k, k) * fit.sigma_sq, 1e-9));
        }
    }
}

TEST_CASE("ols is equivariant under column permutations", "[regression][property]") {
    Engine engine = make_engine(77);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::MatrixXd x = random_design(40, 5, seed + 300);
        const Eigen::VectorXd y = x.col(2).array().cube().matrix() + random_design(40, 1, seed).col(0);
        const auto perm = test_support::random_permutation(5, engine);
        Eigen::MatrixXd xp(40, 5);
        for (Eigen::Index i = 0; i < 5; ++i) xp.col(i) = x.col(static_cast<Eigen::Index>(perm[i]));
        const OlsFit a = ols(y, x);
        const OlsFit b = ols(y, xp);
        for (Eigen::Index i = 0; i < 5; ++i) {
            CHECK_THAT(b.beta(i), WithinAbs(a.beta(static_cast<Eigen::Index>(perm[i])), 1e-10));
            CHECK_THAT(b.variance(i), WithinRel(a.variance(static_cast<Eigen::Index>(perm[i])), 1e-9));
        }
    }
}

TEST_CASE("normal p-values", "[regression]") {
    CHECK(pvalue_from_z(0.0) == 1.0);
    CHECK_THAT(pvalue_from_z(1.959964), WithinAbs(0.05, 1e-6));
    CHECK_THAT(pvalue_from_z(-1.959964), WithinAbs(0.05, 1e-6));
    CHECK(pvalue_from_z(10.0) < 1e-20);
    CHECK(pvalue_from_z(10.0) > 0.0);
}

TEST_CASE("normal p-values agree with an independent CDF and stay monotone", "[regression][property]") {
    double previous = 2.0;
    for (double z = 0.0; z <= 37.0; z += 0.01) {
        const double p = pvalue_from_z(z);
        CHECK(p == pvalue_from_z(-z));
        CHECK(p <= previous);
        previous = p;
        const double expected = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), z));
        if (z <= 8.0) {
            CHECK(std::fabs(p - expected) <= 1e-12);
        } else {
            CHECK_THAT(log_pvalue_from_z(z), WithinRel(std::log(expected), 1e-12));
        }
    }
}

TEST_CASE("log p-values stay finite where the p-value underflows", "[regression]") {
    const double lp = log_pvalue_from_z(60.0);
    CHECK(std::isfinite(lp));
    // Mills ratio bound: log Q(z) is within log(1 + 1/z^2) of log(phi(z)/z).
    const double bound = std::log(2.0) - 1800.0 - 0.5 * std::log(2.0 * M_PI) - std::log(60.0);
    CHECK(lp <= bound);
    CHECK(lp >= bound - std::log1p(1.0 / 3600.0) - 1e-12);
    CHECK(pvalue_from_z(60.0) == 0.0);
}

TEST_CASE("t p-values", "[regression]") {
    CHECK_THAT(pvalue_from_t(2.228139, 10), WithinAbs(0.05, 1e-6));
    CHECK_THAT(pvalue_from_t(1.959964, 1e7), WithinAbs(0.05, 1e-6));
    CHECK(pvalue_from_t(std::numeric_limits<double>::infinity(), 5) == 0.0);
    CHECK(pvalue_from_t(0.0, 5) == 1.0);
}

TEST_CASE("ancestor scan output for the reference graph", "[regression]") {
    const DataMatrix data = simulate(reference_spec(), 5000, 11);
    const AncestorScan scan = ancestor_scan(data, 3);
    CHECK(scan.target == 3);
    CHECK(std::isnan(scan.z(3)));
    CHECK(std::isnan(scan.p_raw(3)));
    CHECK(scan.candidates() == std::vector<std::size_t>{0, 1, 2, 4, 5});
    for (std::size_t k : scan.candidates()) {
        const auto i = static_cast<Eigen::Index>(k);
        CHECK(scan.p_raw(i) >= 0.0);
        CHECK(scan.p_raw(i) <= 1.0);
        CHECK(scan.p_raw(i) == pvalue_from_z(scan.z(i)));
    }
}

TEST_CASE("ancestor scan error cases", "[regression]") {
    const DataMatrix data = simulate(reference_spec(), 200, 12);
    CHECK_THROWS_AS(ancestor_scan(data, 6), InvalidInput);
    CHECK_THROWS_AS(ancestor_scan(data, 0, {Nonlinearity::Identity, true}), DegenerateFit);
    CHECK_THROWS_AS(ancestor_scan(data, 0, {Nonlinearity::Identity, false}), DegenerateFit);
    const DataMatrix tiny = simulate(reference_spec(), 6, 12);
    CHECK_THROWS_AS(ancestor_scan(tiny, 0), ShapeError);
    CHECK_THROWS_AS(parse_nonlinearity("square"), InvalidInput);
}

TEST_CASE("non-ancestor z-statistics follow the standard normal law", "[regression][property][slow]") {
    struct Case {
        SemSpec spec;
        std::size_t target;
        std::size_t candidate;
    };
    std::vector<Case> cases = {{reference_spec(), 3, 4}, {reference_spec(), 3, 5},
                               {reference_spec(), 0, 1}};
    {
        // A random model and one of its non-ancestor pairs.
        const SemSpec spec = random_sem(5, 0.5, 4242);
        const auto truth = ground_truth(spec);
        for (std::size_t j = 0; j < 5 && cases.size() < 4; ++j)
            for (std::size_t k = 0; k < 5 && cases.size() < 4; ++k)
                if (k != j && !truth.is_ancestor(k, j)) cases.push_back({spec, j, k});
    }
    const std::size_t runs = 500;
    const double critical = 1.628 / std::sqrt(double(runs));  // KS, level 0.01
    for (const auto& c : cases) {
        std::vector<double> z;
        for (std::size_t run = 0; run < runs; ++run) {
            const DataMatrix data = simulate(c.spec, 10000, derive_seed(99, {c.target, c.candidate, run}));
            z.push_back(ancestor_scan(data, c.target).z(static_cast<Eigen::Index>(c.candidate)));
        }
        INFO("target " << c.target << " candidate " << c.candidate);
        CHECK(ks_distance(z) < critical);
    }
}

TEST_CASE("parent tests", "[regression]") {
    const DataMatrix data = simulate(reference_spec(), 100000, 13);
    CHECK_THROWS_AS(parent_tests(data, 3, {}), EmptyAncestors);
    const ParentReport report = parent_tests(data, 3, {0, 1, 2});
    CHECK(report.ancestors_used == NodeSet{0, 1, 2});
    CHECK(report.p_value[1] < 1e-10);
    CHECK(report.p_value[2] < 1e-10);
    const double se = std::fabs(report.coef[0] / report.t_stat[0]);
    CHECK(std::fabs(report.coef[0]) < 3.0 * se);
    for (double p : report.p_value) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("parent test of a noiseless copy returns p = 0", "[regression]") {
    Eigen::MatrixXd values = random_design(50, 2, 5);
    values.col(1) = 2.0 * values.col(0);
    const ParentReport report = parent_tests(DataMatrix(values), 1, {0});
    CHECK(report.p_value[0] == 0.0);
    CHECK(std::isinf(report.t_stat[0]));
}
