#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ancreg/errors.hpp"
#include "ancreg/experiments.hpp"

using namespace ancreg;

namespace {

constexpr std::size_t kMcN = 1000000;

StudyConfig small_config(StudyKind kind) {
    StudyConfig config;
    config.kind = kind;
    config.spec = reference_spec();
    if (kind == StudyKind::Ancestor) config.target = 3;
    config.sample_sizes = {100};
    config.runs = 1;
    return config;
}

}  // namespace

TEST_CASE("fixtures name ancestor pairs with a vanishing coefficient", "[experiments]") {
    const auto fixtures = adversarial_fixtures();
    REQUIRE(fixtures.size() == 3);
    for (const auto& fixture : fixtures) {
        const auto truth = ground_truth(fixture.spec);
        CHECK_FALSE(fixture.undetectable.empty());
        for (const auto& [k, j] : fixture.undetectable) CHECK(truth.is_ancestor(k, j));
        CHECK(builtin_spec(fixture.name) == fixture.spec);
    }
    CHECK_THROWS_AS(builtin_spec("nope"), InvalidInput);
}

TEST_CASE("the Gaussian-path fixture has Gaussian errors at both ends of the first edge", "[experiments]") {
    const auto f = adversarial_fixtures()[0];
    CHECK(f.spec.noise[0].is_gaussian());
    CHECK(f.spec.noise[1].is_gaussian());
    CHECK_FALSE(f.spec.noise[2].is_gaussian());
}

TEST_CASE("the matched-error fixture matches the child error to the inherited term", "[experiments]") {
    const auto f = adversarial_fixtures()[1];
    // theta_21 * Psi_1 and Psi_2 are both centered uniforms with the same scale.
    CHECK(f.spec.noise[0].family == NoiseFamily::Uniform);
    CHECK(f.spec.noise[1].family == NoiseFamily::Uniform);
    CHECK(std::fabs(f.spec.theta(1, 0)) * f.spec.noise[0].sigma == f.spec.noise[1].sigma);
}

TEST_CASE("the reference model has exactly one Gaussian error", "[experiments]") {
    const SemSpec spec = reference_spec();
    std::size_t gaussian = 0;
    for (const auto& n : spec.noise) gaussian += n.is_gaussian() ? 1 : 0;
    CHECK(gaussian == 1);
    CHECK(spec.noise[5].is_gaussian());
    CHECK(two_gaussian_spec().noise[4].is_gaussian());
}

TEST_CASE("random_sem is deterministic and acyclic", "[experiments]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const SemSpec a = random_sem(6, 0.4, seed);
        CHECK(a == random_sem(6, 0.4, seed));
        CHECK_NOTHROW(validate_dag(a.theta));
        for (const auto& n : a.noise) CHECK(n.has_sixth_moment());
    }
}

TEST_CASE("moment requirements", "[experiments]") {
    SemSpec spec(2);
    spec.add_edge(0, 1, 1.0);
    spec.noise[0] = NoiseSpec::student_t(5.0);
    CHECK_THROWS_AS(check_moments(spec, 1, Nonlinearity::Cube), MomentError);
    CHECK_NOTHROW(check_moments(spec, 1, Nonlinearity::SignedSquare));
    spec.noise[0] = NoiseSpec::student_t(3.5);
    CHECK_THROWS_AS(check_moments(spec, 0, Nonlinearity::SignedSquare), MomentError);
    CHECK_THROWS_AS(population_beta_oracle(spec, 1, Nonlinearity::Cube, 1000, 1), MomentError);
}

TEST_CASE("population coefficients vanish for the reference non-ancestors", "[experiments][slow]") {
    const PopulationBeta beta = population_beta_oracle(reference_spec(), 3, Nonlinearity::Cube, kMcN, 7);
    CHECK(std::fabs(beta.beta(4)) < 4.0 * beta.mc_error(4));
    CHECK(std::fabs(beta.beta(5)) < 4.0 * beta.mc_error(5));
    for (int k : {0, 1, 2}) CHECK(std::fabs(beta.beta(k)) > 10.0 * beta.mc_error(k));
    CHECK(beta.max_disagreement() < 4.0);
}

TEST_CASE("population coefficients vanish for the fixture pairs", "[experiments][slow]") {
    for (const auto& fixture : adversarial_fixtures()) {
        const auto all = population_beta_oracle_all(fixture.spec, Nonlinearity::Cube, kMcN, 11);
        for (const auto& [k, j] : fixture.undetectable) {
            const auto i = static_cast<Eigen::Index>(k);
            INFO(fixture.name << ": " << k + 1 << " -> " << j + 1);
            CHECK(std::fabs(all[j].beta(i)) < 4.0 * all[j].mc_error(i));
            CHECK(std::fabs(all[j].partial_beta(i)) < 4.0 * all[j].partial_error(i));
        }
    }
}

TEST_CASE("the two oracle routes agree on random models", "[experiments][slow]") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SemSpec spec = random_sem(5, 0.5, seed + 40);
        for (const auto& beta : population_beta_oracle_all(spec, Nonlinearity::Cube, kMcN / 4, seed)) {
            CHECK(beta.max_disagreement() < 4.0);
            CHECK(beta.mc_error.allFinite());
        }
    }
}

TEST_CASE("oracle error shrinks like the inverse square root of the sample size", "[experiments]") {
    const SemSpec spec = reference_spec();
    const auto small = population_beta_oracle(spec, 3, Nonlinearity::Cube, 20000, 3);
    const auto large = population_beta_oracle(spec, 3, Nonlinearity::Cube, 320000, 3);
    for (Eigen::Index k = 0; k < 6; ++k) {
        const double ratio = small.mc_error(k) / large.mc_error(k);
        CHECK(ratio > 3.0);
        CHECK(ratio < 5.5);
    }
}

TEST_CASE("sample coefficients converge to the population coefficients", "[experiments][slow]") {
    const SemSpec spec = reference_spec();
    const auto population = population_beta_oracle(spec, 3, Nonlinearity::Cube, kMcN, 5);
    const DataMatrix data = simulate(spec, 100000, 6);
    const AncestorScan scan = ancestor_scan(data, 3);
    for (Eigen::Index k = 0; k < 6; ++k) {
        if (k == 3) continue;
        const double se = std::abs(scan.beta(k) / scan.z(k));
        INFO("k = " << k);
        CHECK(std::fabs(scan.beta(k) - population.beta(k)) < 4.0 * std::hypot(se, population.mc_error(k)));
    }
}

TEST_CASE("residual representation without edges is trivial", "[experiments]") {
    SemSpec spec(4);
    const ResidualRep rep = residual_representation(spec, 1, 100000, 3);
    REQUIRE(rep.gamma.size() == 3);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::fabs(rep.gamma(i)) < 4.0 * rep.gamma_error(i));
    CHECK(rep.markov_boundary.empty());
}

TEST_CASE("residual representation is supported on the Markov boundary", "[experiments][slow]") {
    const SemSpec spec = reference_spec();
    const ResidualRep rep = residual_representation(spec, 4, kMcN, 8);
    CHECK(rep.markov_boundary == NodeSet{3, 5});
    CHECK(rep.max_outside_boundary() < 4.0);
    // X4 and X6 carry real weight.
    CHECK(std::fabs(rep.gamma(3)) > 10.0 * rep.gamma_error(3));
    CHECK(std::fabs(rep.gamma(4)) > 10.0 * rep.gamma_error(4));
    // Z is uncorrelated with every other column.
    const DataMatrix sample = simulate(spec, kMcN, 8);
    for (std::size_t i = 0; i < rep.others.size(); ++i) {
        const Eigen::VectorXd other = sample.column(rep.others[i]);
        const double corr = rep.z_samples.dot(other) / (rep.z_samples.norm() * other.norm());
        CHECK(std::fabs(corr) < 1e-10);
    }
}

TEST_CASE("residual of a non-ancestor is uncorrelated with f of the target", "[experiments][slow]") {
    const SemSpec spec = reference_spec();
    for (std::size_t k : {4, 5}) {
        const ResidualRep rep = residual_representation(spec, k, kMcN, 9, 3, Nonlinearity::Cube);
        INFO("k = " << k);
        CHECK(std::fabs(rep.zf_mean) < 4.0 * rep.zf_error);
        CHECK(rep.w_samples.size() == static_cast<Eigen::Index>(kMcN));
        CHECK(rep.zeta.size() == 5);
    }
    const ResidualRep ancestor = residual_representation(spec, 1, kMcN, 9, 3, Nonlinearity::Cube);
    CHECK(std::fabs(ancestor.zf_mean) > 10.0 * ancestor.zf_error);
}

TEST_CASE("study configs are validated", "[experiments]") {
    StudyConfig config = small_config(StudyKind::Ancestor);
    config.runs = 0;
    CHECK_THROWS_AS(config.validate(), InvalidInput);
    config = small_config(StudyKind::Ancestor);
    config.sample_sizes = {1000, 100};
    CHECK_THROWS_AS(config.validate(), InvalidInput);
    config = small_config(StudyKind::Ancestor);
    config.sample_sizes = {6};
    CHECK_THROWS_AS(config.validate(), InvalidInput);
    config = small_config(StudyKind::Ancestor);
    config.target.reset();
    CHECK_THROWS_AS(config.validate(), InvalidInput);
    config = small_config(StudyKind::Graph);
    config.alphas = {0.1, 0.01};
    CHECK_THROWS_AS(config.validate(), InvalidInput);
}

TEST_CASE("a single-run study has indicator rates", "[experiments]") {
    for (StudyKind kind : {StudyKind::Ancestor, StudyKind::Graph}) {
        const StudyResult result = run_study(small_config(kind));
        REQUIRE(result.fwer.rows() == 1);
        REQUIRE(result.fwer.cols() == static_cast<Eigen::Index>(result.alphas.size()));
        for (Eigen::Index a = 0; a < result.fwer.cols(); ++a) {
            CHECK((result.fwer(0, a) == 0.0 || result.fwer(0, a) == 1.0));
            CHECK(result.power(0, a) >= 0.0);
            CHECK(result.power(0, a) <= 1.0);
        }
        CHECK(result.detected_fraction.size() == 1);
        CHECK(result.alpha_hat.at(0).size() == 1);
        if (kind == StudyKind::Ancestor) {
            REQUIRE(result.mean_abs_z.cols() == 6);
            CHECK(std::isnan(result.mean_abs_z(0, 3)));
            CHECK(result.mean_abs_z(0, 0) >= 0.0);
        }
    }
}

TEST_CASE("study results do not depend on the thread count", "[experiments]") {
    StudyConfig config = small_config(StudyKind::Graph);
    config.sample_sizes = {200, 2000};
    config.runs = 12;
    const StudyResult serial = run_study(config);
    config.threads = 4;
    const StudyResult parallel = run_study(config);
    CHECK(serial.fwer == parallel.fwer);
    CHECK(serial.power == parallel.power);
    CHECK(serial.alpha_hat == parallel.alpha_hat);
}

TEST_CASE("power grows with alpha in ancestor studies", "[experiments]") {
    StudyConfig config = small_config(StudyKind::Ancestor);
    config.sample_sizes = {2000};
    config.runs = 20;
    const StudyResult result = run_study(config);
    for (Eigen::Index a = 1; a < result.power.cols(); ++a) {
        CHECK(result.power(0, a) >= result.power(0, a - 1));
        CHECK(result.fwer(0, a) >= result.fwer(0, a - 1));
    }
}

TEST_CASE("parallel_for rethrows worker failures", "[experiments]") {
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 7) throw DomainError("boom");
                                 }),
                    DomainError);
}
