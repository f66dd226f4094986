#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "ancreg/errors.hpp"
#include "ancreg/experiments.hpp"
#include "ancreg/graph_search.hpp"
#include "test_support.hpp"

using namespace ancreg;

namespace {

PMatrix pmatrix(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return PMatrix(m);
}

PMatrix random_pmatrix(std::size_t d, Engine& engine) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> levels(1, 8);
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            if (j != k) {
                // Coarse values produce ties; the exponent spreads small p-values.
                const double u = unit(engine);
                m(j, k) = u < 0.2 ? std::pow(10.0, -levels(engine)) : u < 0.4 ? 0.5 : std::pow(u, 6) * 1.5;
            }
    return PMatrix(m);
}

bool is_closed(const Adjacency& a) { return build_recursive(a) == a; }

}  // namespace

TEST_CASE("build_recursive closes a two-step chain", "[graph_search]") {
    Adjacency a(3);
    a.set(1, 0);
    a.set(2, 1);
    const Adjacency closed = build_recursive(a);
    CHECK(closed(2, 0));
    CHECK(closed.count() == 3);
    CHECK(build_recursive(Adjacency(4)) == Adjacency(4));
}

TEST_CASE("build_recursive equals Floyd-Warshall reachability", "[graph_search][property]") {
    Engine engine = make_engine(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const Adjacency a = test_support::random_adjacency(8, 0.05 + 0.3 * (trial % 5) / 4.0, engine);
        const Adjacency closed = build_recursive(a);
        const auto oracle = test_support::floyd_warshall(a);
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t k = 0; k < 8; ++k) REQUIRE(closed(j, k) == oracle[j][k]);
        REQUIRE(build_recursive(closed) == closed);
    }
}

TEST_CASE("cycle_nodes", "[graph_search]") {
    Adjacency chain(3);
    chain.set(1, 0);
    chain.set(2, 1);
    CHECK(cycle_nodes(build_recursive(chain)).empty());

    Adjacency pair(2);
    pair.set(0, 1);
    pair.set(1, 0);
    CHECK(cycle_nodes(build_recursive(pair)) == NodeSet{0, 1});

    Adjacency three(4);
    three.set(1, 0);
    three.set(2, 1);
    three.set(0, 2);
    CHECK(cycle_nodes(build_recursive(three)) == NodeSet{0, 1, 2});
}

TEST_CASE("two variables: the weaker direction is never claimed", "[graph_search]") {
    // P(2 <- 1) = 1e-6 and P(1 <- 2) = 1e-3 in 1-based notation.
    const PMatrix p = pmatrix({{1.0, 1e-3}, {1e-6, 1.0}});
    for (double alpha : {1.1e-3, 0.01, 0.05, 0.5, 1.0, 5.0}) {
        const StructureFit fit = find_structure(p, alpha);
        CHECK(fit.adjacency(1, 0));
        CHECK_FALSE(fit.adjacency(0, 1));
        CHECK(fit.alpha_hat == 1e-3);
        CHECK(fit.tightened);
    }
    const StructureFit low = find_structure(p, 1e-3);
    CHECK(low.adjacency(1, 0));
    CHECK_FALSE(low.tightened);
    CHECK(low.alpha_hat == 1e-3);
}

TEST_CASE("no cycles keeps the level", "[graph_search]") {
    const PMatrix p = pmatrix({{1.0, 0.9}, {0.01, 1.0}});
    const StructureFit fit = find_structure(p, 0.05);
    CHECK(fit.alpha_hat == 0.05);
    CHECK_FALSE(fit.tightened);
    CHECK(fit.adjacency.count() == 1);
}

TEST_CASE("three-cycle hand trace", "[graph_search]") {
    // 1 -> 2 (1e-6), 2 -> 3 (1e-5), 3 -> 1 (1e-4); entry (j, k) tests k -> j.
    const PMatrix p = pmatrix({{1.0, 1.0, 1e-4}, {1e-6, 1.0, 1.0}, {1.0, 1e-5, 1.0}});
    const StructureFit fit = find_structure(p, 0.05);
    CHECK(fit.alpha_hat == 1e-4);
    CHECK(fit.tightened);
    CHECK(fit.adjacency(1, 0));  // 1 -> 2
    CHECK(fit.adjacency(2, 1));  // 2 -> 3
    CHECK(fit.adjacency(2, 0));  // closure 1 -> 3
    CHECK_FALSE(fit.adjacency(0, 2));
    CHECK(fit.adjacency.count() == 3);
}

TEST_CASE("single node and invalid levels", "[graph_search]") {
    const PMatrix one = pmatrix({{1.0}});
    const StructureFit fit = find_structure(one, 0.05);
    CHECK(fit.adjacency.count() == 0);
    CHECK(fit.alpha_hat == 0.05);
    CHECK_THROWS_AS(find_structure(one, 0.0), InvalidInput);
    CHECK_THROWS_AS(find_structure(one, std::numeric_limits<double>::infinity()), InvalidInput);
    CHECK_THROWS_AS(pmatrix({{0.5}}), InvalidInput);
    CHECK_THROWS_AS(pmatrix({{1.0, -0.1}, {0.2, 1.0}}), InvalidInput);
}

TEST_CASE("find_structure invariants on random inputs", "[graph_search][property]") {
    Engine engine = make_engine(2024);
    std::uniform_int_distribution<int> size(1, 8);
    std::uniform_real_distribution<double> log_alpha(-8.0, 0.5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto d = static_cast<std::size_t>(size(engine));
        const PMatrix p = random_pmatrix(d, engine);
        const double alpha = std::pow(10.0, log_alpha(engine));
        const StructureFit fit = find_structure(p, alpha);
        REQUIRE_FALSE(fit.adjacency.has_self_loop());
        REQUIRE(is_closed(fit.adjacency));
        REQUIRE(fit.alpha_hat <= alpha);
        REQUIRE(fit.tightened == (fit.alpha_hat < alpha));

        // Claims only come from entries below alpha_hat... up to closure.
        Adjacency direct(d);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                if (j != k && p(j, k) < alpha) direct.set(j, k);
        const Adjacency closure = build_recursive(direct);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                if (fit.adjacency(j, k)) REQUIRE(closure(j, k));

        // Relabelling equivariance.
        const auto perm = test_support::random_permutation(d, engine);
        const PMatrix q = p.submatrix(perm);
        const StructureFit relabelled = find_structure(q, alpha);
        REQUIRE(relabelled.alpha_hat == fit.alpha_hat);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) REQUIRE(relabelled.adjacency(a, b) == fit.adjacency(perm[a], perm[b]));
    }
}

TEST_CASE("lowering alpha never adds thresholded edges", "[graph_search][property]") {
    Engine engine = make_engine(99);
    for (int trial = 0; trial < 300; ++trial) {
        const PMatrix p = random_pmatrix(6, engine);
        std::size_t previous = 0;
        for (double alpha : {1e-8, 1e-6, 1e-4, 1e-2, 0.05, 0.5, 1.0, 2.0}) {
            std::size_t count = 0;
            for (std::size_t j = 0; j < 6; ++j)
                for (std::size_t k = 0; k < 6; ++k) count += (j != k && p(j, k) < alpha) ? 1 : 0;
            REQUIRE(count >= previous);
            previous = count;
        }
    }
}

TEST_CASE("model check p-value", "[graph_search]") {
    const PMatrix p = pmatrix({{1.0, 1e-3}, {1e-6, 1.0}});
    GraphResult tightened = graph_from_pmatrix(p, {0.05, Nonlinearity::Cube, true, true});
    CHECK(model_check_pvalue(tightened) == 1e-3);
    GraphResult plain = graph_from_pmatrix(pmatrix({{1.0, 0.5}, {1e-6, 1.0}}), {});
    CHECK(model_check_pvalue(plain) == 1.0);
    GraphResult uncapped = graph_from_pmatrix(p, {0.05, Nonlinearity::Cube, false, true});
    CHECK_THROWS_AS(model_check_pvalue(uncapped), InvalidInput);
}

TEST_CASE("graph result edges carry their corrected p-values", "[graph_search]") {
    const PMatrix p = pmatrix({{1.0, 1.0, 1.0}, {1e-6, 1.0, 1.0}, {0.2, 1e-5, 1.0}});
    const GraphResult result = graph_from_pmatrix(p, {});
    REQUIRE(result.edges.size() == 3);
    for (const auto& e : result.edges) CHECK(e.corrected_p == p(e.target, e.ancestor));
    CHECK(result.ancestors[2] == NodeSet{0, 1});
}

TEST_CASE("detect_graph on reference data is acyclic and untightened", "[graph_search]") {
    const DataMatrix data = simulate(reference_spec(), 20000, 17);
    const GraphResult result = detect_graph(data);
    CHECK_FALSE(result.adjacency.has_self_loop());
    CHECK(build_recursive(result.adjacency) == result.adjacency);
    CHECK(result.n == 20000);
    CHECK(result.scans.size() == 6);
    CHECK(result.alpha_hat <= 0.05);
}

TEST_CASE("detect_graph tightens on cyclic data", "[graph_search]") {
    const DataMatrix data = simulate_equilibrium(cyclic_pair_spec(), 10000, 3);
    const GraphResult result = detect_graph(data);
    CHECK(result.tightened);
    CHECK(model_check_pvalue(result) < 0.05);
}
