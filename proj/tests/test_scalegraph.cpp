#include "pnmf/errors.hpp"
#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"
#include "pnmf/scalegraph.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pnmf;
using namespace pnmf::scalegraph;

namespace {

SymmetricMatrix random_distances(std::size_t n, std::uint64_t seed, std::size_t features = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    DenseMatrix x(features, n);
    for (double& v : x.values()) v = dist(rng);
    return pairwise_distances(x);
}

} // namespace

TEST_SUITE("scalegraph") {

TEST_CASE("adjacency matches the extended-precision kernel") {
    const auto dist = random_distances(10, 1);
    const double eps = 0.9;
    const double alpha = 1.5;
    const auto graph = build_graph(dist, eps, alpha);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            if (i == j) {
                CHECK(graph.adjacency(i, j) == 0.0);
                continue;
            }
            const long double expected = oracle::adjacency_entry(dist(i, j), eps, alpha);
            CHECK(static_cast<long double>(graph.adjacency(i, j)) ==
                  doctest::Approx(static_cast<double>(expected)).epsilon(1e-15));
        }
}

TEST_CASE("edges at exactly the scale are excluded") {
    DenseMatrix x(1, 2);
    x(0, 0) = 0.0;
    x(0, 1) = 1.0;
    const auto dist = pairwise_distances(x);
    CHECK(build_graph(dist, 1.0).adjacency(0, 1) == 0.0);
    const auto above = build_graph(dist, 1.0 + 1e-9, 1.5);
    // just above the distance the weight jumps to about exp(-d^(2-alpha))
    CHECK(above.adjacency(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("degrees are adjacency row sums and L = D - A") {
    const auto dist = random_distances(8, 3);
    const auto graph = build_graph(dist, 0.8, 1.5);
    for (std::size_t i = 0; i < 8; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 8; ++j) row += graph.adjacency(i, j);
        CHECK(graph.degrees[i] == doctest::Approx(row).epsilon(1e-15));
        for (std::size_t j = 0; j < 8; ++j) {
            const double expected =
                (i == j ? graph.degrees[i] : 0.0) - graph.adjacency(i, j);
            CHECK(graph.laplacian(i, j) == expected);
        }
    }
}

TEST_CASE("laplacian rows sum to zero and the matrix is positive semidefinite") {
    const auto dist = random_distances(9, 5);
    const auto graph = build_graph(dist, 0.7, 1.5);
    for (std::size_t i = 0; i < 9; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 9; ++j) row += graph.laplacian(i, j);
        CHECK(row == doctest::Approx(0.0).epsilon(1e-12));
    }
    const auto values = numerics::eigenvalues_sym(graph.laplacian);
    CHECK(values.front() >= -1e-10);
}

TEST_CASE("two connected points have the closed-form spectrum") {
    DenseMatrix x(1, 2);
    x(0, 0) = 0.0;
    x(0, 1) = 0.5;
    const auto graph = build_graph(pairwise_distances(x), 1.0, 2.0);
    const double w = std::exp(-0.25);  // alpha=2: exp(-d^2/eps^2)
    CHECK(graph.adjacency(0, 1) == doctest::Approx(w).epsilon(1e-15));
    const auto values = numerics::eigenvalues_sym(graph.laplacian);
    CHECK(values[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(values[1] == doctest::Approx(2.0 * w).epsilon(1e-12));
}

TEST_CASE("nullity equals the component count at every probe scale") {
    const auto dist = random_distances(12, 9);
    const double top = persistence::delta_max(dist);
    for (int i = 1; i <= 12; ++i) {
        const double eps = top * static_cast<double>(i) / 12.0;
        const auto graph = build_graph(dist, eps, 1.5);
        const std::size_t components = oracle::component_count_below(dist, eps);
        CHECK(nullity(graph.laplacian) == components);
        CHECK(persistence::betti0_at(dist, eps) == components);
    }
}

TEST_CASE("graph_family evaluates every scale in order") {
    const auto dist = random_distances(7, 13);
    const double cutoff = persistence::delta_max(dist);
    const auto scales =
        persistence::canonical_scale_set(persistence::compute_h0_diagram(dist, cutoff));
    const auto family = graph_family(dist, scales, 1.5);
    REQUIRE(family.size() == scales.size());
    for (std::size_t t = 0; t < scales.size(); ++t) {
        CHECK(family[t].eps == scales[t]);
        CHECK(family[t].order() == 7);
        const auto direct = build_graph(dist, scales[t], 1.5);
        CHECK(family[t].adjacency == direct.adjacency);
    }
}

TEST_CASE("empty graph has no edges and full nullity") {
    const auto graph = empty_graph(5);
    CHECK(graph.order() == 5);
    CHECK(frobenius_norm(graph.adjacency) == 0.0);
    CHECK(nullity(graph.laplacian) == 5);
}

TEST_CASE("adjacency is monotone in the scale on fixed edges") {
    // once an edge exists, growing eps can only increase its weight
    const auto dist = random_distances(6, 17);
    const auto small = build_graph(dist, 0.5, 1.5);
    const auto large = build_graph(dist, 0.9, 1.5);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (small.adjacency(i, j) > 0.0)
                CHECK(large.adjacency(i, j) >= small.adjacency(i, j));
}

TEST_CASE("build_graph validates its arguments") {
    const auto dist = random_distances(4, 19);
    CHECK_THROWS_AS((void)build_graph(dist, 0.0, 1.5), ValidationError);
    CHECK_THROWS_AS((void)build_graph(dist, -1.0, 1.5), ValidationError);
    CHECK_THROWS_AS((void)build_graph(dist, 1.0, 0.0), ValidationError);
}

} // TEST_SUITE
