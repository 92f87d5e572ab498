#include "pnmf/errors.hpp"
#include "pnmf/evaluation.hpp"
#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"
#include "pnmf/scalegraph.hpp"
#include "pnmf/solver.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace pnmf;
using namespace pnmf::evaluation;

namespace {

std::vector<int> random_labels(std::size_t n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(0, k - 1);
    std::vector<int> labels(n);
    for (int& v : labels) v = dist(rng);
    return labels;
}

/// Three tight planar clusters far apart; rows are samples.
DenseMatrix separated_points(std::size_t per_cluster, std::uint64_t seed,
                             std::vector<int>* truth = nullptr) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 0.05);
    const double centers[3][2] = {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}};
    DenseMatrix points(3 * per_cluster, 2);
    if (truth != nullptr) truth->resize(3 * per_cluster);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < per_cluster; ++i) {
            const std::size_t row = c * per_cluster + i;
            points(row, 0) = centers[c][0] + jitter(rng);
            points(row, 1) = centers[c][1] + jitter(rng);
            if (truth != nullptr) (*truth)[row] = static_cast<int>(c);
        }
    return points;
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("kmeans recovers well-separated clusters exactly") {
    std::vector<int> truth;
    const auto points = separated_points(15, 7, &truth);
    const auto result = kmeans(points, 3);
    REQUIRE(result.labels.size() == truth.size());
    CHECK(adjusted_rand_index(truth, result.labels) == doctest::Approx(1.0));
    CHECK(result.centroids.rows() == 3);
    CHECK(result.centroids.cols() == 2);
    CHECK(result.inertia < 1.0);
    CHECK(result.iterations >= 1);
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
    const auto points = separated_points(10, 11);
    KMeansConfig cfg;
    cfg.seed = 42;
    const auto a = kmeans(points, 3, cfg);
    const auto b = kmeans(points, 3, cfg);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("more restarts never increase the winning inertia") {
    // an elongated, overlapping layout where single restarts can land badly
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    DenseMatrix points(60, 2);
    for (std::size_t i = 0; i < 60; ++i) {
        points(i, 0) = 8.0 * d(rng);
        points(i, 1) = d(rng);
    }
    KMeansConfig one;
    one.restarts = 1;
    KMeansConfig many;
    many.restarts = 20;
    const double single = kmeans(points, 4, one).inertia;
    const double best = kmeans(points, 4, many).inertia;
    CHECK(best <= single + 1e-12);
}

TEST_CASE("kmeans validates its arguments") {
    const auto points = separated_points(5, 3);
    CHECK_THROWS_AS((void)kmeans(points, 0), ValidationError);
    CHECK_THROWS_AS((void)kmeans(points, points.rows() + 1), ValidationError);
    CHECK_THROWS_AS((void)kmeans(DenseMatrix{}, 2), ValidationError);
}

TEST_CASE("kmeans with k equal to n isolates every point") {
    const auto points = separated_points(2, 9);  // 6 points
    const auto result = kmeans(points, 6);
    std::vector<int> sorted = result.labels;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 6; ++i) CHECK(sorted[i] == static_cast<int>(i));
    CHECK(result.inertia == doctest::Approx(0.0));
}

TEST_CASE("min-cost assignment agrees with brute-force permutations") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    for (std::size_t k = 1; k <= 6; ++k) {
        DenseMatrix cost(k, k);
        for (double& v : cost.values()) v = d(rng);
        const auto assignment = min_cost_assignment(cost);
        REQUIRE(assignment.size() == k);
        std::vector<bool> used(k, false);
        double total = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            REQUIRE(assignment[r] < k);
            CHECK_FALSE(used[assignment[r]]);
            used[assignment[r]] = true;
            total += cost(r, assignment[r]);
        }
        CHECK(total == doctest::Approx(oracle::assignment_cost_by_permutations(cost)).epsilon(1e-12));
    }
}

TEST_CASE("ari matches pair counting on random labelings") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 5 + seed % 40;
        const auto a = random_labels(n, 2 + static_cast<int>(seed % 5), seed * 3 + 1);
        const auto b = random_labels(n, 2 + static_cast<int>(seed % 4), seed * 7 + 2);
        CHECK(adjusted_rand_index(a, b) ==
              doctest::Approx(oracle::ari_by_pair_counting(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("ari handles degenerate labelings by convention") {
    const std::vector<int> same{1, 1, 1, 1};
    const std::vector<int> split{0, 0, 1, 1};
    CHECK(adjusted_rand_index(same, same) == 1.0);
    CHECK(adjusted_rand_index(same, split) ==
          oracle::ari_by_pair_counting(same, split));
    const std::vector<int> distinct{0, 1, 2, 3};
    CHECK(adjusted_rand_index(distinct, distinct) == 1.0);
    const std::vector<int> single{0};
    CHECK(adjusted_rand_index(single, single) == 1.0);
}

TEST_CASE("identical and permuted labelings score a perfect ari") {
    const auto truth = random_labels(50, 4, 23);
    std::vector<int> renamed(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) renamed[i] = (truth[i] + 2) % 4;
    CHECK(adjusted_rand_index(truth, renamed) == doctest::Approx(1.0));
}

TEST_CASE("nmi matches the entropy oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 6 + seed % 30;
        const auto a = random_labels(n, 3, seed * 5 + 1);
        const auto b = random_labels(n, 4, seed * 11 + 3);
        CHECK(normalized_mutual_information(a, b) ==
              doctest::Approx(oracle::nmi_by_entropies(a, b)).epsilon(1e-12));
    }
    const auto truth = random_labels(40, 3, 99);
    CHECK(normalized_mutual_information(truth, truth) == doctest::Approx(1.0));
    // one side constant: zero entropy denominator is defined away
    const std::vector<int> constant(40, 2);
    CHECK(normalized_mutual_information(truth, constant) ==
          oracle::nmi_by_entropies(truth, constant));
}

TEST_CASE("purity follows the hand-worked contingency table") {
    //      predicted: 0 0 0 1 1 1
    //      truth:     0 0 1 1 1 0
    // cluster 0 majority 0 (2), cluster 1 majority 1 (2) -> 4/6
    const std::vector<int> truth{0, 0, 1, 1, 1, 0};
    const std::vector<int> predicted{0, 0, 0, 1, 1, 1};
    CHECK(purity(truth, predicted) == doctest::Approx(4.0 / 6.0));
    CHECK(purity(truth, truth) == doctest::Approx(1.0));
    const std::vector<int> shredded{0, 1, 2, 3, 4, 5};
    CHECK(purity(truth, shredded) == doctest::Approx(1.0));  // singletons are pure
}

TEST_CASE("accuracy matches exhaustive permutation matching") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const std::size_t n = 8 + seed % 25;
        const int kt = 2 + static_cast<int>(seed % 4);
        const int kp = 2 + static_cast<int>((seed + 1) % 5);
        const auto truth = random_labels(n, kt, seed * 13 + 1);
        const auto predicted = random_labels(n, kp, seed * 17 + 5);
        CHECK(accuracy(truth, predicted) ==
              doctest::Approx(oracle::accuracy_by_permutations(truth, predicted))
                  .epsilon(1e-12));
    }
}

TEST_CASE("accuracy is invariant to a relabeling of the prediction") {
    const auto truth = random_labels(30, 3, 71);
    std::vector<int> renamed(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) renamed[i] = 2 - truth[i];
    CHECK(accuracy(truth, renamed) == doctest::Approx(1.0));
}

TEST_CASE("metrics reject mismatched or empty inputs") {
    const std::vector<int> a{0, 1, 0};
    const std::vector<int> b{0, 1};
    CHECK_THROWS_AS((void)adjusted_rand_index(a, b), ValidationError);
    CHECK_THROWS_AS((void)normalized_mutual_information(a, b), ValidationError);
    CHECK_THROWS_AS((void)purity(a, b), ValidationError);
    CHECK_THROWS_AS((void)accuracy(a, b), ValidationError);
    const std::vector<int> empty;
    CHECK_THROWS_AS((void)purity(empty, empty), ValidationError);
}

TEST_CASE("score_clustering aggregates the four metrics") {
    const auto truth = random_labels(40, 3, 81);
    const auto predicted = random_labels(40, 3, 82);
    const auto scores = score_clustering(truth, predicted);
    CHECK(scores.ari == doctest::Approx(adjusted_rand_index(truth, predicted)));
    CHECK(scores.nmi == doctest::Approx(normalized_mutual_information(truth, predicted)));
    CHECK(scores.purity == doctest::Approx(purity(truth, predicted)));
    CHECK(scores.accuracy == doctest::Approx(accuracy(truth, predicted)));
    CHECK(scores.mean() ==
          doctest::Approx(0.25 * (scores.ari + scores.nmi + scores.purity + scores.accuracy)));
}

TEST_CASE("sweep_scales scores every scale and picks the best mean") {
    // three separated clusters in feature space; the solver's embeddings at
    // every scale should cluster close to the truth, and the report must be
    // internally consistent regardless.
    std::vector<int> truth;
    const auto samples = separated_points(8, 91, &truth);  // 24 x 2, rows = samples
    // features x samples layout for the solver, third row keeps rank 3 legal
    DenseMatrix x(3, 24);
    for (std::size_t i = 0; i < 24; ++i) {
        x(0, i) = samples(i, 0) + 0.5;  // keep entries nonnegative
        x(1, i) = samples(i, 1) + 0.5;
        x(2, i) = 0.1 * (samples(i, 0) + samples(i, 1)) + 1.0;
    }
    solver::SolverConfig cfg;
    cfg.rank = 3;
    cfg.max_outer = 2;
    cfg.max_inner = 30;
    cfg.max_scales = 6;
    const auto factors = solver::solve_pnmf(x, cfg);

    KMeansConfig km;
    km.seed = 1;
    const auto report = sweep_scales(factors, truth, km);
    REQUIRE(report.entries.size() == factors.scales.size());
    double best = -2.0;
    std::size_t best_index = 0;
    for (std::size_t t = 0; t < report.entries.size(); ++t) {
        const auto& entry = report.entries[t];
        CHECK(entry.scale_index == t);
        CHECK(entry.scale == factors.scales[t]);
        CHECK(entry.scores.ari >= -1.0);
        CHECK(entry.scores.ari <= 1.0);
        CHECK(entry.scores.purity <= 1.0);
        CHECK(entry.scores.accuracy <= 1.0);
        if (entry.scores.mean() > best) {
            best = entry.scores.mean();
            best_index = t;
        }
    }
    CHECK(report.best_index == best_index);
}

TEST_CASE("sweep_scales defaults k to the number of distinct truth labels") {
    std::vector<int> truth;
    const auto samples = separated_points(6, 93, &truth);
    DenseMatrix x(3, 18);
    for (std::size_t i = 0; i < 18; ++i) {
        x(0, i) = samples(i, 0) + 0.5;
        x(1, i) = samples(i, 1) + 0.5;
        x(2, i) = 0.1 * (samples(i, 0) + samples(i, 1)) + 1.0;
    }
    solver::SolverConfig cfg;
    cfg.rank = 3;
    cfg.max_outer = 1;
    cfg.max_inner = 20;
    cfg.max_scales = 4;
    const auto factors = solver::solve_pnmf(x, cfg);
    const auto defaulted = sweep_scales(factors, truth, {});
    const auto explicit_k = sweep_scales(factors, truth, {}, 3);
    REQUIRE(defaulted.entries.size() == explicit_k.entries.size());
    for (std::size_t t = 0; t < defaulted.entries.size(); ++t)
        CHECK(defaulted.entries[t].scores.mean() ==
              doctest::Approx(explicit_k.entries[t].scores.mean()));

    std::vector<int> bad(truth.begin(), truth.begin() + 5);
    CHECK_THROWS_AS((void)sweep_scales(factors, bad, {}), ValidationError);
}

TEST_CASE("increment_analysis reproduces hand-computed increment series") {
    const auto x = [&] {
        std::mt19937_64 rng(95);
        std::uniform_real_distribution<double> d(0.05, 1.0);
        DenseMatrix m(4, 14);
        for (double& v : m.values()) v = d(rng);
        return m;
    }();
    solver::SolverConfig cfg;
    cfg.rank = 2;
    cfg.max_outer = 2;
    cfg.max_inner = 20;
    const auto factors = solver::solve_pnmf(x, cfg);
    REQUIRE(factors.scales.size() >= 4);

    const auto dist = pairwise_distances(x);
    const auto graphs =
        scalegraph::graph_family(dist, persistence::ScaleSet(factors.scales), cfg.alpha);
    const auto report = increment_analysis(factors, graphs);

    const std::size_t m = factors.scales.size() - 1;
    REQUIRE(report.scale_deltas.size() == m);
    REQUIRE(report.laplacian_deltas.size() == m);
    REQUIRE(report.embedding_deltas.size() == m);
    for (std::size_t t = 1; t <= m; ++t) {
        CHECK(report.scale_deltas[t - 1] ==
              doctest::Approx(factors.scales[t] - factors.scales[t - 1]).epsilon(1e-12));
        const auto& la = graphs[t].laplacian;
        const auto& lb = graphs[t - 1].laplacian;
        double sq = 0.0;
        for (std::size_t i = 0; i < la.order(); ++i)
            for (std::size_t j = 0; j < la.order(); ++j) {
                const double diff = la(i, j) - lb(i, j);
                sq += diff * diff;
            }
        CHECK(report.laplacian_deltas[t - 1] == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
        CHECK(report.embedding_deltas[t - 1] ==
              doctest::Approx(frobenius_distance(factors.pairs[t].h, factors.pairs[t - 1].h))
                  .epsilon(1e-12));
    }

    REQUIRE(report.correlations.size() == 3);
    for (const auto& entry : report.correlations) {
        if (entry.result.has_value()) {
            const auto direct = oracle::pearson_r_direct(
                entry.pair == "laplacian_vs_embedding" ? report.laplacian_deltas
                                                       : report.scale_deltas,
                entry.pair == "scale_vs_laplacian" ? report.laplacian_deltas
                                                   : report.embedding_deltas);
            CHECK(entry.result->r == doctest::Approx(direct).epsilon(1e-10));
            CHECK(entry.result->p_value >= 0.0);
            CHECK(entry.result->p_value <= 1.0);
        } else {
            CHECK_FALSE(entry.note.empty());
        }
    }
}

TEST_CASE("increment_analysis requires at least four scales") {
    const auto x = [&] {
        std::mt19937_64 rng(97);
        std::uniform_real_distribution<double> d(0.05, 1.0);
        DenseMatrix m(3, 10);
        for (double& v : m.values()) v = d(rng);
        return m;
    }();
    solver::SolverConfig cfg;
    cfg.rank = 2;
    cfg.max_outer = 1;
    cfg.max_inner = 5;
    cfg.max_scales = 3;
    const auto factors = solver::solve_pnmf(x, cfg);
    const auto dist = pairwise_distances(x);
    const auto graphs =
        scalegraph::graph_family(dist, persistence::ScaleSet(factors.scales), cfg.alpha);
    CHECK_THROWS_AS((void)increment_analysis(factors, graphs), ValidationError);
}

TEST_CASE("constant increment series yields a note instead of a correlation") {
    // hand-build factors over four equally spaced scales with identical
    // embeddings: the embedding delta series is all zeros -> degenerate
    solver::MultiScaleFactors factors;
    factors.scales = {1.0, 2.0, 3.0, 4.0};
    DenseMatrix w(3, 2, 0.5);
    DenseMatrix h(2, 6, 0.25);
    for (int t = 0; t < 4; ++t) factors.pairs.push_back({w, h});

    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> d(0.05, 1.0);
    DenseMatrix cloud(3, 6);
    for (double& v : cloud.values()) v = d(rng);
    const auto dist = pairwise_distances(cloud);
    std::vector<scalegraph::ScaleGraph> graphs;
    for (const double eps : factors.scales)
        graphs.push_back(scalegraph::build_graph(dist, eps, 1.5));

    const auto report = increment_analysis(factors, graphs);
    bool found_degenerate = false;
    for (const auto& entry : report.correlations)
        if (!entry.result.has_value()) {
            found_degenerate = true;
            CHECK_FALSE(entry.note.empty());
        }
    CHECK(found_degenerate);
}

} // TEST_SUITE
