#include "pnmf/evaluation.hpp"

#include "pnmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <utility>

namespace pnmf::evaluation {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double squared_point_distance(const DenseMatrix& points, std::size_t row,
                              const DenseMatrix& centroids, std::size_t c) {
    double acc = 0.0;
    for (std::size_t j = 0; j < points.cols(); ++j) {
        const double d = points(row, j) - centroids(c, j);
        acc += d * d;
    }
    return acc;
}

struct LloydOutcome {
    std::vector<int> labels;
    DenseMatrix centroids;
    double inertia = 0.0;
    std::size_t iterations = 0;
};

LloydOutcome run_lloyd(const DenseMatrix& points, std::size_t k, const KMeansConfig& cfg,
                       std::uint64_t seed) {
    const std::size_t n = points.rows();
    const std::size_t dim = points.cols();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Plus-plus seeding: first centroid uniform, the rest proportional to the
    // squared distance from the nearest centroid chosen so far.
    DenseMatrix centroids(k, dim);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<std::size_t> first(0, n - 1);
        const std::size_t pick = first(rng);
        for (std::size_t j = 0; j < dim; ++j) centroids(0, j) = points(pick, j);
    }
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_point_distance(points, i, centroids, c - 1));
            total += nearest[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = unif(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            std::uniform_int_distribution<std::size_t> any(0, n - 1);
            pick = any(rng);
        }
        for (std::size_t j = 0; j < dim; ++j) centroids(c, j) = points(pick, j);
    }

    LloydOutcome out;
    out.labels.assign(n, 0);
    std::vector<double> best_dist(n, 0.0);

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        out.iterations = it;
        for (std::size_t i = 0; i < n; ++i) {
            int arg = 0;
            double best = squared_point_distance(points, i, centroids, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = squared_point_distance(points, i, centroids, c);
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(c);
                }
            }
            out.labels[i] = arg;
            best_dist[i] = best;
        }

        DenseMatrix next(k, dim);
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(out.labels[i]);
            ++sizes[c];
            for (std::size_t j = 0; j < dim; ++j) next(c, j) += points(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                for (std::size_t j = 0; j < dim; ++j)
                    next(c, j) /= static_cast<double>(sizes[c]);
            } else {
                // Re-seed an empty cluster at the worst-served point.
                std::size_t far = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (best_dist[i] > best_dist[far]) far = i;
                for (std::size_t j = 0; j < dim; ++j) next(c, j) = points(far, j);
                best_dist[far] = 0.0;
            }
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            shift = std::max(shift, std::sqrt(squared_point_distance(next, c, centroids, c)));
        centroids = std::move(next);
        if (shift <= cfg.shift_tol) break;
    }

    out.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double best = squared_point_distance(points, i, centroids, 0);
        for (std::size_t c = 1; c < k; ++c) {
            const double d = squared_point_distance(points, i, centroids, c);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        out.labels[i] = arg;
        out.inertia += best;
    }
    out.centroids = std::move(centroids);
    return out;
}

/// Contingency table with rows indexed by compacted truth labels and columns
/// by compacted predicted labels, plus the marginals.
struct Contingency {
    std::vector<std::vector<double>> counts;
    std::vector<double> truth_sizes;
    std::vector<double> predicted_sizes;
    double n = 0.0;
};

Contingency cross_tabulate(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size())
        throw ValidationError("labelings must have equal length");
    if (truth.empty())
        throw ValidationError("labelings must be non-empty");

    std::map<int, std::size_t> tmap, pmap;
    for (int t : truth) tmap.emplace(t, tmap.size());
    for (int p : predicted) pmap.emplace(p, pmap.size());

    Contingency c;
    c.counts.assign(tmap.size(), std::vector<double>(pmap.size(), 0.0));
    c.truth_sizes.assign(tmap.size(), 0.0);
    c.predicted_sizes.assign(pmap.size(), 0.0);
    c.n = static_cast<double>(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::size_t ti = tmap.at(truth[i]);
        const std::size_t pi = pmap.at(predicted[i]);
        c.counts[ti][pi] += 1.0;
        c.truth_sizes[ti] += 1.0;
        c.predicted_sizes[pi] += 1.0;
    }
    return c;
}

bool same_partition(std::span<const int> a, std::span<const int> b) {
    std::map<int, int> fa, fb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int ca = fa.emplace(a[i], static_cast<int>(fa.size())).first->second;
        const int cb = fb.emplace(b[i], static_cast<int>(fb.size())).first->second;
        if (ca != cb) return false;
    }
    return true;
}

double choose2(double m) { return 0.5 * m * (m - 1.0); }

} // namespace

KMeansResult kmeans(const DenseMatrix& points, std::size_t k, const KMeansConfig& cfg) {
    if (points.rows() == 0 || points.cols() == 0)
        throw ValidationError("kmeans: empty input");
    if (k < 1 || k > points.rows())
        throw ValidationError("kmeans: k must be in [1, n]");
    if (!all_finite(points))
        throw ValidationError("kmeans: non-finite input");
    if (cfg.restarts < 1)
        throw ValidationError("kmeans: need at least one restart");

    LloydOutcome best;
    bool have = false;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        LloydOutcome run = run_lloyd(points, k, cfg, mix_seed(cfg.seed, r));
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }

    KMeansResult res;
    res.labels = std::move(best.labels);
    res.centroids = std::move(best.centroids);
    res.inertia = best.inertia;
    res.iterations = best.iterations;
    return res;
}

std::vector<std::size_t> min_cost_assignment(const DenseMatrix& cost) {
    const std::size_t n = cost.rows();
    if (n == 0 || cost.cols() != n)
        throw ValidationError("min_cost_assignment: cost matrix must be square and non-empty");
    if (!all_finite(cost))
        throw ValidationError("min_cost_assignment: non-finite cost");

    const double inf = std::numeric_limits<double>::infinity();
    // Potentials-based shortest augmenting path, 1-indexed with a dummy column 0.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

double adjusted_rand_index(std::span<const int> truth, std::span<const int> predicted) {
    const Contingency c = cross_tabulate(truth, predicted);
    if (c.n < 2.0) return 1.0;

    double index = 0.0;
    for (const auto& row : c.counts)
        for (double cell : row) index += choose2(cell);
    double sum_a = 0.0, sum_b = 0.0;
    for (double a : c.truth_sizes) sum_a += choose2(a);
    for (double b : c.predicted_sizes) sum_b += choose2(b);

    const double expected = sum_a * sum_b / choose2(c.n);
    const double maximum = 0.5 * (sum_a + sum_b);
    const double denom = maximum - expected;
    if (denom == 0.0) return same_partition(truth, predicted) ? 1.0 : 0.0;
    return (index - expected) / denom;
}

double normalized_mutual_information(std::span<const int> truth, std::span<const int> predicted) {
    const Contingency c = cross_tabulate(truth, predicted);
    double h_truth = 0.0, h_pred = 0.0, mi = 0.0;
    for (double a : c.truth_sizes)
        if (a > 0.0) h_truth -= (a / c.n) * std::log(a / c.n);
    for (double b : c.predicted_sizes)
        if (b > 0.0) h_pred -= (b / c.n) * std::log(b / c.n);
    for (std::size_t i = 0; i < c.counts.size(); ++i)
        for (std::size_t j = 0; j < c.counts[i].size(); ++j) {
            const double cell = c.counts[i][j];
            if (cell > 0.0)
                mi += (cell / c.n) *
                      std::log(cell * c.n / (c.truth_sizes[i] * c.predicted_sizes[j]));
        }
    const double denom = h_truth + h_pred;
    if (denom == 0.0) return 0.0;
    return 2.0 * mi / denom;
}

double purity(std::span<const int> truth, std::span<const int> predicted) {
    const Contingency c = cross_tabulate(truth, predicted);
    double matched = 0.0;
    for (std::size_t j = 0; j < c.predicted_sizes.size(); ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < c.counts.size(); ++i) best = std::max(best, c.counts[i][j]);
        matched += best;
    }
    return matched / c.n;
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
    const Contingency c = cross_tabulate(truth, predicted);
    const std::size_t k = std::max(c.truth_sizes.size(), c.predicted_sizes.size());
    DenseMatrix cost(k, k);
    for (std::size_t j = 0; j < c.predicted_sizes.size(); ++j)
        for (std::size_t i = 0; i < c.counts.size(); ++i) cost(j, i) = -c.counts[i][j];
    const std::vector<std::size_t> assignment = min_cost_assignment(cost);

    double matched = 0.0;
    for (std::size_t j = 0; j < c.predicted_sizes.size(); ++j) {
        const std::size_t i = assignment[j];
        if (i < c.counts.size()) matched += c.counts[i][j];
    }
    return matched / c.n;
}

ClusteringScores score_clustering(std::span<const int> truth, std::span<const int> predicted) {
    ClusteringScores s;
    s.ari = adjusted_rand_index(truth, predicted);
    s.nmi = normalized_mutual_information(truth, predicted);
    s.purity = purity(truth, predicted);
    s.accuracy = accuracy(truth, predicted);
    return s;
}

ScaleSweepReport sweep_scales(const solver::MultiScaleFactors& factors,
                              std::span<const int> truth, const KMeansConfig& cfg,
                              std::size_t k) {
    if (factors.pairs.empty())
        throw ValidationError("sweep_scales: no factor pairs");
    const std::size_t n = factors.pairs.front().h.cols();
    if (truth.size() != n)
        throw ValidationError("sweep_scales: truth length does not match sample count");
    if (k == 0) {
        std::map<int, std::size_t> distinct;
        for (int t : truth) distinct.emplace(t, distinct.size());
        k = distinct.size();
    }

    ScaleSweepReport report;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < factors.pairs.size(); ++t) {
        const DenseMatrix& h = factors.pairs[t].h;
        const DenseMatrix points = transpose(h);
        const KMeansResult km = kmeans(points, k, cfg);

        ScaleSweepEntry entry;
        entry.scale_index = t;
        entry.scale = t < factors.scales.size() ? factors.scales[t] : 0.0;
        entry.scores = score_clustering(truth, km.labels);
        if (entry.scores.mean() > best_mean) {
            best_mean = entry.scores.mean();
            report.best_index = t;
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

IncrementReport increment_analysis(const solver::MultiScaleFactors& factors,
                                   const std::vector<scalegraph::ScaleGraph>& graphs) {
    const std::size_t count = factors.pairs.size();
    if (graphs.size() != count)
        throw ValidationError("increment_analysis: graphs and factors disagree in length");
    if (factors.scales.size() != count)
        throw ValidationError("increment_analysis: scales and factors disagree in length");
    if (count < 4)
        throw ValidationError("increment_analysis: need at least four scales");

    IncrementReport report;
    for (std::size_t t = 1; t < count; ++t) {
        report.scale_deltas.push_back(factors.scales[t] - factors.scales[t - 1]);
        report.laplacian_deltas.push_back(
            frobenius_distance(graphs[t].laplacian, graphs[t - 1].laplacian));
        report.embedding_deltas.push_back(
            frobenius_distance(factors.pairs[t].h, factors.pairs[t - 1].h));
    }

    const auto correlate = [&](const std::string& name, const std::vector<double>& a,
                               const std::vector<double>& b) {
        CorrelationEntry entry;
        entry.pair = name;
        try {
            entry.result = numerics::pearson(a, b);
        } catch (const DegenerateInputError& e) {
            entry.note = e.what();
        }
        report.correlations.push_back(std::move(entry));
    };
    correlate("scale_vs_laplacian", report.scale_deltas, report.laplacian_deltas);
    correlate("laplacian_vs_embedding", report.laplacian_deltas, report.embedding_deltas);
    correlate("scale_vs_embedding", report.scale_deltas, report.embedding_deltas);
    return report;
}

} // namespace pnmf::evaluation
