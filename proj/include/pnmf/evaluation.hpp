#pragma once

#include "pnmf/matrix.hpp"
#include "pnmf/scalegraph.hpp"
#include "pnmf/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnmf::evaluation {

struct KMeansConfig {
    std::size_t restarts = 10;
    std::size_t max_iterations = 300;
    double shift_tol = 1e-8;          ///< stop when every centroid moves less than this
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<int> labels;          ///< cluster index in 0..k-1 per sample
    DenseMatrix centroids;            ///< k x d
    double inertia = 0.0;
    std::size_t iterations = 0;       ///< Lloyd iterations of the winning restart
};

/// Lloyd with plus-plus seeding; best of cfg.restarts by inertia, earlier
/// restart winning ties. points is n x d with one sample per row. Empty
/// clusters are re-seeded at the point farthest from its assigned centroid.
KMeansResult kmeans(const DenseMatrix& points, std::size_t k, const KMeansConfig& cfg = {});

/// Minimum-cost assignment on a square cost matrix; returns the column
/// assigned to each row. O(k^3).
std::vector<std::size_t> min_cost_assignment(const DenseMatrix& cost);

double adjusted_rand_index(std::span<const int> truth, std::span<const int> predicted);
double normalized_mutual_information(std::span<const int> truth, std::span<const int> predicted);
double purity(std::span<const int> truth, std::span<const int> predicted);
/// Fraction matched under the best cluster-to-class assignment (Hungarian on
/// the negated contingency matrix).
double accuracy(std::span<const int> truth, std::span<const int> predicted);

struct ClusteringScores {
    double ari = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
    double accuracy = 0.0;

    double mean() const { return 0.25 * (ari + nmi + purity + accuracy); }
};

ClusteringScores score_clustering(std::span<const int> truth, std::span<const int> predicted);

struct ScaleSweepEntry {
    std::size_t scale_index = 0;
    double scale = 0.0;
    ClusteringScores scores;
};

struct ScaleSweepReport {
    std::vector<ScaleSweepEntry> entries;
    std::size_t best_index = 0;       ///< argmax of the score mean, ties to the smaller index
};

/// Cluster the columns of every H_t with k-means and score against the truth.
/// k = 0 means the number of distinct truth labels.
ScaleSweepReport sweep_scales(const solver::MultiScaleFactors& factors,
                              std::span<const int> truth, const KMeansConfig& cfg = {},
                              std::size_t k = 0);

struct CorrelationEntry {
    std::string pair;                                  ///< e.g. "scale_vs_laplacian"
    std::optional<numerics::PearsonResult> result;     ///< empty when degenerate
    std::string note;                                  ///< reason when empty
};

struct IncrementReport {
    std::vector<double> scale_deltas;       ///< eps_t - eps_{t-1}
    std::vector<double> laplacian_deltas;   ///< ||L_t - L_{t-1}||_F
    std::vector<double> embedding_deltas;   ///< ||H_t - H_{t-1}||_F
    std::vector<CorrelationEntry> correlations;  ///< scale/laplacian, laplacian/embedding, scale/embedding
};

/// Adjacent-scale increment series and their pairwise correlations. Graphs
/// must be aligned with the factors' scales; needs at least 4 scales.
/// Constant-series degeneracies are surfaced per correlation, not thrown.
IncrementReport increment_analysis(const solver::MultiScaleFactors& factors,
                                   const std::vector<scalegraph::ScaleGraph>& graphs);

} // namespace pnmf::evaluation
