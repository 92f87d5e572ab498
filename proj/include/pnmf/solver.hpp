#pragma once

#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"
#include "pnmf/scalegraph.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace pnmf::solver {

/// How the scale list for a multi-scale run is chosen.
enum class ScaleMode {
    canonical,       ///< the death-time scale set
    uds,             ///< evenly indexed subset of the distance-scale set
    rds,             ///< random subset of the distance-scale set (seeded)
    mss,             ///< one random scale per canonical interval (seeded)
    explicit_list,   ///< caller-provided scales
};

struct SolverConfig {
    std::size_t rank = 0;             ///< d; 0 means ceil(sqrt(n)) at solve time
    double lambda_graph = 1.0;        ///< weight of Tr(H L H^T)
    double lambda_coupling = 1.0;     ///< weight of ||H_t - H_{t-1}||_F^2
    double lambda_ridge = 1.0;        ///< weight of ||H_t||_F^2
    double alpha = 1.5;               ///< kernel decay exponent
    double margin = 0.05;             ///< cutoff margin for delta_max
    double tol_inner = 1e-4;          ///< relative objective change per subproblem
    double tol_outer = 1e-4;          ///< relative global objective change per sweep
    std::size_t max_inner = 200;
    std::size_t max_outer = 50;
    double mu = 1e-9;                 ///< floor applied on the descent side of the step
    double nu = 1e-9;                 ///< damping added to step denominators
    ScaleMode scale_mode = ScaleMode::canonical;
    std::vector<double> explicit_scales;   ///< used by ScaleMode::explicit_list
    std::size_t max_scales = 0;       ///< 0 = no cap; else subsample to at most this many
    enum class Init { shared_nndsvda, per_scale_random };
    Init init = Init::shared_nndsvda;
    std::uint64_t seed = 0;
    bool normalize_output = true;
    std::size_t threads = 1;          ///< >1 falls back to the sequential reference path
};

/// One factor pair: w is p x d, h is d x n, both nonnegative.
struct FactorPair {
    DenseMatrix w;
    DenseMatrix h;
};

/// Everything a single-scale subproblem needs to evaluate its objective
///   f(W,H) = ||X - WH||_F^2 + lg Tr(H L H^T)
///          + lc (||H - H_prev||_F^2 + ||H - H_next||_F^2) + lr ||H||_F^2
/// with absent neighbors contributing nothing. Non-owning.
struct ScaleContext {
    const DenseMatrix* x = nullptr;
    const scalegraph::ScaleGraph* graph = nullptr;
    const DenseMatrix* h_prev = nullptr;
    const DenseMatrix* h_next = nullptr;
    double lambda_graph = 0.0;
    double lambda_coupling = 0.0;
    double lambda_ridge = 0.0;
};

double subobjective(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h);

DenseMatrix gradient_w(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h);
DenseMatrix gradient_h(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h);

/// Largest violation of the first-order conditions:
/// max_ij |min(W_ij, (grad_W)_ij)| together with the same for H.
/// Zero exactly at a stationary point of the constrained subproblem.
double kkt_residual(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h);

struct StepResult {
    FactorPair next;
    double objective_after_h = 0.0;   ///< f(W, H') - H moves first
    double objective_after_w = 0.0;   ///< f(W', H')
};

/// One damped multiplicative update: H half-step, then W half-step against
/// the fresh H. Neither half-step increases the subproblem objective. At
/// boundary scales the step-size denominator uses the corrected coefficient
/// (lambda_coupling * present_neighbors + lambda_ridge) so that the step stays
/// the minimizer of the matching auxiliary function.
StepResult update_step(const ScaleContext& ctx, const FactorPair& current,
                       const SolverConfig& cfg);

struct SubproblemResult {
    FactorPair factors;
    std::size_t inner_iterations = 0;
    bool hit_iteration_cap = false;
    double kkt = 0.0;                         ///< residual at exit
    double objective = 0.0;                   ///< f at exit
    std::vector<double> halfstep_objectives;  ///< f after every half-step, in order
};

/// Repeats update_step until the relative change of f drops below tol_inner
/// or max_inner is reached.
SubproblemResult solve_subproblem(const ScaleContext& ctx, FactorPair start,
                                  const SolverConfig& cfg);

struct SubproblemExit {
    std::size_t sweep = 0;            ///< 0-based outer sweep
    std::size_t scale = 0;            ///< scale index
    std::size_t inner_iterations = 0;
    bool hit_iteration_cap = false;
    double kkt_residual = 0.0;
    double objective = 0.0;
};

struct MultiScaleFactors {
    std::vector<double> scales;            ///< ascending
    std::vector<FactorPair> pairs;         ///< index-aligned with scales
    /// Coupled objective after every half-step of every subproblem visit,
    /// starting from the value at initialization; recorded before any output
    /// normalization. Nonincreasing up to relative slack 1e-12.
    std::vector<double> objective_trace;
    std::vector<SubproblemExit> exits;
    std::size_t outer_iterations = 0;
    bool converged = false;
    /// (scale index, column) pairs whose basis column summed to zero and was
    /// left untouched by normalization.
    std::vector<std::pair<std::size_t, std::size_t>> unnormalized_columns;
};

/// Coupled objective over all scales; the pairwise coupling term is counted
/// once per adjacent pair.
double total_objective(const DenseMatrix& x, const std::vector<scalegraph::ScaleGraph>& graphs,
                       const std::vector<FactorPair>& pairs, double lambda_graph,
                       double lambda_coupling, double lambda_ridge);

/// Scale list for the configured mode, built from the distance matrix.
persistence::ScaleSet select_scales(const SymmetricMatrix& dist, const SolverConfig& cfg);

/// Block-coordinate sweeps over the given graphs in ascending scale order.
/// Within a sweep, scale t sees the already-updated H_{t-1} and the previous
/// sweep's H_{t+1}. Deterministic for fixed (x, graphs, cfg).
MultiScaleFactors solve(const DenseMatrix& x, const std::vector<scalegraph::ScaleGraph>& graphs,
                        const SolverConfig& cfg);

/// Full pipeline: pairwise distances, scale selection, graph family, solve.
MultiScaleFactors solve_pnmf(const DenseMatrix& x, const SolverConfig& cfg);

/// Plain factorization: no graph, no coupling, no ridge. Returns a
/// single-scale result whose trace is comparable with solve_gnmf's.
MultiScaleFactors solve_nmf(const DenseMatrix& x, std::size_t rank, const SolverConfig& cfg);

/// Single-scale graph-regularized factorization.
MultiScaleFactors solve_gnmf(const DenseMatrix& x, const scalegraph::ScaleGraph& graph,
                             std::size_t rank, double lambda_graph, const SolverConfig& cfg);

/// Deterministic SVD-seeded nonnegative initialization; zero entries are
/// replaced by the mean of x and rank-deficient tails degrade to mean-filled
/// columns. Requires rank <= min(p, n).
FactorPair nndsvda_init(const DenseMatrix& x, std::size_t rank);

/// Scale each column of w to unit sum, moving the mass into the matching row
/// of h so the product is unchanged. Returns the indices of zero-sum columns
/// that were left as-is.
std::vector<std::size_t> normalize_factors(FactorPair& factors);

} // namespace pnmf::solver
