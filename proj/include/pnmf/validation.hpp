#pragma once

#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"
#include "pnmf/scalegraph.hpp"
#include "pnmf/solver.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace pnmf::validation {

/// Verdict of one executable check. `observed` carries the measured
/// quantities (worst ratios, violation counts, bound sides, ...) so reports
/// stay machine-readable; `applicable` is false when a check's hypotheses are
/// not met, in which case `passed` stays true and `detail` says why.
struct TheoremReport {
    std::string name;
    bool passed = false;
    bool applicable = true;
    std::string instance;                     ///< short input descriptor
    std::string detail;
    std::map<std::string, double> observed;   ///< deterministic key order
};

/// Sufficiency on a grid spanning (0, delta_max] (every grid epsilon's
/// component count is realized at some canonical scale) and minimality by
/// element deletion. The grid is augmented with one probe inside each
/// canonical interval so minimality does not depend on grid resolution.
TheoremReport verify_scale_set(const SymmetricMatrix& dist, double cutoff,
                               std::size_t grid_size = 1000);

/// Finite Lipschitz ratios ||dL||_F / d_eps within distance-set intervals and
/// across consecutive canonical pairs. Passes when both maxima are finite and
/// the pooled within-interval ratios satisfy max <= 10 * median.
TheoremReport verify_laplacian_lipschitz(const SymmetricMatrix& dist,
                                         const persistence::ScaleSet& scales,
                                         std::size_t samples_per_interval = 3,
                                         double alpha = 1.5);

/// Spectral checks across consecutive scales: (1) |d eigenvalue| bounded by
/// the observed Lipschitz constant times d_eps, (2) eigenvalue monotonicity
/// within absolute slack 1e-8, (3) strictly decreasing nullity, cross-checked
/// against the union-find component count at every scale.
TheoremReport verify_spectral(const SymmetricMatrix& dist,
                              const persistence::ScaleSet& scales, double alpha = 1.5,
                              double slack = 1e-8);

/// Trace monotonicity at half-step granularity (relative slack 1e-12) and,
/// when the run used tol_inner <= 1e-8, the KKT exit residual bound
/// 1e-3 * (1 + ||X||_F) at every recorded subproblem exit.
TheoremReport verify_solver(const solver::MultiScaleFactors& result, double x_norm,
                            double tol_inner_used, double rel_slack = 1e-12);

/// Evaluates the increment-bound constants (C_X, C_H, l, C, a, b, rho) from a
/// completed solution and asserts the uniform bound
///   max_t ||dH_t||_F <= (lambda_graph * C_H / (lambda_ridge - C)) * max_t ||dL_t||_F
/// only when lambda_ridge > C and the rank/activity hypotheses hold;
/// otherwise reports "hypothesis not met" without failing.
TheoremReport verify_increment_bounds(const DenseMatrix& x,
                                      const solver::MultiScaleFactors& result,
                                      const std::vector<scalegraph::ScaleGraph>& graphs,
                                      const solver::SolverConfig& cfg);

} // namespace pnmf::validation
