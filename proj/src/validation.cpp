#include "pnmf/validation.hpp"

#include "pnmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace pnmf::validation {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string size_tag(std::size_t n) { return "n=" + std::to_string(n); }

std::vector<double> distinct_positive_distances(const SymmetricMatrix& dist) {
    std::vector<double> values;
    for (std::size_t i = 0; i < dist.order(); ++i)
        for (std::size_t j = i + 1; j < dist.order(); ++j)
            if (dist(i, j) > 0.0) values.push_back(dist(i, j));
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    for (double v : values)
        if (out.empty() || v - out.back() > 1e-12 * v) out.push_back(v);
    return out;
}

} // namespace

TheoremReport verify_scale_set(const SymmetricMatrix& dist, double cutoff,
                               std::size_t grid_size) {
    if (grid_size < 1)
        throw ValidationError("verify_scale_set: grid_size must be positive");

    TheoremReport rep;
    rep.name = "scale_set";
    rep.instance = size_tag(dist.order());

    const persistence::H0Diagram diagram = persistence::compute_h0_diagram(dist, cutoff);
    const persistence::ScaleSet canonical = persistence::canonical_scale_set(diagram);

    // Grid spanning (0, cutoff], plus one probe inside every canonical
    // interval so minimality does not depend on the grid resolution.
    std::vector<double> samples;
    samples.reserve(grid_size + canonical.size());
    for (std::size_t g = 1; g <= grid_size; ++g)
        samples.push_back(cutoff * static_cast<double>(g) / static_cast<double>(grid_size));
    double prev = 0.0;
    for (double eps : canonical) {
        samples.push_back(prev + 0.5 * (eps - prev));
        prev = eps;
    }

    std::vector<std::size_t> canonical_counts;
    canonical_counts.reserve(canonical.size());
    for (double eps : canonical) canonical_counts.push_back(persistence::betti0_at(dist, eps));
    const std::set<std::size_t> realized(canonical_counts.begin(), canonical_counts.end());

    std::vector<std::size_t> sample_counts;
    sample_counts.reserve(samples.size());
    std::size_t sufficiency_violations = 0;
    for (double eps : samples) {
        const std::size_t count = persistence::betti0_at(dist, eps);
        sample_counts.push_back(count);
        if (!realized.contains(count)) ++sufficiency_violations;
    }

    // Minimality: removing any one element must leave some sample's component
    // count unrealized.
    std::size_t minimality_failures = 0;
    for (std::size_t j = 0; j < canonical.size(); ++j) {
        std::set<std::size_t> reduced;
        for (std::size_t i = 0; i < canonical.size(); ++i)
            if (i != j) reduced.insert(canonical_counts[i]);
        bool breaks = false;
        for (std::size_t count : sample_counts) {
            if (!reduced.contains(count)) {
                breaks = true;
                break;
            }
        }
        if (!breaks) ++minimality_failures;
    }

    rep.observed["canonical_count"] = static_cast<double>(canonical.size());
    rep.observed["grid_size"] = static_cast<double>(grid_size);
    rep.observed["minimality_failures"] = static_cast<double>(minimality_failures);
    rep.observed["sample_count"] = static_cast<double>(samples.size());
    rep.observed["sufficiency_violations"] = static_cast<double>(sufficiency_violations);
    rep.passed = sufficiency_violations == 0 && minimality_failures == 0;
    rep.detail = rep.passed ? "sufficient on the sampled grid and minimal under deletion"
                            : "sufficiency or minimality violated";
    return rep;
}

TheoremReport verify_laplacian_lipschitz(const SymmetricMatrix& dist,
                                         const persistence::ScaleSet& scales,
                                         std::size_t samples_per_interval, double alpha) {
    if (scales.size() < 2)
        throw ValidationError("verify_laplacian_lipschitz: need at least two scales");
    const std::size_t spi = std::max<std::size_t>(samples_per_interval, 2);

    TheoremReport rep;
    rep.name = "laplacian_lipschitz";
    rep.instance = size_tag(dist.order());

    // Interval breakpoints: distinct distances below the top scale, then the
    // top scale itself. The map eps -> L(eps) is smooth strictly inside each
    // interval and jumps at the breakpoints.
    const double top = scales.max();
    std::vector<double> breakpoints;
    for (double d : distinct_positive_distances(dist))
        if (d < top) breakpoints.push_back(d);
    breakpoints.push_back(top);

    std::vector<double> within;
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        const double lo = breakpoints[k];
        const double hi = breakpoints[k + 1];
        scalegraph::ScaleGraph prev_graph;
        double prev_eps = 0.0;
        for (std::size_t i = 0; i < spi; ++i) {
            const double eps =
                lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(spi + 1);
            scalegraph::ScaleGraph g = scalegraph::build_graph(dist, eps, alpha);
            if (i > 0)
                within.push_back(frobenius_distance(g.laplacian, prev_graph.laplacian) /
                                 (eps - prev_eps));
            prev_graph = std::move(g);
            prev_eps = eps;
        }
    }

    std::vector<double> adjacent;
    {
        scalegraph::ScaleGraph prev_graph = scalegraph::build_graph(dist, scales[0], alpha);
        for (std::size_t t = 1; t < scales.size(); ++t) {
            scalegraph::ScaleGraph g = scalegraph::build_graph(dist, scales[t], alpha);
            adjacent.push_back(frobenius_distance(g.laplacian, prev_graph.laplacian) /
                               (scales[t] - scales[t - 1]));
            prev_graph = std::move(g);
        }
    }

    const double within_max = within.empty() ? 0.0 : *std::max_element(within.begin(), within.end());
    const double within_median = median(within);
    const double adjacent_max =
        adjacent.empty() ? 0.0 : *std::max_element(adjacent.begin(), adjacent.end());
    const double adjacent_median = median(adjacent);

    rep.observed["adjacent_max"] = adjacent_max;
    rep.observed["adjacent_median"] = adjacent_median;
    rep.observed["interval_count"] = static_cast<double>(breakpoints.size() - 1);
    rep.observed["within_max"] = within_max;
    rep.observed["within_median"] = within_median;
    rep.observed["within_ratio_count"] = static_cast<double>(within.size());

    const bool finite = std::isfinite(within_max) && std::isfinite(adjacent_max);
    const bool stable = within_max <= 10.0 * within_median;
    rep.passed = finite && stable;
    rep.detail = rep.passed
                     ? "finite ratios, within-interval spread under 10x the median"
                     : (finite ? "within-interval ratio spread exceeds 10x the median"
                               : "non-finite ratio encountered");
    return rep;
}

TheoremReport verify_spectral(const SymmetricMatrix& dist, const persistence::ScaleSet& scales,
                              double alpha, double slack) {
    if (scales.empty())
        throw ValidationError("verify_spectral: need at least one scale");

    TheoremReport rep;
    rep.name = "spectral";
    rep.instance = size_tag(dist.order());

    std::vector<std::vector<double>> spectra;
    std::vector<std::size_t> nullities;
    std::vector<scalegraph::ScaleGraph> graphs;
    spectra.reserve(scales.size());
    for (double eps : scales) {
        scalegraph::ScaleGraph g = scalegraph::build_graph(dist, eps, alpha);
        spectra.push_back(numerics::eigenvalues_sym(g.laplacian));
        nullities.push_back(scalegraph::nullity(g.laplacian));
        graphs.push_back(std::move(g));
    }

    // Cross-check the spectral component count against the union-find one.
    std::size_t crosscheck_mismatches = 0;
    for (std::size_t t = 0; t < scales.size(); ++t)
        if (nullities[t] != persistence::betti0_at(dist, scales[t])) ++crosscheck_mismatches;

    double eig_ratio_max = 0.0;
    double weyl_excess_max = -std::numeric_limits<double>::infinity();
    double monotonicity_violation_max = -std::numeric_limits<double>::infinity();
    double nullity_min_decrement = std::numeric_limits<double>::infinity();
    double nullity_max_decrement = -std::numeric_limits<double>::infinity();
    const std::size_t transitions = scales.size() - 1;

    for (std::size_t t = 0; t + 1 < scales.size(); ++t) {
        const double deps = scales[t + 1] - scales[t];
        const double dl = frobenius_distance(graphs[t + 1].laplacian, graphs[t].laplacian);
        double dgamma_max = 0.0;
        for (std::size_t k = 0; k < spectra[t].size(); ++k) {
            const double dgamma = spectra[t + 1][k] - spectra[t][k];
            dgamma_max = std::max(dgamma_max, std::abs(dgamma));
            monotonicity_violation_max = std::max(monotonicity_violation_max, -dgamma);
        }
        eig_ratio_max = std::max(eig_ratio_max, dgamma_max / deps);
        // Weyl: an eigenvalue moves no farther than the operator perturbation.
        weyl_excess_max = std::max(weyl_excess_max, dgamma_max - dl);

        const double decrement =
            static_cast<double>(nullities[t]) - static_cast<double>(nullities[t + 1]);
        nullity_min_decrement = std::min(nullity_min_decrement, decrement);
        nullity_max_decrement = std::max(nullity_max_decrement, decrement);
    }
    if (transitions == 0) {
        weyl_excess_max = 0.0;
        monotonicity_violation_max = 0.0;
        nullity_min_decrement = 0.0;
        nullity_max_decrement = 0.0;
    }

    rep.observed["crosscheck_mismatches"] = static_cast<double>(crosscheck_mismatches);
    rep.observed["eig_lipschitz_max"] = eig_ratio_max;
    rep.observed["monotonicity_max_violation"] = monotonicity_violation_max;
    rep.observed["nullity_max_decrement"] = nullity_max_decrement;
    rep.observed["nullity_min_decrement"] = nullity_min_decrement;
    rep.observed["transition_count"] = static_cast<double>(transitions);
    rep.observed["weyl_max_excess"] = weyl_excess_max;

    const bool lipschitz_ok =
        std::isfinite(eig_ratio_max) && weyl_excess_max <= 1e-12 * (1.0 + eig_ratio_max);
    const bool monotone_ok = monotonicity_violation_max <= slack;
    const bool nullity_ok = transitions == 0 || nullity_min_decrement >= 1.0;
    rep.passed = lipschitz_ok && monotone_ok && nullity_ok && crosscheck_mismatches == 0;
    rep.detail = rep.passed ? "eigenvalues Lipschitz, monotone, nullity strictly decreasing"
                            : "spectral clause violated";
    return rep;
}

TheoremReport verify_solver(const solver::MultiScaleFactors& result, double x_norm,
                            double tol_inner_used, double rel_slack) {
    TheoremReport rep;
    rep.name = "solver";
    rep.instance = "trace_points=" + std::to_string(result.objective_trace.size()) +
                   ",exits=" + std::to_string(result.exits.size());

    double max_relative_increase = -std::numeric_limits<double>::infinity();
    std::size_t trace_violations = 0;
    for (std::size_t i = 0; i + 1 < result.objective_trace.size(); ++i) {
        const double before = result.objective_trace[i];
        const double after = result.objective_trace[i + 1];
        const double rel = (after - before) / std::max(std::abs(before), 1e-300);
        max_relative_increase = std::max(max_relative_increase, rel);
        if (rel > rel_slack) ++trace_violations;
    }
    if (result.objective_trace.size() < 2) max_relative_increase = 0.0;

    const bool kkt_checked = tol_inner_used <= 1e-8;
    const double kkt_bound = 1e-3 * (1.0 + x_norm);
    double kkt_max = 0.0;
    std::size_t kkt_violations = 0;
    for (const auto& exit : result.exits) {
        kkt_max = std::max(kkt_max, exit.kkt_residual);
        if (kkt_checked && exit.kkt_residual > kkt_bound) ++kkt_violations;
    }

    rep.observed["kkt_bound"] = kkt_bound;
    rep.observed["kkt_checked"] = kkt_checked ? 1.0 : 0.0;
    rep.observed["kkt_max"] = kkt_max;
    rep.observed["kkt_violations"] = static_cast<double>(kkt_violations);
    rep.observed["max_relative_increase"] = max_relative_increase;
    rep.observed["trace_violations"] = static_cast<double>(trace_violations);

    rep.passed = trace_violations == 0 && kkt_violations == 0;
    if (rep.passed)
        rep.detail = kkt_checked ? "trace nonincreasing and KKT residuals within bound"
                                 : "trace nonincreasing; KKT bound not asserted at this tolerance";
    else
        rep.detail = trace_violations > 0 ? "objective trace increased beyond slack"
                                          : "KKT residual bound violated";
    return rep;
}

TheoremReport verify_increment_bounds(const DenseMatrix& x,
                                      const solver::MultiScaleFactors& result,
                                      const std::vector<scalegraph::ScaleGraph>& graphs,
                                      const solver::SolverConfig& cfg) {
    const std::size_t count = result.pairs.size();
    if (graphs.size() != count)
        throw ValidationError("verify_increment_bounds: graphs and factors disagree in length");

    TheoremReport rep;
    rep.name = "increment_bounds";
    rep.instance = size_tag(x.cols()) + ",scales=" + std::to_string(count);
    if (count < 2) {
        rep.applicable = false;
        rep.passed = true;
        rep.detail = "hypothesis not met: needs at least two scales";
        return rep;
    }

    const double c_x = frobenius_norm(multiply_at_b(x, x));
    double c_h = 0.0;
    double ell = std::numeric_limits<double>::infinity();
    double activity_min = std::numeric_limits<double>::infinity();
    for (const auto& pair : result.pairs) {
        c_h = std::max(c_h, frobenius_norm(pair.h));
        const DenseMatrix gram = multiply_a_bt(pair.h, pair.h);
        const std::vector<double> gamma =
            numerics::eigenvalues_sym(SymmetricMatrix::from_dense(gram));
        ell = std::min(ell, gamma.front());
        activity_min = std::min(activity_min, std::min(min_entry(pair.w), min_entry(pair.h)));
    }

    std::vector<double> dh, dl;
    for (std::size_t t = 1; t < count; ++t) {
        dh.push_back(frobenius_distance(result.pairs[t].h, result.pairs[t - 1].h));
        dl.push_back(frobenius_distance(graphs[t].laplacian, graphs[t - 1].laplacian));
    }
    const double max_dh = *std::max_element(dh.begin(), dh.end());
    const double max_dl = *std::max_element(dl.begin(), dl.end());

    const std::size_t n = x.cols();
    const std::size_t d = result.pairs.front().h.rows();
    const bool rank_ok = ell > 1e-12 * c_h * c_h;
    const bool activity_ok = activity_min > 0.0;

    rep.observed["C_H"] = c_h;
    rep.observed["C_X"] = c_x;
    rep.observed["activity_min"] = activity_min;
    rep.observed["ell"] = ell;
    rep.observed["max_dH"] = max_dh;
    rep.observed["max_dL"] = max_dl;

    double c_total = std::numeric_limits<double>::infinity();
    if (rank_ok) {
        const double c1 = 1.0 / ell + 2.0 * c_h * c_h / (ell * ell);
        const double c2 = c1 * c_h + c_h / ell;
        const double excess = n > d ? std::sqrt(static_cast<double>(n - d)) : 0.0;
        c_total = (c1 * excess + c2 * c_h / ell) * c_x;
        rep.observed["C"] = c_total;
    }

    const double denom = 2.0 * cfg.lambda_coupling + cfg.lambda_ridge - c_total;
    if (denom > 0.0) {
        const double a = cfg.lambda_graph * c_h / denom;
        const double b = cfg.lambda_coupling / denom;
        rep.observed["a"] = a;
        rep.observed["b"] = b;
        rep.observed["rho"] = b > 0.0 ? (1.0 - std::sqrt(1.0 - 4.0 * b * b)) / (2.0 * b) : 0.0;
    }

    if (!rank_ok || !activity_ok || !(cfg.lambda_ridge > c_total)) {
        rep.applicable = false;
        rep.passed = true;
        rep.detail = "hypothesis not met: ";
        rep.detail += !rank_ok ? "rank-deficient H"
                               : (!activity_ok ? "active nonnegativity constraints"
                                               : "lambda_ridge does not exceed C");
        return rep;
    }

    const double rhs = cfg.lambda_graph * c_h / (cfg.lambda_ridge - c_total) * max_dl;
    rep.observed["uniform_rhs"] = rhs;
    rep.passed = max_dh <= rhs;

    // Pointwise bound, truncated to the available index range; reported only.
    const double b = rep.observed["b"];
    const double a = rep.observed["a"];
    const double rho = rep.observed["rho"];
    double pointwise_ratio_max = 0.0;
    for (std::size_t t = 0; t < dh.size(); ++t) {
        double sum = 0.0;
        for (std::size_t k = 0; k < dl.size(); ++k) {
            const std::size_t gap = t > k ? t - k : k - t;
            sum += (gap == 0 ? 1.0 : std::pow(rho, static_cast<double>(gap))) * dl[k];
        }
        const double rhs_t = (b > 0.0 ? a / std::sqrt(1.0 - 4.0 * b * b) : a) * sum;
        if (rhs_t > 0.0) pointwise_ratio_max = std::max(pointwise_ratio_max, dh[t] / rhs_t);
    }
    rep.observed["pointwise_max_ratio"] = pointwise_ratio_max;

    rep.detail = rep.passed ? "uniform bound holds" : "uniform bound violated";
    return rep;
}

} // namespace pnmf::validation
