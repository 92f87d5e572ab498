#include "pnmf/solver.hpp"

#include "pnmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace pnmf::solver {

namespace {

void validate_config(const SolverConfig& cfg) {
    if (!(cfg.mu > 0.0) || !(cfg.nu > 0.0))
        throw ValidationError("solver: mu and nu must be positive");
    if (!(cfg.tol_inner > 0.0) || !(cfg.tol_outer > 0.0))
        throw ValidationError("solver: tolerances must be positive");
    if (cfg.max_inner < 1 || cfg.max_outer < 1)
        throw ValidationError("solver: iteration caps must be at least 1");
    if (cfg.lambda_graph < 0.0 || cfg.lambda_coupling < 0.0 || cfg.lambda_ridge < 0.0)
        throw ValidationError("solver: regularization weights must be nonnegative");
    if (!(cfg.alpha > 0.0))
        throw ValidationError("solver: alpha must be positive");
    if (!(cfg.margin > 0.0))
        throw ValidationError("solver: margin must be positive");
}

void validate_data(const DenseMatrix& x) {
    if (x.rows() == 0 || x.cols() == 0)
        throw ValidationError("solver: empty data matrix");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.values()[i];
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("solver: negative or non-finite entry at (" +
                                  std::to_string(i / x.cols()) + "," +
                                  std::to_string(i % x.cols()) + ")");
    }
}

void validate_context(const ScaleContext& ctx) {
    if (ctx.x == nullptr || ctx.graph == nullptr)
        throw ValidationError("solver: context needs data and graph");
}

int neighbor_count(const ScaleContext& ctx) {
    return (ctx.h_prev != nullptr ? 1 : 0) + (ctx.h_next != nullptr ? 1 : 0);
}

double squared_distance(const DenseMatrix& a, const DenseMatrix& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return acc;
}

double squared_norm(const DenseMatrix& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v * v;
    return acc;
}

std::size_t resolve_rank(const SolverConfig& cfg, std::size_t n) {
    return cfg.rank != 0
               ? cfg.rank
               : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step so streams for different salts are unrelated
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

FactorPair random_init(const DenseMatrix& x, std::size_t rank, std::uint64_t seed) {
    double mean = 0.0;
    for (double v : x.values()) mean += v;
    mean /= static_cast<double>(x.size());
    const double scale = std::sqrt(std::max(mean, 1e-12) / static_cast<double>(rank));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    FactorPair f;
    f.w = DenseMatrix(x.rows(), rank);
    f.h = DenseMatrix(rank, x.cols());
    for (double& v : f.w.values()) v = scale * unif(rng);
    for (double& v : f.h.values()) v = scale * unif(rng);
    return f;
}

} // namespace

double subobjective(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h) {
    validate_context(ctx);
    const DenseMatrix wh = multiply(w, h);
    double value = squared_distance(*ctx.x, wh);

    if (ctx.lambda_graph != 0.0) {
        const DenseMatrix hl = multiply_sym(h, ctx.graph->laplacian);
        value += ctx.lambda_graph * frobenius_dot(hl, h);
    }
    if (ctx.lambda_coupling != 0.0) {
        if (ctx.h_prev != nullptr) value += ctx.lambda_coupling * squared_distance(h, *ctx.h_prev);
        if (ctx.h_next != nullptr) value += ctx.lambda_coupling * squared_distance(h, *ctx.h_next);
    }
    if (ctx.lambda_ridge != 0.0) value += ctx.lambda_ridge * squared_norm(h);
    return value;
}

DenseMatrix gradient_w(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h) {
    validate_context(ctx);
    const DenseMatrix hht = multiply_a_bt(h, h);
    DenseMatrix grad = multiply(w, hht);
    const DenseMatrix xht = multiply_a_bt(*ctx.x, h);
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad.values()[i] = 2.0 * (grad.values()[i] - xht.values()[i]);
    return grad;
}

DenseMatrix gradient_h(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h) {
    validate_context(ctx);
    const DenseMatrix wtw = multiply_at_b(w, w);
    DenseMatrix grad = multiply(wtw, h);
    const DenseMatrix wtx = multiply_at_b(w, *ctx.x);

    const bool use_graph = ctx.lambda_graph != 0.0;
    DenseMatrix hl;
    if (use_graph) hl = multiply_sym(h, ctx.graph->laplacian);

    const int nb = neighbor_count(ctx);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        double g = grad.values()[i] - wtx.values()[i];
        if (use_graph) g += ctx.lambda_graph * hl.values()[i];
        if (ctx.lambda_coupling != 0.0) {
            double c = static_cast<double>(nb) * h.values()[i];
            if (ctx.h_prev != nullptr) c -= ctx.h_prev->values()[i];
            if (ctx.h_next != nullptr) c -= ctx.h_next->values()[i];
            g += ctx.lambda_coupling * c;
        }
        g += ctx.lambda_ridge * h.values()[i];
        grad.values()[i] = 2.0 * g;
    }
    return grad;
}

double kkt_residual(const ScaleContext& ctx, const DenseMatrix& w, const DenseMatrix& h) {
    const DenseMatrix gw = gradient_w(ctx, w, h);
    const DenseMatrix gh = gradient_h(ctx, w, h);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        worst = std::max(worst, std::abs(std::min(w.values()[i], gw.values()[i])));
    for (std::size_t i = 0; i < h.size(); ++i)
        worst = std::max(worst, std::abs(std::min(h.values()[i], gh.values()[i])));
    return worst;
}

StepResult update_step(const ScaleContext& ctx, const FactorPair& current,
                       const SolverConfig& cfg) {
    validate_context(ctx);
    const DenseMatrix& x = *ctx.x;
    const DenseMatrix& w = current.w;
    const DenseMatrix& h = current.h;
    const int nb = neighbor_count(ctx);
    const bool use_graph = ctx.lambda_graph != 0.0;

    // H half-step.
    const DenseMatrix grad_h_now = gradient_h(ctx, w, h);
    DenseMatrix hbar = h;
    for (std::size_t i = 0; i < hbar.size(); ++i)
        if (grad_h_now.values()[i] < 0.0) hbar.values()[i] = std::max(h.values()[i], cfg.mu);

    const DenseMatrix wtw = multiply_at_b(w, w);
    DenseMatrix denom_h = multiply(wtw, hbar);
    // Boundary-corrected coefficient: lambda_coupling counts present neighbors.
    const double diag_coeff = ctx.lambda_coupling * static_cast<double>(nb) + ctx.lambda_ridge;
    for (std::size_t i = 0; i < denom_h.rows(); ++i)
        for (std::size_t j = 0; j < denom_h.cols(); ++j) {
            double v = denom_h(i, j) + diag_coeff * hbar(i, j);
            if (use_graph) v += ctx.lambda_graph * hbar(i, j) * ctx.graph->degrees[j];
            denom_h(i, j) = 2.0 * v + cfg.nu;
        }

    StepResult out;
    out.next.h = DenseMatrix(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double step = hbar.values()[i] * grad_h_now.values()[i] / denom_h.values()[i];
        out.next.h.values()[i] = std::max(0.0, h.values()[i] - step);
    }
    out.objective_after_h = subobjective(ctx, w, out.next.h);

    // W half-step against the fresh H.
    const DenseMatrix grad_w_now = gradient_w(ctx, w, out.next.h);
    DenseMatrix wbar = w;
    for (std::size_t i = 0; i < wbar.size(); ++i)
        if (grad_w_now.values()[i] < 0.0) wbar.values()[i] = std::max(w.values()[i], cfg.mu);

    const DenseMatrix hht = multiply_a_bt(out.next.h, out.next.h);
    DenseMatrix denom_w = multiply(wbar, hht);
    for (std::size_t i = 0; i < denom_w.size(); ++i)
        denom_w.values()[i] = 2.0 * denom_w.values()[i] + cfg.nu;

    out.next.w = DenseMatrix(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double step = wbar.values()[i] * grad_w_now.values()[i] / denom_w.values()[i];
        out.next.w.values()[i] = std::max(0.0, w.values()[i] - step);
    }
    out.objective_after_w = subobjective(ctx, out.next.w, out.next.h);
    return out;
}

SubproblemResult solve_subproblem(const ScaleContext& ctx, FactorPair start,
                                  const SolverConfig& cfg) {
    SubproblemResult res;
    res.factors = std::move(start);
    double f_prev = subobjective(ctx, res.factors.w, res.factors.h);
    res.hit_iteration_cap = true;

    for (std::size_t it = 1; it <= cfg.max_inner; ++it) {
        StepResult step = update_step(ctx, res.factors, cfg);
        res.factors = std::move(step.next);
        res.halfstep_objectives.push_back(step.objective_after_h);
        res.halfstep_objectives.push_back(step.objective_after_w);
        res.inner_iterations = it;

        const double f_now = step.objective_after_w;
        const double rel = std::abs(f_prev - f_now) / std::max(std::abs(f_prev), 1e-300);
        f_prev = f_now;
        if (rel < cfg.tol_inner) {
            res.hit_iteration_cap = false;
            break;
        }
    }
    res.objective = f_prev;
    res.kkt = kkt_residual(ctx, res.factors.w, res.factors.h);
    return res;
}

double total_objective(const DenseMatrix& x, const std::vector<scalegraph::ScaleGraph>& graphs,
                       const std::vector<FactorPair>& pairs, double lambda_graph,
                       double lambda_coupling, double lambda_ridge) {
    if (graphs.size() != pairs.size())
        throw ValidationError("total_objective: graphs and pairs disagree in length");
    double value = 0.0;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        const DenseMatrix wh = multiply(pairs[t].w, pairs[t].h);
        value += squared_distance(x, wh);
        if (lambda_graph != 0.0) {
            const DenseMatrix hl = multiply_sym(pairs[t].h, graphs[t].laplacian);
            value += lambda_graph * frobenius_dot(hl, pairs[t].h);
        }
        if (lambda_ridge != 0.0) value += lambda_ridge * squared_norm(pairs[t].h);
        if (lambda_coupling != 0.0 && t > 0)
            value += lambda_coupling * squared_distance(pairs[t].h, pairs[t - 1].h);
    }
    return value;
}

persistence::ScaleSet select_scales(const SymmetricMatrix& dist, const SolverConfig& cfg) {
    const double cutoff = persistence::delta_max(dist, cfg.margin);
    const persistence::ScaleSet canonical =
        persistence::canonical_scale_set(persistence::compute_h0_diagram(dist, cutoff));

    std::vector<double> values;
    switch (cfg.scale_mode) {
        case ScaleMode::canonical:
            values.assign(canonical.begin(), canonical.end());
            break;
        case ScaleMode::uds: {
            const persistence::ScaleSet all = persistence::distance_scale_set(dist, cutoff);
            const std::size_t want = std::min(canonical.size(), all.size());
            if (want < 2 || all.size() < 2) {
                values.assign(all.begin(), all.end());
            } else {
                for (std::size_t i = 0; i < want; ++i) {
                    const std::size_t idx = static_cast<std::size_t>(std::llround(
                        static_cast<double>(i) * static_cast<double>(all.size() - 1) /
                        static_cast<double>(want - 1)));
                    values.push_back(all[idx]);
                }
            }
            break;
        }
        case ScaleMode::rds: {
            const persistence::ScaleSet all = persistence::distance_scale_set(dist, cutoff);
            const std::size_t want = std::min(canonical.size(), all.size());
            if (want >= all.size() || want < 2) {
                values.assign(all.begin(), all.end());
            } else {
                std::vector<std::size_t> interior(all.size() - 2);
                for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = i + 1;
                std::mt19937_64 rng(mix_seed(cfg.seed, 0x7263 /* "rc" */));
                for (std::size_t i = 0; i + 1 < want - 1 && i < interior.size(); ++i) {
                    std::uniform_int_distribution<std::size_t> pick(i, interior.size() - 1);
                    std::swap(interior[i], interior[pick(rng)]);
                }
                std::vector<std::size_t> chosen(interior.begin(),
                                                interior.begin() + (want - 2));
                std::sort(chosen.begin(), chosen.end());
                values.push_back(all[0]);
                for (std::size_t idx : chosen) values.push_back(all[idx]);
                values.push_back(all[all.size() - 1]);
            }
            break;
        }
        case ScaleMode::mss: {
            std::mt19937_64 rng(mix_seed(cfg.seed, 0x6d73 /* "ms" */));
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            double prev = 0.0;
            for (double eps : canonical) {
                values.push_back(eps - unif(rng) * (eps - prev));
                prev = eps;
            }
            break;
        }
        case ScaleMode::explicit_list:
            values = cfg.explicit_scales;
            break;
    }

    if (cfg.max_scales != 0 && values.size() > cfg.max_scales) {
        std::vector<double> capped;
        if (cfg.max_scales == 1) {
            capped.push_back(values.front());
        } else {
            for (std::size_t i = 0; i < cfg.max_scales; ++i) {
                const std::size_t idx = static_cast<std::size_t>(std::llround(
                    static_cast<double>(i) * static_cast<double>(values.size() - 1) /
                    static_cast<double>(cfg.max_scales - 1)));
                capped.push_back(values[idx]);
            }
        }
        values = std::move(capped);
    }
    return persistence::ScaleSet(std::move(values));
}

MultiScaleFactors solve(const DenseMatrix& x, const std::vector<scalegraph::ScaleGraph>& graphs,
                        const SolverConfig& cfg) {
    validate_config(cfg);
    validate_data(x);
    if (graphs.empty())
        throw ValidationError("solver: no scale graphs");
    const std::size_t n = x.cols();
    for (const auto& g : graphs)
        if (g.order() != n)
            throw ValidationError("solver: graph order does not match sample count");

    const std::size_t rank = resolve_rank(cfg, n);
    const std::size_t count = graphs.size();

    MultiScaleFactors res;
    res.scales.reserve(count);
    for (const auto& g : graphs) res.scales.push_back(g.eps);

    res.pairs.reserve(count);
    if (cfg.init == SolverConfig::Init::shared_nndsvda) {
        const FactorPair shared = nndsvda_init(x, rank);
        res.pairs.assign(count, shared);
    } else {
        for (std::size_t t = 0; t < count; ++t)
            res.pairs.push_back(random_init(x, rank, mix_seed(cfg.seed, t)));
    }

    double global = total_objective(x, graphs, res.pairs, cfg.lambda_graph, cfg.lambda_coupling,
                                    cfg.lambda_ridge);
    res.objective_trace.push_back(global);

    for (std::size_t sweep = 0; sweep < cfg.max_outer; ++sweep) {
        const double sweep_start = global;
        for (std::size_t t = 0; t < count; ++t) {
            ScaleContext ctx;
            ctx.x = &x;
            ctx.graph = &graphs[t];
            ctx.h_prev = t > 0 ? &res.pairs[t - 1].h : nullptr;
            ctx.h_next = t + 1 < count ? &res.pairs[t + 1].h : nullptr;
            ctx.lambda_graph = cfg.lambda_graph;
            ctx.lambda_coupling = cfg.lambda_coupling;
            ctx.lambda_ridge = cfg.lambda_ridge;

            const double f_before = subobjective(ctx, res.pairs[t].w, res.pairs[t].h);
            SubproblemResult sub = solve_subproblem(ctx, std::move(res.pairs[t]), cfg);
            res.pairs[t] = std::move(sub.factors);

            // The coupled objective differs from the subproblem only by terms
            // constant in (W_t, H_t), so its change equals the subproblem's.
            double f_last = f_before;
            for (double f_step : sub.halfstep_objectives) {
                global += f_step - f_last;
                f_last = f_step;
                res.objective_trace.push_back(global);
            }
            res.exits.push_back({sweep, t, sub.inner_iterations, sub.hit_iteration_cap, sub.kkt,
                                 sub.objective});
        }
        res.outer_iterations = sweep + 1;
        const double rel = std::abs(sweep_start - global) / std::max(std::abs(sweep_start), 1e-300);
        if (rel < cfg.tol_outer) {
            res.converged = true;
            break;
        }
    }

    if (cfg.normalize_output) {
        for (std::size_t t = 0; t < count; ++t)
            for (std::size_t col : normalize_factors(res.pairs[t]))
                res.unnormalized_columns.emplace_back(t, col);
    }
    return res;
}

MultiScaleFactors solve_pnmf(const DenseMatrix& x, const SolverConfig& cfg) {
    validate_config(cfg);
    validate_data(x);
    const SymmetricMatrix dist = pairwise_distances(x);
    const persistence::ScaleSet scales = select_scales(dist, cfg);
    const std::vector<scalegraph::ScaleGraph> graphs =
        scalegraph::graph_family(dist, scales, cfg.alpha);
    return solve(x, graphs, cfg);
}

MultiScaleFactors solve_nmf(const DenseMatrix& x, std::size_t rank, const SolverConfig& cfg) {
    SolverConfig plain = cfg;
    plain.rank = rank;
    plain.lambda_graph = 0.0;
    plain.lambda_coupling = 0.0;
    plain.lambda_ridge = 0.0;
    const std::vector<scalegraph::ScaleGraph> graphs{scalegraph::empty_graph(x.cols())};
    return solve(x, graphs, plain);
}

MultiScaleFactors solve_gnmf(const DenseMatrix& x, const scalegraph::ScaleGraph& graph,
                             std::size_t rank, double lambda_graph, const SolverConfig& cfg) {
    SolverConfig gcfg = cfg;
    gcfg.rank = rank;
    gcfg.lambda_graph = lambda_graph;
    gcfg.lambda_coupling = 0.0;
    gcfg.lambda_ridge = 0.0;
    const std::vector<scalegraph::ScaleGraph> graphs{graph};
    return solve(x, graphs, gcfg);
}

FactorPair nndsvda_init(const DenseMatrix& x, std::size_t rank) {
    const std::size_t p = x.rows();
    const std::size_t n = x.cols();
    if (rank < 1 || rank > std::min(p, n))
        throw ValidationError("nndsvda_init: rank must be in [1, min(p, n)]");
    validate_data(x);

    double mean = 0.0;
    for (double v : x.values()) mean += v;
    mean /= static_cast<double>(x.size());

    const numerics::TruncatedSvd svd = numerics::truncated_svd(x, rank);
    FactorPair f;
    f.w = DenseMatrix(p, rank);
    f.h = DenseMatrix(rank, n);

    // Leading pair: nonnegative up to sign, take magnitudes.
    {
        const double s = std::sqrt(svd.singular_values[0]);
        for (std::size_t i = 0; i < p; ++i) f.w(i, 0) = s * std::abs(svd.u(i, 0));
        for (std::size_t j = 0; j < n; ++j) f.h(0, j) = s * std::abs(svd.v(j, 0));
    }

    for (std::size_t k = 1; k < rank; ++k) {
        double upn = 0.0, unn = 0.0, vpn = 0.0, vnn = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double u = svd.u(i, k);
            (u > 0.0 ? upn : unn) += u * u;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = svd.v(j, k);
            (v > 0.0 ? vpn : vnn) += v * v;
        }
        upn = std::sqrt(upn);
        unn = std::sqrt(unn);
        vpn = std::sqrt(vpn);
        vnn = std::sqrt(vnn);

        const double mp = upn * vpn;
        const double mn = unn * vnn;
        if (mp == 0.0 && mn == 0.0) continue;  // zero singular direction; A-fill below

        const double sigma = svd.singular_values[k];
        if (mp >= mn) {
            const double scale = std::sqrt(sigma * mp);
            for (std::size_t i = 0; i < p; ++i)
                f.w(i, k) = svd.u(i, k) > 0.0 ? scale * svd.u(i, k) / upn : 0.0;
            for (std::size_t j = 0; j < n; ++j)
                f.h(k, j) = svd.v(j, k) > 0.0 ? scale * svd.v(j, k) / vpn : 0.0;
        } else {
            const double scale = std::sqrt(sigma * mn);
            for (std::size_t i = 0; i < p; ++i)
                f.w(i, k) = svd.u(i, k) < 0.0 ? -scale * svd.u(i, k) / unn : 0.0;
            for (std::size_t j = 0; j < n; ++j)
                f.h(k, j) = svd.v(j, k) < 0.0 ? -scale * svd.v(j, k) / vnn : 0.0;
        }
    }

    // Average fill: dead entries take the data mean.
    for (double& v : f.w.values())
        if (v <= 0.0) v = mean;
    for (double& v : f.h.values())
        if (v <= 0.0) v = mean;
    return f;
}

std::vector<std::size_t> normalize_factors(FactorPair& factors) {
    const std::size_t p = factors.w.rows();
    const std::size_t d = factors.w.cols();
    if (factors.h.rows() != d)
        throw ValidationError("normalize_factors: factor shapes disagree");

    std::vector<std::size_t> skipped;
    for (std::size_t k = 0; k < d; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < p; ++i) sum += factors.w(i, k);
        if (sum == 0.0) {
            skipped.push_back(k);
            continue;
        }
        for (std::size_t i = 0; i < p; ++i) factors.w(i, k) /= sum;
        for (std::size_t j = 0; j < factors.h.cols(); ++j) factors.h(k, j) *= sum;
    }
    return skipped;
}

} // namespace pnmf::solver
