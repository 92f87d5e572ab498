#include "pnmf/scalegraph.hpp"

#include "pnmf/errors.hpp"

#include <cmath>
#include <cstddef>

namespace pnmf::scalegraph {

ScaleGraph empty_graph(std::size_t order) {
    ScaleGraph g;
    g.adjacency = SymmetricMatrix(order, 0.0);
    g.degrees.assign(order, 0.0);
    g.laplacian = SymmetricMatrix(order, 0.0);
    return g;
}

ScaleGraph build_graph(const SymmetricMatrix& dist, double eps, double alpha) {
    if (!(eps > 0.0))
        throw ValidationError("build_graph: eps must be positive");
    if (!(alpha > 0.0))
        throw ValidationError("build_graph: alpha must be positive");
    const double denom = std::pow(eps, alpha);
    if (!std::isfinite(denom) || denom <= 0.0)
        throw ValidationError("build_graph: eps^alpha is not finite and positive");

    const std::size_t n = dist.order();
    ScaleGraph g;
    g.eps = eps;
    g.alpha = alpha;
    g.adjacency = SymmetricMatrix(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(i, j);
            if (d < eps) g.adjacency.set(i, j, std::exp(-(d * d) / denom));
        }

    g.degrees.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g.adjacency(i, j);
        g.degrees[i] = acc;
    }

    g.laplacian = SymmetricMatrix(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g.laplacian.set(i, i, g.degrees[i]);
        for (std::size_t j = i + 1; j < n; ++j) g.laplacian.set(i, j, -g.adjacency(i, j));
    }
    return g;
}

std::vector<ScaleGraph> graph_family(const SymmetricMatrix& dist,
                                     const persistence::ScaleSet& scales, double alpha) {
    std::vector<ScaleGraph> graphs;
    graphs.reserve(scales.size());
    for (double eps : scales) graphs.push_back(build_graph(dist, eps, alpha));
    return graphs;
}

std::size_t nullity(const SymmetricMatrix& laplacian, double tol) {
    const double threshold = tol * std::max(1.0, frobenius_norm(laplacian));
    std::size_t count = 0;
    for (double v : numerics::eigenvalues_sym(laplacian))
        if (v < threshold) ++count;
    return count;
}

} // namespace pnmf::scalegraph
