#pragma once

#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"

#include <cstddef>
#include <vector>

namespace pnmf::scalegraph {

/// Heat-kernel neighborhood graph at one scale with its unnormalized
/// Laplacian L = D - A. The edge rule is strict:
///   A_ij = exp(-dist_ij^2 / eps^alpha)  if i != j and dist_ij < eps,
///   A_ij = 0                            otherwise.
struct ScaleGraph {
    double eps = 0.0;
    double alpha = 1.5;
    SymmetricMatrix adjacency;
    std::vector<double> degrees;      ///< row sums of the adjacency
    SymmetricMatrix laplacian;

    std::size_t order() const { return adjacency.order(); }
};

/// Graph with no edges on n vertices (zero adjacency and Laplacian). Used by
/// the plain factorization path, where no geometry term is wanted.
ScaleGraph empty_graph(std::size_t order);

ScaleGraph build_graph(const SymmetricMatrix& dist, double eps, double alpha = 1.5);

/// One graph per scale, order preserved.
std::vector<ScaleGraph> graph_family(const SymmetricMatrix& dist,
                                     const persistence::ScaleSet& scales,
                                     double alpha = 1.5);

/// Kernel dimension: number of eigenvalues below tol * max(1, ||L||_F).
/// Equals the number of graph components.
std::size_t nullity(const SymmetricMatrix& laplacian, double tol = 1e-8);

} // namespace pnmf::scalegraph
