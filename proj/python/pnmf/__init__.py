"""Persistence-guided multi-scale nonnegative matrix factorization.

Thin wrapper over the compiled extension.  Arrays use the numpy convention
(samples in rows); the extension transposes internally.
"""

from ._pnmf import (  # noqa: F401
    ConvergenceError,
    ValidationError,
    __version__,
    accuracy,
    ari,
    betti0,
    build_laplacian,
    canonical_scales,
    h0_deaths,
    kmeans,
    make_blobs,
    make_circles,
    nmi,
    pairwise_distances,
    purity,
    solve_gnmf,
    solve_nmf,
    solve_pnmf,
)

__all__ = [
    "ConvergenceError",
    "ValidationError",
    "__version__",
    "accuracy",
    "ari",
    "betti0",
    "build_laplacian",
    "canonical_scales",
    "h0_deaths",
    "kmeans",
    "make_blobs",
    "make_circles",
    "nmi",
    "pairwise_distances",
    "purity",
    "solve_gnmf",
    "solve_nmf",
    "solve_pnmf",
]
