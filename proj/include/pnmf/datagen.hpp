#pragma once

#include "pnmf/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pnmf::datagen {

/// Data matrix (one sample per column) with integer class labels. Generators
/// shift the matrix so its minimum entry is exactly zero and record the shift.
struct LabeledDataset {
    DenseMatrix x;
    std::vector<int> labels;
    std::string generator;
    std::uint64_t seed = 0;
    double shift = 0.0;               ///< amount added to every entry
};

struct CirclesConfig {
    std::size_t rings = 4;
    std::size_t points_per_ring = 20;
    double radius_step = 1.0;         ///< ring r has radius (r+1) * radius_step
    double noise = 0.05;              ///< sd of the geometric jitter
    std::size_t ambient_dim = 100;    ///< total dimension; first 3 carry the geometry
    double ambient_noise = 0.05;      ///< sd of the pure-noise coordinates
    std::uint64_t seed = 0;
};

/// Concentric rings with equally spaced points, each ring in its own random
/// plane through the origin of the 3-dimensional geometric block, embedded in
/// ambient Gaussian noise.
LabeledDataset concentric_circles(const CirclesConfig& cfg = {});

struct BlobsConfig {
    std::size_t clusters = 4;
    std::size_t points_per_cluster = 50;
    std::size_t dim = 20;
    double noise = 1.0;               ///< per-coordinate sd
    double separation = 10.0;         ///< exact pairwise center distance
    std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters whose centers are pairwise at least
/// `separation` apart: axis-aligned (separation / sqrt(2)) * e_i when
/// clusters <= dim (exactly `separation` apart), rejection-sampled otherwise.
LabeledDataset gaussian_blobs(const BlobsConfig& cfg = {});

} // namespace pnmf::datagen
