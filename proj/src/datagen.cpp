#include "pnmf/datagen.hpp"

#include "pnmf/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace pnmf::datagen {

namespace {

void shift_nonnegative(LabeledDataset& data) {
    double lowest = data.x.values()[0];
    for (double v : data.x.values()) lowest = std::min(lowest, v);
    data.shift = -lowest;
    for (double& v : data.x.values()) v += data.shift;
}

/// Two random orthonormal 3-vectors spanning a plane through the origin.
std::pair<std::array<double, 3>, std::array<double, 3>> random_plane(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::array<double, 3> u{}, v{};
    double nu = 0.0;
    do {
        for (double& c : u) c = gauss(rng);
        nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    } while (nu < 1e-8);
    for (double& c : u) c /= nu;

    double nv = 0.0;
    do {
        for (double& c : v) c = gauss(rng);
        const double proj = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        for (std::size_t i = 0; i < 3; ++i) v[i] -= proj * u[i];
        nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    } while (nv < 1e-8);
    for (double& c : v) c /= nv;
    return {u, v};
}

} // namespace

LabeledDataset concentric_circles(const CirclesConfig& cfg) {
    if (cfg.rings < 1 || cfg.points_per_ring < 1)
        throw ValidationError("concentric_circles: need at least one ring and one point");
    if (cfg.ambient_dim < 3)
        throw ValidationError("concentric_circles: ambient_dim must be at least 3");
    if (!(cfg.radius_step > 0.0))
        throw ValidationError("concentric_circles: radius_step must be positive");
    if (cfg.noise < 0.0 || cfg.ambient_noise < 0.0)
        throw ValidationError("concentric_circles: noise levels must be nonnegative");

    const std::size_t n = cfg.rings * cfg.points_per_ring;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::array<double, 3>> plane_u(cfg.rings), plane_v(cfg.rings);
    for (std::size_t r = 0; r < cfg.rings; ++r) {
        auto [u, v] = random_plane(rng);
        plane_u[r] = u;
        plane_v[r] = v;
    }

    LabeledDataset data;
    data.generator = "circles";
    data.seed = cfg.seed;
    data.x = DenseMatrix(cfg.ambient_dim, n);
    data.labels.reserve(n);

    for (std::size_t r = 0; r < cfg.rings; ++r) {
        const double radius = static_cast<double>(r + 1) * cfg.radius_step;
        for (std::size_t i = 0; i < cfg.points_per_ring; ++i) {
            const std::size_t col = r * cfg.points_per_ring + i;
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(cfg.points_per_ring);
            const double a = radius * std::cos(theta);
            const double b = radius * std::sin(theta);
            for (std::size_t c = 0; c < 3; ++c)
                data.x(c, col) = a * plane_u[r][c] + b * plane_v[r][c] + cfg.noise * gauss(rng);
            for (std::size_t c = 3; c < cfg.ambient_dim; ++c)
                data.x(c, col) = cfg.ambient_noise * gauss(rng);
            data.labels.push_back(static_cast<int>(r));
        }
    }

    shift_nonnegative(data);
    return data;
}

LabeledDataset gaussian_blobs(const BlobsConfig& cfg) {
    if (cfg.clusters < 1 || cfg.points_per_cluster < 1)
        throw ValidationError("gaussian_blobs: need at least one cluster and one point");
    if (cfg.dim < 1)
        throw ValidationError("gaussian_blobs: dim must be at least 1");
    if (!(cfg.separation > 0.0))
        throw ValidationError("gaussian_blobs: separation must be positive");
    if (cfg.noise < 0.0)
        throw ValidationError("gaussian_blobs: noise must be nonnegative");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> centers;
    centers.reserve(cfg.clusters);
    if (cfg.clusters <= cfg.dim) {
        for (std::size_t c = 0; c < cfg.clusters; ++c) {
            std::vector<double> center(cfg.dim, 0.0);
            center[c] = cfg.separation / std::numbers::sqrt2;
            centers.push_back(std::move(center));
        }
    } else {
        // More clusters than axes: sample well-spread centers directly.
        constexpr std::size_t max_attempts = 10000;
        std::size_t attempts = 0;
        while (centers.size() < cfg.clusters) {
            if (++attempts > max_attempts)
                throw ConvergenceError("gaussian_blobs: could not place separated centers",
                                       static_cast<double>(centers.size()));
            std::vector<double> candidate(cfg.dim);
            for (double& v : candidate) v = 2.0 * cfg.separation * gauss(rng);
            bool ok = true;
            for (const auto& existing : centers) {
                double acc = 0.0;
                for (std::size_t j = 0; j < cfg.dim; ++j) {
                    const double d = candidate[j] - existing[j];
                    acc += d * d;
                }
                if (std::sqrt(acc) < cfg.separation) {
                    ok = false;
                    break;
                }
            }
            if (ok) centers.push_back(std::move(candidate));
        }
    }

    const std::size_t n = cfg.clusters * cfg.points_per_cluster;
    LabeledDataset data;
    data.generator = "blobs";
    data.seed = cfg.seed;
    data.x = DenseMatrix(cfg.dim, n);
    data.labels.reserve(n);

    for (std::size_t c = 0; c < cfg.clusters; ++c) {
        for (std::size_t i = 0; i < cfg.points_per_cluster; ++i) {
            const std::size_t col = c * cfg.points_per_cluster + i;
            for (std::size_t j = 0; j < cfg.dim; ++j)
                data.x(j, col) = centers[c][j] + cfg.noise * gauss(rng);
            data.labels.push_back(static_cast<int>(c));
        }
    }

    shift_nonnegative(data);
    return data;
}

} // namespace pnmf::datagen
