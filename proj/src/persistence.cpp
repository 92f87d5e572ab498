#include "pnmf/persistence.hpp"

#include "pnmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <tuple>
#include <vector>

namespace pnmf::persistence {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];  // path halving
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

double diameter(const SymmetricMatrix& dist) {
    double mx = 0.0;
    for (std::size_t i = 0; i < dist.order(); ++i)
        for (std::size_t j = i + 1; j < dist.order(); ++j) mx = std::max(mx, dist(i, j));
    return mx;
}

/// Collapse values closer than rel_tol * value; input must be nondecreasing.
std::vector<double> dedup_sorted(const std::vector<double>& values, double rel_tol) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (out.empty() || v - out.back() > rel_tol * v) out.push_back(v);
    }
    return out;
}

} // namespace

ScaleSet::ScaleSet(std::vector<double> values) : v_(std::move(values)) {
    if (v_.empty())
        throw ValidationError("ScaleSet: no scales");
    double prev = 0.0;
    for (double s : v_) {
        if (!std::isfinite(s) || !(s > prev))
            throw ValidationError("ScaleSet: scales must be finite, positive, strictly increasing");
        prev = s;
    }
}

double delta_max(const SymmetricMatrix& dist, double margin) {
    if (dist.order() == 0)
        throw ValidationError("delta_max: empty distance matrix");
    if (!(margin > 0.0))
        throw ValidationError("delta_max: margin must be positive");
    const double diam = diameter(dist);
    return diam > 0.0 ? (1.0 + margin) * diam : margin;
}

H0Diagram compute_h0_diagram(const SymmetricMatrix& dist, double cutoff) {
    const std::size_t n = dist.order();
    if (n == 0)
        throw ValidationError("compute_h0_diagram: no points");
    if (!(cutoff > diameter(dist)))
        throw ValidationError("compute_h0_diagram: cutoff must exceed the diameter");

    std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) edges.emplace_back(dist(i, j), i, j);
    std::sort(edges.begin(), edges.end());

    H0Diagram diag;
    diag.deaths.reserve(n);
    DisjointSets components(n);
    for (const auto& [w, i, j] : edges) {
        if (!components.unite(i, j)) continue;
        if (!(w > 0.0))
            throw DegenerateInputError("compute_h0_diagram: coincident points (zero merge distance)");
        diag.deaths.push_back(w);
        if (diag.deaths.size() == n - 1) break;
    }
    diag.deaths.push_back(cutoff);
    diag.delta_max = cutoff;
    return diag;
}

ScaleSet canonical_scale_set(const H0Diagram& diagram, double rel_tol) {
    return ScaleSet(dedup_sorted(diagram.deaths, rel_tol));
}

ScaleSet distance_scale_set(const SymmetricMatrix& dist, double cutoff, double rel_tol) {
    const std::size_t n = dist.order();
    if (n == 0)
        throw ValidationError("distance_scale_set: no points");
    std::vector<double> values;
    values.reserve(n * (n - 1) / 2 + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(i, j);
            if (!(d > 0.0))
                throw DegenerateInputError("distance_scale_set: coincident points");
            values.push_back(d);
        }
    if (!(cutoff > diameter(dist)))
        throw ValidationError("distance_scale_set: cutoff must exceed the diameter");
    std::sort(values.begin(), values.end());
    values.push_back(cutoff);
    return ScaleSet(dedup_sorted(values, rel_tol));
}

std::size_t betti0_at(const SymmetricMatrix& dist, double eps) {
    if (!(eps > 0.0))
        throw ValidationError("betti0_at: eps must be positive");
    const std::size_t n = dist.order();
    DisjointSets components(n);
    std::size_t count = n;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (dist(i, j) < eps && components.unite(i, j)) --count;
    return count;
}

} // namespace pnmf::persistence
