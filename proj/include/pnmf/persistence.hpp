#pragma once

#include "pnmf/matrix.hpp"

#include <cstddef>
#include <vector>

namespace pnmf::persistence {

/// Degree-0 persistence of the Vietoris-Rips filtration over a finite metric
/// space. Edges enter the filtration strictly: at threshold eps the graph
/// contains exactly the pairs with distance < eps. All classes are born at 0;
/// the first n-1 deaths are the minimum-spanning-tree edge weights and the
/// surviving component is assigned the cutoff delta_max as its death.
struct H0Diagram {
    std::vector<double> deaths;    ///< nondecreasing, length n, last entry = delta_max
    double delta_max = 0.0;

    std::size_t order() const { return deaths.size(); }
};

/// Strictly increasing positive scale values ending at the cutoff.
/// Construction validates the invariant, so downstream code can rely on it.
class ScaleSet {
public:
    ScaleSet() = default;
    explicit ScaleSet(std::vector<double> values);

    const std::vector<double>& values() const { return v_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double min() const { return v_.front(); }
    double max() const { return v_.back(); }

    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

    bool operator==(const ScaleSet&) const = default;

private:
    std::vector<double> v_;
};

/// Cutoff scale standing in for the infinite death: (1 + margin) times the
/// diameter, strictly above every pairwise distance so the strict-threshold
/// graph is complete there. Degenerate case: zero diameter (single point,
/// coincident points) returns margin itself.
double delta_max(const SymmetricMatrix& dist, double margin = 0.05);

/// Kruskal sweep over all pairs. The death multiset is independent of
/// tie-breaking because all minimum spanning trees share one weight multiset.
/// Throws DegenerateInputError on coincident points (zero merge distance) and
/// ValidationError if the cutoff does not exceed the diameter.
H0Diagram compute_h0_diagram(const SymmetricMatrix& dist, double cutoff);

/// Canonical scale set: the death times, deduplicated. Deaths within
/// rel_tol * value of each other collapse to one representative.
ScaleSet canonical_scale_set(const H0Diagram& diagram, double rel_tol = 1e-12);

/// All pairwise distances deduplicated the same way, cutoff appended.
ScaleSet distance_scale_set(const SymmetricMatrix& dist, double cutoff,
                            double rel_tol = 1e-12);

/// Number of connected components of the strict-threshold graph
/// { (i,j) : dist(i,j) < eps }.
std::size_t betti0_at(const SymmetricMatrix& dist, double eps);

} // namespace pnmf::persistence
