#pragma once

#include <algorithm>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/graph/transform.hpp"
#include "cuhyp/orbits/periodic.hpp"
#include "cuhyp/splitting/cocycle.hpp"

namespace cuhyp {

// Leaves over one periodic orbit, indexed by orbit index m mod period.
struct LeafCycle {
    std::vector<LeafChart> leaves;

    int period() const { return static_cast<int>(leaves.size()); }
    const LeafChart& at(int m) const {
        const int p = period();
        return leaves[static_cast<std::size_t>(((m % p) + p) % p)];
    }
    double radius() const {
        double r = leaves.front().epsilon;
        for (const auto& l : leaves) r = std::min(r, l.epsilon);
        return r;
    }
    bool converged() const {
        return std::all_of(leaves.begin(), leaves.end(), [](const LeafChart& l) { return l.converged; });
    }
};

// Reorders the leaves of a periodic family by orbit index.
inline LeafCycle make_leaf_cycle(const LocalizedFamily& fam, const LeafSolution& sol) {
    if (!fam.periodic) throw InvalidInput("make_leaf_cycle: family is not periodic");
    LeafCycle c;
    c.leaves.resize(sol.leaves.size());
    for (const auto& l : sol.leaves) c.leaves[static_cast<std::size_t>(l.orbit_index)] = l;
    return c;
}

struct LeafBuildOptions {
    double max_radius = 1.0;      // upper end of the radius search
    double budget_fraction = 0.5;  // share of the delta budget used
    SolveOptions solve;
    DirectionOptions directions;
};

struct LeafBuild {
    LocalizedFamily family;
    LeafSolution solution;
    LeafCycle cycle;
    SplittingData splitting;
};

// Splitting, localization at an admissible radius and leaf solve for the
// cycle carried by c (c must carry base points).
template <PlaneMap M>
LeafBuild build_leaf_cycle(const M& f, const Cocycle& c, int count, LeafKind kind = LeafKind::center_unstable,
                           const LeafBuildOptions& opt = {}) {
    LeafBuild b;
    b.splitting = compute_directions(c, count, opt.directions);
    if (!b.splitting.resolved) throw InvalidInput("build_leaf_cycle: splitting unresolved: " + b.splitting.diagnostic);
    const double r = admissible_radius(f, c, b.splitting, opt.max_radius, kind, opt.budget_fraction);
    if (!(r > 0.0)) throw ParamsViolated("build_leaf_cycle: no admissible radius");
    b.family = localize(f, c, b.splitting, r, kind);
    b.solution = solve_leaves(b.family, b.family.params(), opt.solve);
    b.cycle = make_leaf_cycle(b.family, b.solution);
    return b;
}

template <PlaneMap M>
LeafBuild build_leaf_cycle(const M& f, const PeriodicOrbit& o, LeafKind kind = LeafKind::center_unstable,
                           const LeafBuildOptions& opt = {}) {
    return build_leaf_cycle(f, Cocycle::from_orbit(o), o.period, kind, opt);
}

}  // namespace cuhyp
