#pragma once

#include <cmath>
#include <vector>

#include "cuhyp/core/frame.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/graph/lipschitz_graph.hpp"
#include "cuhyp/graph/localize.hpp"

namespace cuhyp {

// Local leaf through `base`: z -> base + chart (z, phi(z)) for |z| < epsilon.
struct LeafChart {
    Vec2 base;
    int orbit_index = 0;
    int chart_index = 0;
    UnitaryFrame<2> frame;  // column 0 spans the tangent line
    Mat2 chart = Mat2::identity();
    Mat2 chart_inv = Mat2::identity();
    LipschitzGraph phi;
    double epsilon = 0.0;
    LeafKind kind = LeafKind::center_unstable;

    std::vector<double> history;  // graph_metric increments per iteration
    int iterations = 0;
    bool converged = false;
    double invariance_residual = 0.0;

    Vec2 embed(Complex z) const { return base + chart * Vec2{z, phi(z)}; }

    // Chart coordinates (u, v) of an ambient point.
    Vec2 coordinates(const Vec2& p) const { return chart_inv * (p - base); }

    // |v - phi(u)| for the chart coordinates of p.
    double graph_distance(const Vec2& p) const {
        const Vec2 h = coordinates(p);
        return std::abs(h[1] - phi(h[0]));
    }

    double tangency() const { return phi.a.size() > 1 ? std::abs(phi.a[1]) : 0.0; }

    // Tangent vector of the leaf at the base point (column 0 of the chart).
    Vec2 tangent() const { return chart.column(0); }
};

}  // namespace cuhyp
