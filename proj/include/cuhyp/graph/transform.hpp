#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/graph/hp_params.hpp"
#include "cuhyp/graph/leaf_chart.hpp"
#include "cuhyp/graph/lipschitz_graph.hpp"
#include "cuhyp/graph/localize.hpp"

namespace cuhyp {

struct PushResult {
    Complex u;      // preimage coordinate: G(u) = z
    Complex value;  // F(u), the pushed graph at z
    double residual = 0.0;
    bool converged = false;
};

// Pointwise graph transform of phi through steps k..k+n-1: solves
// G(u) = z by damped Newton from z / prod A, where (G(u), F(u)) is the image
// of (u, phi(u)).
inline PushResult push_graph_point(const LocalizedFamily& fam, int k, int n, const LipschitzGraph& phi, Complex z,
                                   int max_iter = 60) {
    Complex a = 1.0;
    for (int i = 0; i < n; ++i) a *= fam.a_block[static_cast<std::size_t>(fam.step(k + i))];

    auto image = [&](Complex u, Complex* dgu) {
        Vec2 h{u, phi(u)};
        Vec2 t{1.0, phi.derivative(u)};
        for (int i = 0; i < n; ++i) {
            if (dgu) t = fam.jacobian(k + i, h) * t;
            h = fam.apply(k + i, h);
        }
        if (dgu) *dgu = t[0];
        return h;
    };

    PushResult out;
    const double scale = std::max(std::abs(z), std::numeric_limits<double>::min());
    const double tol = 1e-14 * scale;
    Complex u = z / a;
    Complex d;
    Vec2 h = image(u, &d);
    double res = std::abs(h[0] - z);
    for (int it = 0; it < max_iter && res > tol; ++it) {
        if (d == 0.0 || !std::isfinite(std::abs(d))) break;
        const Complex step = (h[0] - z) / d;
        double t = 1.0;
        bool improved = false;
        for (int back = 0; back < 30; ++back) {
            const Complex cand = u - t * step;
            Complex dc;
            const Vec2 hc = image(cand, &dc);
            const double rc = std::abs(hc[0] - z);
            if (std::isfinite(rc) && rc < res) {
                u = cand;
                h = hc;
                d = dc;
                res = rc;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }
    out.u = u;
    out.value = h[1];
    out.residual = res;
    out.converged = res <= std::max(tol, 1e-12 * scale);
    return out;
}

struct StepOptions {
    double tail_tolerance = 1e-10;  // relative to the graph radius
};

// (f_k)_* phi: a polynomial of the same degree D on the family's graph
// radius, recovered from M = 4D nodes by discrete Fourier inversion.
inline LipschitzGraph graph_transform_step(const LocalizedFamily& fam, int k, const LipschitzGraph& phi,
                                           const StepOptions& opt = {}) {
    const int D = std::max(phi.degree(), 1);
    const int M = 4 * D;
    const double r = fam.graph_radius;
    std::vector<Complex> w(static_cast<std::size_t>(M));
    double worst = 0.0;
    for (int j = 0; j < M; ++j) {
        const Complex z = std::polar(r, 2.0 * M_PI * j / M);
        const auto p = push_graph_point(fam, k, 1, phi, z);
        if (!p.converged)
            throw StepFailed("graph_transform_step: Newton inversion failed at node " + std::to_string(j) +
                                 " (residual " + std::to_string(p.residual) + ")",
                             j, p.residual);
        worst = std::max(worst, p.residual);
        w[static_cast<std::size_t>(j)] = p.value;
    }
    std::vector<Complex> c(static_cast<std::size_t>(D) + 1, 0.0);
    double tail = 0.0;
    for (int i = 0; i < M; ++i) {
        Complex s = 0.0;
        for (int j = 0; j < M; ++j) s += w[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * M_PI * i * j / M);
        s /= static_cast<double>(M);
        // s is c_i r^i.
        if (i >= 1 && i <= D) c[static_cast<std::size_t>(i)] = s / std::pow(r, i);
        if (i > D) tail = std::max(tail, std::abs(s));
    }
    auto out = LipschitzGraph::from_coefficients(std::move(c), r);
    out.tail = std::max(tail, std::abs(out.a.back()) * std::pow(r, D));
    out.inversion_residual = worst;
    out.degree_warning = tail > opt.tail_tolerance * r;
    return out;
}

// sup |phi(z) - psi(z)| / |z| from 256 samples on each of the circles of
// radius r, r/2 and r/4. For polynomials the outer circle attains it.
inline double graph_metric(const LipschitzGraph& phi, const LipschitzGraph& psi) {
    if (std::abs(phi.radius - psi.radius) > 1e-12 * std::max(phi.radius, psi.radius))
        throw InvalidInput("graph_metric: graphs live on different discs");
    double m = 0.0;
    for (double s : {1.0, 0.5, 0.25}) {
        const double rho = s * phi.radius;
        for (int k = 0; k < 256; ++k) {
            const Complex z = std::polar(rho, 2.0 * M_PI * k / 256);
            m = std::max(m, std::abs(phi(z) - psi(z)) / rho);
        }
    }
    return m;
}

struct SolveOptions {
    int degree = 16;
    int max_iter = 200;
    double tolerance = 1e-12;
    int growth_limit = 5;  // consecutive increasing increments tolerated
    double invariance_tolerance = 1e-8;
    StepOptions step;
};

// Leaves at every chart index of the family.
struct LeafSolution {
    std::vector<LeafChart> leaves;
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
    double invariance_residual = 0.0;
    bool invariant = false;
    bool degree_warning = false;
};

namespace detail {

// max |v' - phi_{k+1}(u')| over images of leaf points of chart k.
inline double invariance_residual(const LocalizedFamily& fam, int k, const LipschitzGraph& phi,
                                  const LipschitzGraph& next) {
    const double a = std::abs(fam.a_block[static_cast<std::size_t>(fam.step(k))]);
    const double rho = 0.5 * phi.radius / std::max(1.0, a);
    double m = 0.0;
    for (double s : {1.0, 0.5})
        for (int j = 0; j < 32; ++j) {
            const Complex z = std::polar(s * rho, 2.0 * M_PI * (j + 0.25) / 32);
            const Vec2 h = fam.apply(k, Vec2{z, phi(z)});
            m = std::max(m, std::abs(h[1] - next(h[0])));
        }
    return m;
}

}  // namespace detail

// Fixed-point iteration of the graph transform from phi = 0 (or `initial`
// at every chart). All charts advance together: leaf k+1 <- T_k(leaf k).
inline LeafSolution solve_leaves(const LocalizedFamily& fam, const HPParams& params, const SolveOptions& opt = {},
                                 const std::optional<LipschitzGraph>& initial = std::nullopt) {
    require_admissible(params);
    const int n = fam.size();
    std::vector<LipschitzGraph> cur(static_cast<std::size_t>(n));
    for (auto& g : cur) {
        if (initial) {
            g = LipschitzGraph::from_coefficients(initial->a, fam.graph_radius);
        } else {
            g = LipschitzGraph::zero(opt.degree, fam.graph_radius);
        }
    }
    LeafSolution sol;
    int growing = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        std::vector<LipschitzGraph> next(cur.size());
        double inc = 0.0;
        for (int m = 0; m < n; ++m) {
            // Chart m receives the image of the chart before it; a window's
            // first chart receives its own image under the first step.
            const int from = fam.periodic ? (m + n - 1) % n : std::max(m - 1, 0);
            next[static_cast<std::size_t>(m)] = graph_transform_step(fam, from, cur[static_cast<std::size_t>(from)], opt.step);
            inc = std::max(inc, graph_metric(next[static_cast<std::size_t>(m)], cur[static_cast<std::size_t>(m)]));
        }
        cur = std::move(next);
        sol.history.push_back(inc);
        sol.iterations = it;
        if (inc > prev) {
            if (++growing >= opt.growth_limit)
                throw ParamsViolated("solve_leaf: increments grew for " + std::to_string(growing) + " consecutive steps");
        } else {
            growing = 0;
        }
        prev = inc;
        if (inc < opt.tolerance) {
            sol.converged = true;
            break;
        }
    }

    sol.invariant = true;
    for (int m = 0; m < n; ++m) {
        const auto& g = cur[static_cast<std::size_t>(m)];
        sol.degree_warning = sol.degree_warning || g.degree_warning;
        double res = 0.0;
        if (fam.periodic || m + 1 < n) res = detail::invariance_residual(fam, m, g, cur[static_cast<std::size_t>(fam.target(m))]);
        sol.invariance_residual = std::max(sol.invariance_residual, res);
        LeafChart leaf;
        leaf.base = fam.base[static_cast<std::size_t>(m)];
        leaf.orbit_index = fam.orbit_index[static_cast<std::size_t>(m)];
        leaf.chart_index = m;
        leaf.frame = fam.frames[static_cast<std::size_t>(m)];
        leaf.chart = fam.chart[static_cast<std::size_t>(m)];
        leaf.chart_inv = fam.chart_inv[static_cast<std::size_t>(m)];
        leaf.phi = g;
        leaf.epsilon = fam.graph_radius;
        leaf.kind = fam.kind;
        leaf.history = sol.history;
        leaf.iterations = sol.iterations;
        leaf.converged = sol.converged;
        leaf.invariance_residual = res;
        sol.leaves.push_back(std::move(leaf));
    }
    sol.invariant = sol.invariance_residual < opt.invariance_tolerance;
    return sol;
}

// Leaf at chart index m (default: the family's first base point).
inline LeafChart solve_leaf(const LocalizedFamily& fam, const HPParams& params, LeafKind kind,
                            const SolveOptions& opt = {}, int m = 0,
                            const std::optional<LipschitzGraph>& initial = std::nullopt) {
    if (kind != fam.kind) throw InvalidInput("solve_leaf: family was localized for the other leaf kind");
    if (m < 0 || m >= fam.size()) throw InvalidInput("solve_leaf: chart index out of range");
    auto sol = solve_leaves(fam, params, opt, initial);
    return sol.leaves[static_cast<std::size_t>(m)];
}

// max over off-node samples (interleaved angles, radii r and r/2) of
// |(f_k)_* phi_k (z) - phi_{k+1}(z)|.
inline double approximation_residual(const LocalizedFamily& fam, const std::vector<LeafChart>& leaves) {
    if (static_cast<int>(leaves.size()) != fam.size()) throw InvalidInput("approximation_residual: one leaf per chart expected");
    double m = 0.0;
    for (int k = 0; k < fam.size(); ++k) {
        if (!fam.periodic && k + 1 >= fam.size()) break;
        const auto& phi = leaves[static_cast<std::size_t>(k)].phi;
        const auto& next = leaves[static_cast<std::size_t>(fam.target(k))].phi;
        const int M = 4 * std::max(phi.degree(), 1);
        for (double s : {1.0, 0.5})
            for (int j = 0; j < M; ++j) {
                const Complex z = std::polar(s * next.radius, 2.0 * M_PI * (j + 0.5) / M);
                const auto p = push_graph_point(fam, k, 1, phi, z);
                m = std::max(m, std::abs(p.value - next(z)));
            }
    }
    return m;
}

// Single-chart families (fixed points).
inline double approximation_residual(const LocalizedFamily& fam, const LeafChart& leaf) {
    if (fam.size() != 1) throw InvalidInput("approximation_residual: pass every leaf of a multi-chart family");
    return approximation_residual(fam, std::vector<LeafChart>{leaf});
}

// d(T phi, T psi) / d(phi, psi) for one step.
inline double measured_contraction(const LocalizedFamily& fam, int k, const LipschitzGraph& phi,
                                   const LipschitzGraph& psi) {
    const double d0 = graph_metric(phi, psi);
    if (d0 == 0.0) return 0.0;
    return graph_metric(graph_transform_step(fam, k, phi), graph_transform_step(fam, k, psi)) / d0;
}

// Pointwise checks on samples u in the graph disc.

// max |g_k(u, phi(u)) - g_k(u, psi(u))| / |phi(u) - psi(u)|; compare with lambda + 2 delta.
inline double claim1_ratio(const LocalizedFamily& fam, int k, const LipschitzGraph& phi, const LipschitzGraph& psi,
                           const std::vector<Complex>& samples) {
    double m = 0.0;
    for (const auto& u : samples) {
        const double d = std::abs(phi(u) - psi(u));
        if (d == 0.0) continue;
        m = std::max(m, norm(fam.apply(k, Vec2{u, phi(u)}) - fam.apply(k, Vec2{u, psi(u)})) / d);
    }
    return m;
}

// max |T_{k+n-1} ... T_k phi (z) - (g_{k+n-1} o ... o g_k)_* phi (z)| over samples z.
inline double claim2_defect(const LocalizedFamily& fam, int k, int n, const LipschitzGraph& phi,
                            const std::vector<Complex>& samples) {
    LipschitzGraph g = phi;
    for (int i = 0; i < n; ++i) g = graph_transform_step(fam, k + i, g);
    double m = 0.0;
    for (const auto& z : samples) m = std::max(m, std::abs(g(z) - push_graph_point(fam, k, n, phi, z).value));
    return m;
}

// min |G_phi(u)| / |u| over samples; compare with mu - delta (1 + gamma).
inline double domain_ratio(const LocalizedFamily& fam, int k, const LipschitzGraph& phi,
                           const std::vector<Complex>& samples) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& u : samples) {
        if (u == 0.0) continue;
        m = std::min(m, std::abs(fam.apply(k, Vec2{u, phi(u)})[0]) / std::abs(u));
    }
    return m;
}

}  // namespace cuhyp
