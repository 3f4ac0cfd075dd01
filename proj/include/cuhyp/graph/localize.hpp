#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/frame.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/graph/hp_params.hpp"
#include "cuhyp/henon/plane_map.hpp"
#include "cuhyp/splitting/cocycle.hpp"

namespace cuhyp {

enum class LeafKind { stable, center_unstable };

inline const char* to_string(LeafKind k) { return k == LeafKind::stable ? "stable" : "center-unstable"; }

// Sampled C^1 bounds are multiplied by this before entering HPParams, as an
// allowance for the 16 x 16 torus sampling.
inline constexpr double kDeltaSafety = 1.05;

// The map g (f for center-unstable leaves, f^{-1} for stable ones) in
// adapted charts along base points y_k, with y_{k+1} = g(y_k):
//   g_k(h) = L_{k+1}^{-1} (g(y_k + L_k h) - y_{k+1}) = (A_k u + alpha, B_k v + beta).
// Column 0 of L_k spans the expanded line of g (F, or E for f^{-1}), column 1
// the other line; both are rescaled so |A_k| and |B_k| are constant along the
// family.
class LocalizedFamily {
public:
    LeafKind kind = LeafKind::center_unstable;
    bool periodic = true;
    std::vector<Vec2> base;
    std::vector<int> orbit_index;  // index m of y_k on the original orbit
    std::vector<UnitaryFrame<2>> frames;
    std::vector<Mat2> chart;
    std::vector<Mat2> chart_inv;
    std::vector<Complex> a_block;
    std::vector<Complex> b_block;
    std::vector<double> step_delta;  // sampled C^1 size of (alpha, beta) per step
    double off_diagonal = 0.0;       // max |off-diagonal| of Dg_k(0)
    double radius = 0.0;             // R
    double graph_radius = 0.0;       // r, domain of the leaf graphs
    double lambda = 0.0;             // max |B_k|
    double mu = 0.0;                 // min |A_k|
    double delta = 0.0;              // kDeltaSafety * max step_delta
    std::function<Vec2(const Vec2&)> g;
    std::function<Mat2(const Vec2&)> dg;

    int size() const { return static_cast<int>(base.size()); }
    int steps() const { return periodic ? size() : size() - 1; }

    // Step used when leaving chart k; window ends repeat the first step.
    int step(int k) const {
        if (periodic) return ((k % size()) + size()) % size();
        return std::clamp(k, 0, size() - 2);
    }
    int target(int k) const { return periodic ? (step(k) + 1) % size() : step(k) + 1; }

    Vec2 apply(int k, const Vec2& h) const {
        const int s = step(k);
        const Vec2 y = g(base[idx(s)] + chart[idx(s)] * h);
        return chart_inv[idx(target(k))] * (y - base[idx(target(k))]);
    }

    Mat2 jacobian(int k, const Vec2& h) const {
        const int s = step(k);
        return chart_inv[idx(target(k))] * dg(base[idx(s)] + chart[idx(s)] * h) * chart[idx(s)];
    }

    Mat2 linear_part(int k) const {
        const int s = step(k);
        return Mat2::diagonal(Vec2{a_block[idx(s)], b_block[idx(s)]});
    }

    Vec2 nonlinear(int k, const Vec2& h) const { return apply(k, h) - linear_part(k) * h; }

    // Sampled sup of |D(alpha, beta)| over the torus |h_1| = |h_2| = R of
    // step k. The sup over the closed polydisc is attained there.
    double sampled_delta(int k, double r, int angles = 16) const {
        double m = 0.0;
        const Mat2 lin = linear_part(k);
        for (int i = 0; i < angles; ++i)
            for (int j = 0; j < angles; ++j) {
                const Vec2 h{std::polar(r, 2.0 * M_PI * i / angles), std::polar(r, 2.0 * M_PI * j / angles)};
                m = std::max(m, op_norm(jacobian(k, h) - lin));
            }
        return m;
    }

    double sampled_delta(double r) const {
        double m = 0.0;
        for (int k = 0; k < steps(); ++k) m = std::max(m, sampled_delta(k, r));
        return m;
    }

    HPParams params() const { return params_with_gamma(HPParams::default_gamma(lambda, mu)); }

    HPParams params_with_gamma(double gamma) const {
        HPParams p;
        p.lambda = lambda;
        p.mu = mu;
        p.gamma = gamma;
        p.delta = delta;
        p.radius = radius;
        return p;
    }

    // Chart index whose base point is orbit point m, or -1.
    int chart_of_orbit_index(int m) const {
        for (int k = 0; k < size(); ++k)
            if (orbit_index[idx(k)] == m) return k;
        return -1;
    }

private:
    static std::size_t idx(int k) { return static_cast<std::size_t>(k); }
};

namespace detail {

// Charts and normal-form blocks without any radius-dependent data.
template <PlaneMap M>
LocalizedFamily build_family(const M& f, const Cocycle& c, const SplittingData& s, LeafKind kind) {
    if (!s.resolved) throw InvalidInput("localize: splitting unresolved");
    if (!c.has_points()) throw InvalidInput("localize: cocycle carries no base points");
    const int count = static_cast<int>(s.size());
    LocalizedFamily fam;
    fam.kind = kind;
    fam.periodic = c.is_periodic() && count % c.period() == 0;
    if (!fam.periodic && count < 2) throw InvalidInput("localize: a window family needs at least two points");

    const bool cu = kind == LeafKind::center_unstable;
    std::vector<Vec2> lead, other;
    for (int k = 0; k < count; ++k) {
        // Stable families run backwards along the orbit.
        int m = k;
        if (!cu) m = fam.periodic ? (count - k) % count : count - 1 - k;
        fam.orbit_index.push_back(m);
        fam.base.push_back(c.point(m));
        const auto i = static_cast<std::size_t>(m);
        lead.push_back(cu ? s.f[i] : s.e[i]);
        other.push_back(cu ? s.e[i] : s.f[i]);
    }
    if (cu) {
        fam.g = [f](const Vec2& z) { return f.apply(z); };
        fam.dg = [f](const Vec2& z) { return f.jacobian(z); };
    } else {
        fam.g = [f](const Vec2& z) { return f.apply_inverse(z); };
        fam.dg = [f](const Vec2& z) { return inverse(f.jacobian(f.apply_inverse(z))); };
    }

    // Unit charts first, to read raw block sizes.
    std::vector<Mat2> unit(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        unit[static_cast<std::size_t>(k)] =
            Mat2::from_columns({normalized(lead[static_cast<std::size_t>(k)]), normalized(other[static_cast<std::size_t>(k)])});
    const int steps = fam.periodic ? count : count - 1;
    std::vector<double> ra(static_cast<std::size_t>(steps)), rb(ra);
    for (int k = 0; k < steps; ++k) {
        const int t = fam.periodic ? (k + 1) % count : k + 1;
        const Mat2 j = inverse(unit[static_cast<std::size_t>(t)]) * fam.dg(fam.base[static_cast<std::size_t>(k)]) *
                       unit[static_cast<std::size_t>(k)];
        ra[static_cast<std::size_t>(k)] = std::abs(j(0, 0));
        rb[static_cast<std::size_t>(k)] = std::abs(j(1, 1));
    }
    auto geo_mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += std::log(x);
        return std::exp(s / static_cast<double>(v.size()));
    };
    const double abar = geo_mean(ra), bbar = geo_mean(rb);
    std::vector<double> sa(static_cast<std::size_t>(count), 1.0), sb(sa);
    for (int k = 0; k + 1 < count; ++k) {
        sa[static_cast<std::size_t>(k + 1)] = sa[static_cast<std::size_t>(k)] * ra[static_cast<std::size_t>(k)] / abar;
        sb[static_cast<std::size_t>(k + 1)] = sb[static_cast<std::size_t>(k)] * rb[static_cast<std::size_t>(k)] / bbar;
    }
    const double ma = *std::max_element(sa.begin(), sa.end());
    const double mb = *std::max_element(sb.begin(), sb.end());
    for (int k = 0; k < count; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const Mat2 l = unit[i] * Mat2::diagonal(Vec2{sa[i] / ma, sb[i] / mb});
        fam.chart.push_back(l);
        fam.chart_inv.push_back(inverse(l));
        fam.frames.push_back(orthonormal_frame(lead[i]));
    }
    fam.lambda = 0.0;
    fam.mu = std::numeric_limits<double>::infinity();
    for (int k = 0; k < steps; ++k) {
        const int t = fam.periodic ? (k + 1) % count : k + 1;
        const Mat2 j = fam.chart_inv[static_cast<std::size_t>(t)] * fam.dg(fam.base[static_cast<std::size_t>(k)]) *
                       fam.chart[static_cast<std::size_t>(k)];
        fam.a_block.push_back(j(0, 0));
        fam.b_block.push_back(j(1, 1));
        fam.off_diagonal = std::max({fam.off_diagonal, std::abs(j(0, 1)), std::abs(j(1, 0))});
        fam.lambda = std::max(fam.lambda, std::abs(j(1, 1)));
        fam.mu = std::min(fam.mu, std::abs(j(0, 0)));
    }
    if (!fam.periodic) {
        // The last chart has no outgoing step; it reuses the previous blocks.
        fam.a_block.push_back(fam.a_block.back());
        fam.b_block.push_back(fam.b_block.back());
    }
    return fam;
}

inline void set_radius(LocalizedFamily& fam, double r) {
    fam.radius = r;
    fam.step_delta.clear();
    double d = 0.0;
    for (int k = 0; k < fam.steps(); ++k) {
        fam.step_delta.push_back(fam.sampled_delta(k, r));
        d = std::max(d, fam.step_delta.back());
    }
    fam.delta = kDeltaSafety * d;
    const HPParams p = fam.params();
    fam.graph_radius = r / std::max(p.mu0_prop(), 1.0 + p.gamma);
}

inline double delta_budget(const LocalizedFamily& fam) {
    const double gamma = HPParams::default_gamma(fam.lambda, fam.mu);
    return HPParams::delta_bound(fam.lambda, fam.mu, gamma);
}

// Largest radius in (0, r_max] whose inflated delta stays below
// fraction * budget, by bisection; 0 if none is found.
inline double bisect_radius(const LocalizedFamily& fam, double r_max, double fraction) {
    const double budget = fraction * delta_budget(fam);
    auto ok = [&](double r) { return kDeltaSafety * fam.sampled_delta(r) < budget; };
    if (ok(r_max)) return r_max;
    double lo = 0.0, hi = r_max;
    for (int i = 0; i < 50; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

}  // namespace detail

// Adapted charts along the points of c (indices 0..count-1 of s) at radius R.
// Throws DeltaBudgetExceeded when the sampled C^1 size of the nonlinear
// part is too large for admissible parameters, suggesting a radius.
template <PlaneMap M>
LocalizedFamily localize(const M& f, const Cocycle& c, const SplittingData& s, double radius,
                         LeafKind kind = LeafKind::center_unstable) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("localize: R must be positive");
    auto fam = detail::build_family(f, c, s, kind);
    if (!(fam.mu > fam.lambda)) throw ParamsViolated("localize: no gap between |A| and |B| blocks");
    detail::set_radius(fam, radius);
    const double budget = detail::delta_budget(fam);
    if (!(fam.delta < budget)) {
        const double suggested = detail::bisect_radius(fam, radius, 1.0 - 1e-3);
        throw DeltaBudgetExceeded("localize: delta " + std::to_string(fam.delta) + " exceeds budget " +
                                      std::to_string(budget),
                                  fam.delta, suggested);
    }
    return fam;
}

template <PlaneMap M>
LocalizedFamily localize(const M& f, const PeriodicOrbit& o, const SplittingData& s, double radius,
                         LeafKind kind = LeafKind::center_unstable) {
    return localize(f, Cocycle::from_orbit(o), s, radius, kind);
}

// Largest R <= r_max (by bisection) at which delta uses at most `fraction`
// of its admissible budget.
template <PlaneMap M>
double admissible_radius(const M& f, const Cocycle& c, const SplittingData& s, double r_max,
                         LeafKind kind = LeafKind::center_unstable, double fraction = 0.5) {
    const auto fam = detail::build_family(f, c, s, kind);
    if (!(fam.mu > fam.lambda)) return 0.0;
    return detail::bisect_radius(fam, r_max, fraction);
}

}  // namespace cuhyp
