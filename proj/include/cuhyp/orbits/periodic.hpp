#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/core/parallel.hpp"
#include "cuhyp/core/poly.hpp"
#include "cuhyp/henon/henon.hpp"
#include "cuhyp/henon/plane_map.hpp"

namespace cuhyp {

enum class OrbitClass { saddle, attracting, repelling, neutral };

inline const char* to_string(OrbitClass c) {
    switch (c) {
        case OrbitClass::saddle: return "saddle";
        case OrbitClass::attracting: return "attracting";
        case OrbitClass::repelling: return "repelling";
        case OrbitClass::neutral: return "neutral";
    }
    return "neutral";
}

struct PeriodicOrbit {
    std::vector<Vec2> points;     // points[i+1] = f(points[i]), cyclically
    std::vector<Mat2> jacobians;  // Df at each point
    int period = 0;
    int multiplicity = 1;
    // multipliers[0] has the larger modulus.
    std::array<Complex, 2> multipliers{};
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    OrbitClass classification = OrbitClass::neutral;
    // Unit eigendirections of the return map rotated to each point.
    std::vector<Vec2> f_directions;
    std::vector<Vec2> e_directions;
    double residual = 0.0;  // |f^period(p0) - p0|
};

inline bool lex_less(const Vec2& a, const Vec2& b) {
    for (std::size_t i = 0; i < 2; ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return false;
}

// Product Df(p_{k-1}) ... Df(p_0) starting at index `start`.
inline Mat2 cycle_product(std::span<const Mat2> jacobians, std::size_t start = 0) {
    Mat2 m = Mat2::identity();
    const std::size_t n = jacobians.size();
    for (std::size_t k = 0; k < n; ++k) m = jacobians[(start + k) % n] * m;
    return m;
}

// The determinant of the return map is taken as the product of the factor
// determinants; recovering it from the product's entries loses the small
// multiplier to cancellation.
inline std::array<Complex, 2> multipliers(std::span<const Mat2> jacobians, std::size_t start = 0) {
    Complex d = 1.0;
    for (const auto& j : jacobians) d *= det(j);
    return eigenvalues(cycle_product(jacobians, start), d);
}

inline std::array<Complex, 2> multipliers(const PeriodicOrbit& orbit) { return multipliers(orbit.jacobians); }

// Fills multipliers, exponents, class and eigendirections from points and
// jacobians. Neutral means some multiplier modulus is within `neutral_tol` of 1
// on the per-period exponent scale.
inline void analyze_cycle(PeriodicOrbit& o, double neutral_tol = 1e-9) {
    if (o.points.empty() || o.points.size() != o.jacobians.size())
        throw InvalidInput("analyze_cycle: points and jacobians must be nonempty and of equal length");
    o.period = static_cast<int>(o.points.size());
    o.multipliers = multipliers(o.jacobians);
    const double pi = static_cast<double>(o.period);
    o.lambda_plus = std::log(std::abs(o.multipliers[0])) / pi;
    o.lambda_minus = std::log(std::abs(o.multipliers[1])) / pi;
    const bool up = o.lambda_plus > neutral_tol, down = o.lambda_minus < -neutral_tol;
    const bool near_one = std::abs(o.lambda_plus) <= neutral_tol || std::abs(o.lambda_minus) <= neutral_tol;
    if (near_one)
        o.classification = OrbitClass::neutral;
    else if (up && down)
        o.classification = OrbitClass::saddle;
    else if (down)
        o.classification = OrbitClass::attracting;
    else
        o.classification = OrbitClass::repelling;

    o.f_directions.clear();
    o.e_directions.clear();
    for (std::size_t j = 0; j < o.points.size(); ++j) {
        const Mat2 m = cycle_product(o.jacobians, j);
        const auto mu = multipliers(o.jacobians, j);
        o.f_directions.push_back(eigenvector(m, mu[0]));
        o.e_directions.push_back(eigenvector(m, mu[1]));
    }
}

template <PlaneMap M>
PeriodicOrbit make_periodic_orbit(const M& f, const Vec2& p0, int period) {
    if (period < 1) throw InvalidInput("make_periodic_orbit: period must be >= 1");
    PeriodicOrbit o;
    Vec2 z = p0;
    for (int k = 0; k < period; ++k) {
        o.points.push_back(z);
        o.jacobians.push_back(f.jacobian(z));
        z = f.apply(z);
    }
    o.residual = norm(z - p0);
    analyze_cycle(o);
    return o;
}

// Rotates the orbit so that its lexicographically least point comes first.
inline void canonicalize(PeriodicOrbit& o) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < o.points.size(); ++i)
        if (lex_less(o.points[i], o.points[best])) best = i;
    auto rot = [best](auto& v) {
        if (!v.empty()) std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(best), v.end());
    };
    rot(o.points);
    rot(o.jacobians);
    rot(o.f_directions);
    rot(o.e_directions);
}

inline bool orbit_order(const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    return lex_less(a.points.front(), b.points.front());
}

// Fixed points of a single-factor map solve p(y) - (1 + b) y = 0 on the
// diagonal x = y. Compositions fall back to the Newton grid search.
inline std::vector<PeriodicOrbit> find_fixed_points(const GeneralizedHenon& h);

struct GridSpec {
    int resolution = 64;      // samples per real axis in each slice
    int max_resolution = 1024;
    bool refine = true;       // double until the count saturates
    // Imaginary offsets of the slices, as multiples of the grid step.
    std::vector<double> slice_offsets{0.0, 0.37};
    int max_newton_iter = 60;
    double newton_tol = 1e-11;
    double verify_tol = 1e-9;
    double dedup_tol = 1e-6;
    unsigned threads = 0;
    // Use the closed-form fixed points of single-factor maps for n = 1.
    bool analytic_fixed_points = true;
};

struct SearchDiagnostics {
    std::vector<int> resolutions;      // grid sizes tried, in order
    std::vector<std::size_t> counts;   // distinct points of f^n = id after each
    std::size_t expected = 0;          // d^n
    bool saturated = false;
    std::string saturation_reason;     // "bezout", "stable", or "" when not saturated
    std::size_t singular_seeds = 0;
    std::size_t nonconverged_seeds = 0;
};

namespace detail {

struct NewtonOutcome {
    enum Kind { converged, singular, failed } kind = failed;
    Vec2 z;
};

// A few extra Newton steps on f^n(z) = z, keeping the best residual.
template <PlaneMap M>
Vec2 polish_periodic_point(const M& f, Vec2 z, int n, int steps = 4) {
    auto eval = [&](const Vec2& p, Mat2* jac) {
        Vec2 w = p;
        Mat2 j = Mat2::identity();
        for (int k = 0; k < n; ++k) {
            if (jac) j = f.jacobian(w) * j;
            w = f.apply(w);
        }
        if (jac) *jac = j;
        return w - p;
    };
    Mat2 j;
    Vec2 g = eval(z, &j);
    double best = norm(g);
    for (int s = 0; s < steps && best > 0.0; ++s) {
        const Mat2 a = j - Mat2::identity();
        if (std::abs(det(a)) < 1e-300) break;
        const Vec2 cand = z - inverse(a) * g;
        Mat2 jc;
        const Vec2 gc = eval(cand, &jc);
        if (!(norm(gc) < best)) break;
        z = cand;
        g = gc;
        j = jc;
        best = norm(gc);
    }
    return z;
}

template <PlaneMap M>
NewtonOutcome periodic_newton(const M& f, Vec2 z, int n, double radius, const GridSpec& g) {
    for (int it = 0; it < g.max_newton_iter; ++it) {
        Vec2 w = z;
        Mat2 j = Mat2::identity();
        for (int k = 0; k < n; ++k) {
            j = f.jacobian(w) * j;
            w = f.apply(w);
            if (overflowed(w)) return {NewtonOutcome::failed, z};
        }
        Mat2 a = j - Mat2::identity();
        const Complex d = det(a);
        if (!std::isfinite(std::abs(d)) || std::abs(d) < 1e-300) return {NewtonOutcome::singular, z};
        const Vec2 dz = -(inverse(a) * (w - z));
        z += dz;
        if (!is_finite(z) || max_abs(z) > 10.0 * radius) return {NewtonOutcome::failed, z};
        if (norm(dz) < g.newton_tol * std::max(1.0, norm(z)))
            return {NewtonOutcome::converged, polish_periodic_point(f, z, n)};
    }
    return {NewtonOutcome::failed, z};
}

inline bool contains_point(const std::vector<Vec2>& pts, const Vec2& z, double tol) {
    return std::any_of(pts.begin(), pts.end(), [&](const Vec2& p) { return max_abs(p - z) < tol; });
}

}  // namespace detail

// All points z with f^n(z) = z found from a seed grid over the filtration
// bidisc, grouped into orbits of exact period n.
template <PlaneMap M>
std::vector<PeriodicOrbit> find_periodic_with_radius(const M& f, int n, double radius, int degree,
                                                     const GridSpec& g, SearchDiagnostics* diag = nullptr) {
    if (n < 1) throw InvalidInput("find_periodic: period must be >= 1");
    if (g.resolution < 2) throw InvalidInput("find_periodic: grid resolution must be >= 2");
    SearchDiagnostics local;
    SearchDiagnostics& d = diag ? *diag : local;
    d = SearchDiagnostics{};
    double expected = std::pow(static_cast<double>(degree), n);
    d.expected = degree > 0 && expected < 1e15 ? static_cast<std::size_t>(expected) : 0;

    std::vector<Vec2> points;
    int res = g.resolution;
    int unchanged = 0;
    while (true) {
        const auto per_slice = static_cast<std::size_t>(res) * static_cast<std::size_t>(res);
        const std::size_t total = per_slice * g.slice_offsets.size();
        std::vector<detail::NewtonOutcome> out(total);
        const double step = 2.0 * radius / (res - 1);
        parallel_for(total, g.threads, [&](std::size_t s) {
            const std::size_t layer = s / per_slice;
            const std::size_t k = s % per_slice;
            const double eta = g.slice_offsets[layer] * step;
            const auto i = static_cast<double>(k / static_cast<std::size_t>(res));
            const auto jj = static_cast<double>(k % static_cast<std::size_t>(res));
            const Vec2 seed{Complex(-radius + step * i, eta), Complex(-radius + step * jj, eta)};
            out[s] = detail::periodic_newton(f, seed, n, radius, g);
        });

        const std::size_t before = points.size();
        for (const auto& o : out) {
            if (o.kind == detail::NewtonOutcome::singular) {
                ++d.singular_seeds;
                continue;
            }
            if (o.kind != detail::NewtonOutcome::converged) {
                ++d.nonconverged_seeds;
                continue;
            }
            if (detail::contains_point(points, o.z, g.dedup_tol)) continue;
            // Verify, then add the whole orbit.
            Vec2 w = o.z;
            std::vector<Vec2> orbit;
            for (int k = 0; k < n; ++k) {
                orbit.push_back(w);
                w = f.apply(w);
            }
            if (!(norm(w - o.z) < g.verify_tol)) {
                ++d.nonconverged_seeds;
                continue;
            }
            for (const auto& p : orbit)
                if (!detail::contains_point(points, p, g.dedup_tol)) points.push_back(p);
        }
        d.resolutions.push_back(res);
        d.counts.push_back(points.size());

        if (d.expected > 0 && points.size() >= d.expected) {
            d.saturated = true;
            d.saturation_reason = "bezout";
            break;
        }
        unchanged = points.size() == before ? unchanged + 1 : 0;
        if (d.resolutions.size() > 1 && unchanged >= 2) {
            d.saturated = true;
            d.saturation_reason = "stable";
            break;
        }
        if (!g.refine || res * 2 > g.max_resolution) break;
        res *= 2;
    }

    // Group into orbits of exact period n; points of lower period are dropped.
    std::vector<PeriodicOrbit> orbits;
    std::vector<bool> used(points.size(), false);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (used[i]) continue;
        Vec2 w = points[i];
        int minimal = n;
        for (int k = 1; k < n; ++k) {
            w = f.apply(w);
            if (n % k == 0 && norm(w - points[i]) < g.verify_tol * 100.0) {
                minimal = k;
                break;
            }
        }
        PeriodicOrbit o = make_periodic_orbit(f, detail::polish_periodic_point(f, points[i], minimal), minimal);
        for (const auto& p : o.points)
            for (std::size_t j = 0; j < points.size(); ++j)
                if (!used[j] && max_abs(points[j] - p) < g.dedup_tol) used[j] = true;
        if (minimal != n) continue;
        canonicalize(o);
        // Forward iteration amplifies the base point's error by the partial
        // multipliers, so every point is refined on its own.
        for (int k = 0; k < n; ++k) {
            o.points[k] = detail::polish_periodic_point(f, o.points[k], n);
            o.jacobians[k] = f.jacobian(o.points[k]);
        }
        o.residual = norm(iterate(f, o.points[0], n) - o.points[0]);
        analyze_cycle(o);
        orbits.push_back(std::move(o));
    }
    std::sort(orbits.begin(), orbits.end(), orbit_order);
    return orbits;
}

inline std::vector<PeriodicOrbit> find_periodic(const GeneralizedHenon& h, int n, const GridSpec& g = {},
                                                SearchDiagnostics* diag = nullptr) {
    if (n == 1 && g.analytic_fixed_points && h.factors().size() == 1) {
        auto fp = find_fixed_points(h);
        if (diag) {
            *diag = SearchDiagnostics{};
            diag->expected = static_cast<std::size_t>(h.degree());
            std::size_t c = 0;
            for (const auto& o : fp) c += static_cast<std::size_t>(o.multiplicity);
            diag->counts.push_back(c);
            diag->saturated = true;
            diag->saturation_reason = "analytic";
        }
        return fp;
    }
    return find_periodic_with_radius(h, n, h.filtration_radius(), h.degree(), g, diag);
}

inline std::vector<PeriodicOrbit> find_fixed_points(const GeneralizedHenon& h) {
    if (h.factors().size() != 1) {
        GridSpec g;
        g.analytic_fixed_points = false;
        return find_periodic(h, 1, g);
    }
    const auto& e = h.factors().front();
    Polynomial q = e.p();
    q.c[1] -= 1.0 + e.b();
    const auto roots = polynomial_roots(q);
    std::vector<PeriodicOrbit> out;
    for (const auto& y : roots) {
        const Vec2 z{y, y};
        bool merged = false;
        for (auto& o : out) {
            if (max_abs(o.points.front() - z) < 1e-6) {
                ++o.multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(make_periodic_orbit(h, z, 1));
    }
    std::sort(out.begin(), out.end(), orbit_order);
    return out;
}

// (1/k) sum_j log |Df(x_j) F(x_j)| over a cycle of length k.
inline double orbit_log_average(std::span<const Mat2> jacobians, std::span<const Vec2> f_directions) {
    if (jacobians.empty()) throw InvalidInput("orbit_log_average: empty cycle");
    if (f_directions.size() != jacobians.size())
        throw InvalidInput("orbit_log_average: one F direction per orbit point required");
    double s = 0.0;
    for (std::size_t j = 0; j < jacobians.size(); ++j) {
        const double n = norm(f_directions[j]);
        if (!(n > 0.0)) throw InvalidInput("orbit_log_average: zero F direction");
        s += std::log(norm(jacobians[j] * f_directions[j]) / n);
    }
    return s / static_cast<double>(jacobians.size());
}

inline double orbit_log_average(const PeriodicOrbit& o, std::span<const Vec2> f_directions) {
    return orbit_log_average(o.jacobians, f_directions);
}

struct ExpansionReport {
    std::vector<double> chi;  // per orbit, same order as the input
    double chi_min = std::numeric_limits<double>::infinity();
    std::size_t witness = 0;  // index of the orbit attaining chi_min
    double c = 1.0;
    double lambda1 = 0.0;
    double alarm_threshold = 0.02;
    bool zero_exponent_alarm = false;
};

// chi(p) from the F directions stored on each orbit. The fit takes
// lambda1 = exp(-chi_min + margin) and C as the smallest constant with
// |Df^{-pi}|_F| <= C lambda1^pi over the sample.
inline ExpansionReport uniform_expansion_report(const std::vector<PeriodicOrbit>& orbits,
                                                double alarm_threshold = 0.02, double margin = 1e-6) {
    if (orbits.empty()) throw InvalidInput("uniform_expansion_report: no orbits");
    ExpansionReport r;
    r.alarm_threshold = alarm_threshold;
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        const double chi = orbit_log_average(orbits[i], orbits[i].f_directions);
        r.chi.push_back(chi);
        if (chi < r.chi_min) {
            r.chi_min = chi;
            r.witness = i;
        }
    }
    r.lambda1 = std::exp(-r.chi_min + margin);
    r.c = 0.0;
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        const double pi = orbits[i].period;
        r.c = std::max(r.c, std::exp(-pi * r.chi[i] - pi * std::log(r.lambda1)));
    }
    r.zero_exponent_alarm = r.chi_min < alarm_threshold;
    return r;
}

}  // namespace cuhyp
