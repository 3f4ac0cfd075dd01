#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/frame.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/leaf/probes.hpp"
#include "cuhyp/splitting/cocycle.hpp"

namespace cuhyp {

// K(x, xi) = max_i r_i |xi_i| / (r_i^2 - |x_i - c_i|^2).
inline double kobayashi_norm(const Polydisc& d, std::span<const Complex> x, std::span<const Complex> xi) {
    if (x.size() != d.dim() || xi.size() != d.dim()) throw InvalidInput("kobayashi_norm: dimension mismatch");
    double k = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = d.radii[i];
        const double gap = r * r - std::norm(x[i] - d.center[i]);
        if (!(gap > 0.0) || !(std::abs(x[i] - d.center[i]) < r))
            throw InvalidInput("kobayashi_norm: point not inside the polydisc");
        k = std::max(k, r * std::abs(xi[i]) / gap);
    }
    return k;
}

template <std::size_t N>
double kobayashi_norm(const Polydisc& d, const Vector<N>& x, const Vector<N>& xi) {
    return kobayashi_norm(d, std::span<const Complex>(x.c.data(), N), std::span<const Complex>(xi.c.data(), N));
}

template <std::size_t N>
struct HolomorphicMap {
    std::function<Vector<N>(const Vector<N>&)> value;
    std::function<Matrix<N, N>(const Vector<N>&)> jacobian;
};

template <std::size_t N>
struct TangentSample {
    Vector<N> x;
    Vector<N> xi;
};

struct SchwarzPickReport {
    double max_violation = -std::numeric_limits<double>::infinity();  // max K'(f x, Df xi) - K(x, xi)
    std::size_t worst = 0;
    std::size_t samples = 0;
    bool pass = false;  // max_violation <= tolerance
    double tolerance = 1e-9;
};

// Samples must lie in `domain`; every image must land in `target`.
template <std::size_t N>
SchwarzPickReport schwarz_pick_check(const HolomorphicMap<N>& f, const Polydisc& domain, const Polydisc& target,
                                     const std::vector<TangentSample<N>>& samples, double tolerance = 1e-9) {
    SchwarzPickReport rep;
    rep.tolerance = tolerance;
    rep.samples = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!kobayashi_membership(domain, s.x)) throw InvalidInput("schwarz_pick_check: sample outside the domain");
        const Vector<N> y = f.value(s.x);
        if (!kobayashi_membership(target, y))
            throw PreconditionViolation("schwarz_pick_check: image of sample " + std::to_string(i) +
                                        " escapes the target polydisc");
        const double v = kobayashi_norm(target, y, f.jacobian(s.x) * s.xi) - kobayashi_norm(domain, s.x, s.xi);
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.worst = i;
        }
    }
    rep.pass = samples.empty() || rep.max_violation <= tolerance;
    return rep;
}

// f'(0) for f holomorphic near 0 with f(0) = 0, by the trapezoid rule on |z| = radius.
inline Complex cauchy_derivative(const std::function<Complex(Complex)>& f, double radius, int points) {
    Complex s = 0.0;
    for (int k = 0; k < points; ++k) {
        const Complex w = std::polar(1.0, 2.0 * M_PI * k / points);
        s += f(radius * w) / w;
    }
    return s / (radius * points);
}

struct ContractionOptions {
    int window = 40;
    int cauchy_points = 16;
    double cauchy_radius = 0.1;  // in normalized disc coordinates
    int max_rescalings = 40;
    double rounding = 1e-12;     // relative slack for rounding in the bound comparisons
    SampleSpec samples;
    int probe_horizon = 200;
};

struct ContractionStep {
    int orbit_index = 0;
    double derivative_norm = 0.0;  // |D f_x(0)| of the normalized disc map
    double image_sup = 0.0;        // sampled sup |f_x(z)| over the unit disc
    double frame_norm = 0.0;       // |D phi(x)(0)| of the normalized leaf parametrization
};

// Disc maps f_x = phi(f^{-1} x)^{-1} o f^{-1} o phi(x), phi(x)(z) the leaf
// point with coordinate rho z.
struct ContractionCertificate {
    bool available = false;
    std::string reason;
    double leaf_radius = 0.0;
    double rho = 0.0;       // normalization radius in leaf coordinates
    int rescalings = 0;     // halvings of rho after the probe radius
    int probe_n = 0;        // N from the dynamically defined probe
    std::vector<ContractionStep> steps;
    double c_estimate = std::numeric_limits<double>::quiet_NaN();  // sampled sup, an under-estimate of C
    int window = 0;
    std::vector<double> direct;         // sup over x of |Df^{-n}|F(x)|, n = 1..window
    std::vector<double> product_bound;  // sup over x of C^2 prod |D f(0)|
    std::vector<double> half_bound;     // (1/2)^n C^2
    bool steps_pass = false;
    bool bound_pass = false;
    bool pass = false;
};

namespace detail {

template <PlaneMap M>
Complex disc_map(const M& f, const LeafCycle& c, int m, double rho, Complex z, double* off = nullptr) {
    Complex u = rho * z;
    backward_leaf_step(f, c, m, u, std::numeric_limits<double>::infinity(), off);
    return u / rho;
}

inline double frame_norm(const LeafChart& l, double rho) {
    const Vec2 t = l.chart * Vec2{1.0, l.phi.derivative(0.0)};
    return rho * norm(t);
}

}  // namespace detail

template <PlaneMap M>
ContractionCertificate unstable_contraction_certificate(const M& f, const LeafCycle& cycle, const Cocycle& c,
                                                        const SplittingData& s, const ContractionOptions& opt = {}) {
    ContractionCertificate cert;
    cert.window = opt.window;
    cert.leaf_radius = cycle.radius();
    if (!cycle.converged()) {
        cert.reason = "leaves not converged";
        return cert;
    }
    if (static_cast<int>(s.size()) != cycle.period()) throw InvalidInput("unstable_contraction_certificate: splitting/cycle mismatch");

    const std::vector<LeafCycle> cs{cycle};
    double rho = std::min(1.0, 0.5 * cert.leaf_radius);
    const auto dd = dynamically_defined_probe(f, cs, rho, opt.samples, opt.probe_horizon);
    if (dd.verdict != Verdict::pass) {
        cert.reason = "normalization unverifiable: dynamically defined probe did not pass";
        return cert;
    }
    cert.probe_n = dd.n.value_or(0);

    // Halve rho until f^{-1}(W_rho) lies in W_{rho/2} at every orbit index.
    const auto z = leaf_samples(1.0, opt.samples);
    auto normalized = [&](double r, std::vector<double>& sup) {
        sup.assign(static_cast<std::size_t>(cycle.period()), 0.0);
        for (int m = 0; m < cycle.period(); ++m)
            for (const auto& w : z) {
                double off = 0.0;
                const double a = std::abs(detail::disc_map(f, cycle, m, r, w, &off));
                if (!(off < opt.samples.on_leaf_tolerance) || !(a <= 0.5 * (1.0 + opt.rounding))) return false;
                sup[static_cast<std::size_t>(m)] = std::max(sup[static_cast<std::size_t>(m)], a);
            }
        return true;
    };
    std::vector<double> sup;
    while (!normalized(rho, sup)) {
        if (++cert.rescalings > opt.max_rescalings) {
            cert.reason = "normalization unverifiable: no radius with f^{-1}(W_rho) in W_{rho/2}";
            return cert;
        }
        rho *= 0.5;
    }
    cert.rho = rho;
    cert.available = true;

    double cmax = 1.0;
    cert.steps_pass = true;
    for (int m = 0; m < cycle.period(); ++m) {
        ContractionStep st;
        st.orbit_index = m;
        st.image_sup = sup[static_cast<std::size_t>(m)];
        const auto fm = [&](Complex w) { return detail::disc_map(f, cycle, m, rho, w); };
        st.derivative_norm = std::abs(cauchy_derivative(fm, opt.cauchy_radius, opt.cauchy_points));
        st.frame_norm = detail::frame_norm(cycle.at(m), rho);
        cmax = std::max({cmax, st.frame_norm, 1.0 / st.frame_norm});
        if (!(st.derivative_norm <= 0.5 * (1.0 + opt.rounding))) cert.steps_pass = false;
        cert.steps.push_back(st);
    }
    cert.c_estimate = cmax;
    const double c2 = cmax * cmax;

    const auto dom = domination_check(c, s, opt.window);
    cert.direct = dom.backward_f;
    const int n_max = std::min(opt.window, static_cast<int>(cert.direct.size()));
    cert.window = n_max;
    cert.bound_pass = n_max > 0;
    for (int n = 1; n <= n_max; ++n) {
        double prod = 0.0;
        for (int m = 0; m < cycle.period(); ++m) {
            double p = 1.0;
            for (int k = 0; k < n; ++k) p *= cert.steps[static_cast<std::size_t>(((m - k) % cycle.period() + cycle.period()) % cycle.period())].derivative_norm;
            prod = std::max(prod, p);
        }
        cert.product_bound.push_back(c2 * prod);
        cert.half_bound.push_back(c2 * std::pow(0.5, n));
        const double d = cert.direct[static_cast<std::size_t>(n - 1)];
        if (!(d <= cert.product_bound.back() * (1.0 + opt.rounding)) || !(d <= cert.half_bound.back() * (1.0 + opt.rounding)))
            cert.bound_pass = false;
    }
    cert.direct.resize(static_cast<std::size_t>(n_max));
    cert.pass = cert.steps_pass && cert.bound_pass;
    return cert;
}

template <PlaneMap M>
ContractionCertificate unstable_contraction_certificate(const M& f, const PeriodicOrbit& o, const ContractionOptions& opt = {},
                                                        const LeafBuildOptions& build = {}) {
    const auto b = build_leaf_cycle(f, o, LeafKind::center_unstable, build);
    return unstable_contraction_certificate(f, b.cycle, Cocycle::from_orbit(o), b.splitting, opt);
}

}  // namespace cuhyp
