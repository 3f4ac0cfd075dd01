#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/henon/plane_map.hpp"
#include "cuhyp/orbits/periodic.hpp"

namespace cuhyp {

// Derivative cocycle m -> Df(x_m) over an orbit, stored either as a finite
// window [lo, hi] or as a cycle repeated with period jacobians.size().
class Cocycle {
public:
    static Cocycle periodic(std::vector<Mat2> jacobians, std::vector<Vec2> points = {}) {
        if (jacobians.empty()) throw InvalidInput("Cocycle::periodic: empty cycle");
        Cocycle c;
        c.jac_ = std::move(jacobians);
        c.pts_ = std::move(points);
        c.periodic_ = true;
        c.prepare();
        return c;
    }

    static Cocycle constant(const Mat2& a) { return periodic({a}); }

    static Cocycle from_orbit(const PeriodicOrbit& o) { return periodic(o.jacobians, o.points); }

    // Orbit window x_m, m in [-back, fwd]; throws when the orbit is unbounded.
    template <PlaneMap M>
    static Cocycle window(const M& f, const Vec2& x, int back, int fwd) {
        const auto seg = make_orbit_segment(f, x, -back, fwd);
        Cocycle c;
        c.jac_ = seg.jacobians;
        c.pts_ = seg.points;
        c.lo_ = -back;
        c.hi_ = fwd;
        c.periodic_ = false;
        c.prepare();
        return c;
    }

    bool is_periodic() const { return periodic_; }
    int period() const { return periodic_ ? static_cast<int>(jac_.size()) : 0; }
    int lo() const { return periodic_ ? std::numeric_limits<int>::min() / 4 : lo_; }
    int hi() const { return periodic_ ? std::numeric_limits<int>::max() / 4 : hi_; }
    bool has(int m) const { return periodic_ || (m >= lo_ && m <= hi_); }

    const Mat2& at(int m) const { return jac_[index(m)]; }
    const Mat2& inverse_at(int m) const { return inv_[index(m)]; }
    double det_modulus(int m) const { return detmod_[index(m)]; }
    bool has_points() const { return !pts_.empty(); }
    const Vec2& point(int m) const { return pts_.at(index(m)); }

    // Conjugated cocycle U A_m U^{-1}, for invariance checks.
    Cocycle conjugated(const Mat2& u) const {
        Cocycle c = *this;
        const Mat2 ui = inverse(u);
        for (auto& j : c.jac_) j = u * j * ui;
        c.prepare();
        return c;
    }

private:
    std::size_t index(int m) const {
        if (periodic_) {
            const int p = static_cast<int>(jac_.size());
            return static_cast<std::size_t>(((m % p) + p) % p);
        }
        if (m < lo_ || m > hi_) throw InvalidInput("Cocycle: index outside the orbit window");
        return static_cast<std::size_t>(m - lo_);
    }

    void prepare() {
        inv_.clear();
        detmod_.clear();
        for (const auto& j : jac_) {
            inv_.push_back(inverse(j));
            detmod_.push_back(std::abs(det(j)));
        }
    }

    std::vector<Mat2> jac_;
    std::vector<Mat2> inv_;
    std::vector<double> detmod_;
    std::vector<Vec2> pts_;
    int lo_ = 0;
    int hi_ = 0;
    bool periodic_ = false;
};

// Per point m = 0..size-1 of the cocycle: unit E (dominated) and F
// (dominating) directions, with finite-horizon estimates of
// |Df^n|_E| <= C lambda^n and |Df^{-n}|_F| <= C mu^{-n}.
struct SplittingData {
    std::vector<Vec2> e;
    std::vector<Vec2> f;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
    double min_angle = 0.0;
    bool resolved = false;
    int depth = 0;                    // power-iteration depth reached
    double increment = 0.0;           // last angular Cauchy increment
    double invariance_residual = 0.0; // max angle(Df F(x_m), F(x_m+1)) and same for E
    int horizon = 0;
    std::string diagnostic;
    std::size_t size() const { return f.size(); }
};

struct DirectionOptions {
    int initial_depth = 8;
    int max_depth = 2048;
    double tolerance = 1e-9;
    int horizon = 60;  // steps used for the (lambda, mu, C) estimates
};

// Least-squares slope of log s_n against n, and the smallest C >= 1 with
// s_n <= C rate^n on the sample.
struct EnvelopeFit {
    double rate = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
};

inline EnvelopeFit fit_envelope(const std::vector<double>& log_s) {
    EnvelopeFit out;
    const std::size_t n = log_s.size();
    if (n == 0) return out;
    for (double v : log_s)
        if (!std::isfinite(v)) return out;
    double slope;
    if (n == 1) {
        slope = log_s[0];
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = static_cast<double>(i + 1);
            sx += x;
            sy += log_s[i];
            sxx += x * x;
            sxy += x * log_s[i];
        }
        const double dn = static_cast<double>(n);
        slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    }
    double logc = 0.0;
    for (std::size_t i = 0; i < n; ++i) logc = std::max(logc, log_s[i] - slope * static_cast<double>(i + 1));
    out.rate = std::exp(slope);
    out.c = std::exp(logc);
    return out;
}

namespace detail {

// Push v through n steps starting at index m, forward (Df) or backward
// (Df^{-1}), renormalising; returns the unit image and accumulates
// log-norms into logs[k] (k = 1..n) if requested.
inline Vec2 push(const Cocycle& c, int m, Vec2 v, int n, bool forward, std::vector<double>* logs = nullptr,
                 double* total = nullptr) {
    double acc = 0.0;
    v = normalized(v);
    for (int k = 0; k < n; ++k) {
        const Vec2 w = forward ? c.at(m + k) * v : c.inverse_at(m - 1 - k) * v;
        const double nw = norm(w);
        acc += std::log(nw);
        v = w * (1.0 / nw);
        if (logs) (*logs)[static_cast<std::size_t>(k + 1)] = acc;
    }
    if (total) *total = acc;
    return v;
}

inline const std::array<Vec2, 2>& start_seeds() {
    static const std::array<Vec2, 2> s{Vec2{M_SQRT1_2, M_SQRT1_2}, Vec2{M_SQRT1_2, -M_SQRT1_2}};
    return s;
}

// Direction at x_m after pushing the better-growing seed through `depth`
// steps: forward from x_{m-depth} for F, backward from x_{m+depth} for E.
inline Vec2 power_direction(const Cocycle& c, int m, int depth, bool want_f) {
    Vec2 best;
    double best_growth = -std::numeric_limits<double>::infinity();
    for (const auto& seed : start_seeds()) {
        double g = 0.0;
        const Vec2 v = want_f ? push(c, m - depth, seed, depth, true, nullptr, &g)
                              : push(c, m + depth, seed, depth, false, nullptr, &g);
        if (g > best_growth + 1e-12) {
            best_growth = g;
            best = v;
        }
    }
    return best;
}

}  // namespace detail

inline void estimate_constants(const Cocycle& c, SplittingData& s, int horizon);

// E and F at x_0..x_{count-1} by power iteration with depth doubling until
// the angular increment between depths n and 2n drops below tolerance.
inline SplittingData compute_directions(const Cocycle& c, int count, const DirectionOptions& opt = {}) {
    if (count < 1) throw InvalidInput("compute_directions: count must be >= 1");
    SplittingData s;
    s.horizon = opt.horizon;
    auto directions = [&](int depth, std::vector<Vec2>& e, std::vector<Vec2>& f) {
        e.assign(static_cast<std::size_t>(count), Vec2{});
        f.assign(static_cast<std::size_t>(count), Vec2{});
        for (int m = 0; m < count; ++m) {
            f[static_cast<std::size_t>(m)] = detail::power_direction(c, m, depth, true);
            e[static_cast<std::size_t>(m)] = detail::power_direction(c, m, depth, false);
        }
    };
    auto fits = [&](int depth) {
        return c.has(-depth) && c.has(count - 1 + depth) && c.has(count - 1 - depth);
    };

    int depth = std::max(1, opt.initial_depth);
    if (!fits(depth)) {
        s.diagnostic = "orbit window shorter than the initial depth";
        return s;
    }
    std::vector<Vec2> e0, f0, e1, f1;
    directions(depth, e0, f0);
    while (true) {
        const int next = depth * 2;
        if (next > opt.max_depth || !fits(next)) {
            s.diagnostic = next > opt.max_depth ? "depth cap reached before convergence"
                                                : "orbit window exhausted before convergence";
            s.e = e0;
            s.f = f0;
            s.depth = depth;
            s.resolved = false;
            return s;
        }
        directions(next, e1, f1);
        double inc = 0.0;
        for (std::size_t i = 0; i < e0.size(); ++i) {
            inc = std::max(inc, line_angle(e0[i], e1[i]));
            inc = std::max(inc, line_angle(f0[i], f1[i]));
        }
        s.increment = inc;
        depth = next;
        e0 = e1;
        f0 = f1;
        if (inc < opt.tolerance) break;
    }
    s.e = e0;
    s.f = f0;
    s.depth = depth;
    s.resolved = true;

    s.min_angle = M_PI / 2;
    for (std::size_t i = 0; i < s.e.size(); ++i) s.min_angle = std::min(s.min_angle, line_angle(s.e[i], s.f[i]));
    for (int m = 0; m + 1 < count || (c.is_periodic() && m < count); ++m) {
        const int nxt = m + 1;
        Vec2 fn, en;
        if (nxt < count) {
            fn = s.f[static_cast<std::size_t>(nxt)];
            en = s.e[static_cast<std::size_t>(nxt)];
        } else if (c.is_periodic() && count % c.period() == 0) {
            fn = s.f[static_cast<std::size_t>(nxt % count)];
            en = s.e[static_cast<std::size_t>(nxt % count)];
        } else {
            break;
        }
        s.invariance_residual = std::max(s.invariance_residual, line_angle(c.at(m) * s.f[static_cast<std::size_t>(m)], fn));
        s.invariance_residual = std::max(s.invariance_residual, line_angle(c.at(m) * s.e[static_cast<std::size_t>(m)], en));
    }
    if (!(s.min_angle > 0.0)) {
        s.resolved = false;
        s.diagnostic = "E and F coincide";
        return s;
    }
    estimate_constants(c, s, opt.horizon);
    return s;
}

inline SplittingData compute_directions(const PeriodicOrbit& o, const DirectionOptions& opt = {}) {
    return compute_directions(Cocycle::from_orbit(o), o.period, opt);
}

// Splitting at a single point from its own orbit window of length
// max_depth in both directions.
template <PlaneMap M>
SplittingData compute_directions(const M& f, const Vec2& x, const DirectionOptions& opt = {}) {
    int depth = std::max(1, opt.initial_depth);
    SplittingData last;
    last.diagnostic = "orbit unbounded within the initial depth";
    while (depth <= opt.max_depth) {
        const int window = 2 * depth + opt.horizon;
        Cocycle c;
        try {
            c = Cocycle::window(f, x, window, window);
        } catch (const InvalidInput&) {
            last.diagnostic = "orbit unbounded at depth " + std::to_string(depth);
            return last;
        }
        DirectionOptions o = opt;
        o.max_depth = 2 * depth;
        last = compute_directions(c, 1, o);
        if (last.resolved) return last;
        depth *= 4;
    }
    return last;
}

namespace detail {

// One-step log growth of E and F at x_j for j in [lo, hi]. Norms of Df^n
// restricted to E or F are sums of these, by invariance; pushing a single
// vector n steps instead lets roundoff drift it into the other line.
struct StepGrowth {
    int lo = 0;
    int hi = -1;
    std::vector<double> e;
    std::vector<double> f;
    double ge(int j) const { return e[static_cast<std::size_t>(j - lo)]; }
    double gf(int j) const { return f[static_cast<std::size_t>(j - lo)]; }
};

// Largest n <= horizon for which directions exist on [-n, count - 1 + n].
inline int usable_horizon(const Cocycle& c, const SplittingData& s, int horizon) {
    const int count = static_cast<int>(s.size());
    if (c.is_periodic()) return horizon;
    const int depth = std::max(1, s.depth);
    const int n = std::min({horizon, -c.lo() - depth, c.hi() - depth - (count - 1)});
    return std::max(n, 0);
}

inline StepGrowth step_growth(const Cocycle& c, const SplittingData& s, int n) {
    const int count = static_cast<int>(s.size());
    StepGrowth g;
    g.lo = -n;
    g.hi = count - 1 + n;
    const bool wrap = c.is_periodic() && count % c.period() == 0;
    for (int j = g.lo; j <= g.hi; ++j) {
        Vec2 e, f;
        if (wrap) {
            const auto i = static_cast<std::size_t>(((j % count) + count) % count);
            e = s.e[i];
            f = s.f[i];
        } else if (j >= 0 && j < count) {
            e = s.e[static_cast<std::size_t>(j)];
            f = s.f[static_cast<std::size_t>(j)];
        } else {
            e = power_direction(c, j, s.depth, false);
            f = power_direction(c, j, s.depth, true);
        }
        g.e.push_back(std::log(norm(c.at(j) * e)));
        g.f.push_back(std::log(norm(c.at(j) * f)));
    }
    return g;
}

}  // namespace detail

inline void estimate_constants(const Cocycle& c, SplittingData& s, int horizon) {
    const int count = static_cast<int>(s.size());
    const int n = detail::usable_horizon(c, s, horizon);
    if (n < 1 || count == 0) return;
    const auto g = detail::step_growth(c, s, n);
    std::vector<double> sup_e(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
    std::vector<double> sup_f(sup_e);
    for (int m = 0; m < count; ++m) {
        double fe = 0.0, bf = 0.0;
        for (int k = 1; k <= n; ++k) {
            fe += g.ge(m + k - 1);
            bf -= g.gf(m - k);
            sup_e[static_cast<std::size_t>(k - 1)] = std::max(sup_e[static_cast<std::size_t>(k - 1)], fe);
            sup_f[static_cast<std::size_t>(k - 1)] = std::max(sup_f[static_cast<std::size_t>(k - 1)], bf);
        }
    }
    const auto fe = fit_envelope(sup_e);
    const auto ff = fit_envelope(sup_f);
    s.lambda = fe.rate;
    s.mu = 1.0 / ff.rate;
    s.c = std::max(fe.c, ff.c);
    s.horizon = n;
}

struct DominationCertificate {
    std::vector<double> rho_f;  // sup over points of b_n / |Df^n v_F|^2, n = 1..N
    std::vector<double> rho_e;  // sup over points of b_n^{-1} / |Df^{-n} v_E|^2
    std::vector<double> backward_f;  // sup over points of |Df^{-n}|_F|
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();       // from SplittingData
    double lambda0 = std::numeric_limits<double>::quiet_NaN();
    double mu0 = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();        // geometric mean |det| per step
    double backward_rate = std::numeric_limits<double>::quiet_NaN();  // fit of backward_f
    double backward_c = std::numeric_limits<double>::quiet_NaN();
    int horizon = 0;
    double min_angle = 0.0;
    bool resolved = false;
    bool pass = false;
};

// (sqrt(b lambda), sqrt(b / lambda)) without admissibility checks.
inline std::pair<double, double> constants_from_rate(double b, double lambda) {
    return {std::sqrt(b * lambda), std::sqrt(b / lambda)};
}

inline DominationCertificate domination_check(const Cocycle& c, const SplittingData& s, int horizon = 60,
                                              double margin = 1e-6) {
    DominationCertificate cert;
    cert.resolved = s.resolved;
    cert.min_angle = s.min_angle;
    cert.mu = s.mu;
    const int count = static_cast<int>(s.size());
    const int n = detail::usable_horizon(c, s, horizon);
    if (count == 0 || n < 1) return cert;
    cert.horizon = n;

    const auto g = detail::step_growth(c, s, n);
    const auto N = static_cast<std::size_t>(n);
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> lf(N, ninf), le(N, ninf), lb(N, ninf);
    double logdet_sum = 0.0;
    for (int m = 0; m < count; ++m) {
        double fwd_det = 0.0, fwd_f = 0.0, bwd_det = 0.0, bwd_e = 0.0, bwd_f = 0.0;
        for (int k = 1; k <= n; ++k) {
            const auto i = static_cast<std::size_t>(k - 1);
            // log b_n - 2 log |Df^n v_F| forward from x_m.
            fwd_det += std::log(c.det_modulus(m + k - 1));
            fwd_f += g.gf(m + k - 1);
            lf[i] = std::max(lf[i], fwd_det - 2.0 * fwd_f);
            // -log b_n - 2 log |Df^{-n} v_E| backward from x_m.
            bwd_det += std::log(c.det_modulus(m - k));
            bwd_e -= g.ge(m - k);
            le[i] = std::max(le[i], -bwd_det - 2.0 * bwd_e);
            // log |Df^{-n}|_F|.
            bwd_f -= g.gf(m - k);
            lb[i] = std::max(lb[i], bwd_f);
        }
        logdet_sum += fwd_det / n;
    }
    cert.b = std::exp(logdet_sum / count);
    for (std::size_t k = 0; k < N; ++k) {
        cert.rho_f.push_back(std::exp(lf[k]));
        cert.rho_e.push_back(std::exp(le[k]));
        cert.backward_f.push_back(std::exp(lb[k]));
    }
    const auto ff = fit_envelope(lf);
    const auto fe = fit_envelope(le);
    const auto fb = fit_envelope(lb);
    cert.lambda = std::max(ff.rate, fe.rate);
    cert.c = std::max(ff.c, fe.c);
    cert.backward_rate = fb.rate;
    cert.backward_c = fb.c;
    const auto [l0, m0] = constants_from_rate(cert.b, cert.lambda);
    cert.lambda0 = l0;
    cert.mu0 = m0;
    cert.pass = s.resolved && std::isfinite(cert.lambda) && cert.lambda < 1.0 - margin;
    return cert;
}

// Checked version: the certificate must have passed with 0 < lambda < 1.
inline std::pair<double, double> partial_hyperbolicity_constants(double lambda, double b) {
    if (!(lambda > 0.0) || !(lambda < 1.0)) throw InvalidCertificate("partial_hyperbolicity_constants: need 0 < lambda < 1");
    if (!(b > 0.0)) throw InvalidInput("partial_hyperbolicity_constants: need b > 0");
    const auto [l0, m0] = constants_from_rate(b, lambda);
    if (!(l0 < m0)) throw InvalidCertificate("partial_hyperbolicity_constants: lambda0 >= mu0");
    if (b < 1.0 && !(l0 < 1.0)) throw InvalidCertificate("partial_hyperbolicity_constants: lambda0 >= 1 with b < 1");
    if (b == 1.0 && !(l0 < 1.0 && 1.0 < m0))
        throw InvalidCertificate("partial_hyperbolicity_constants: constants do not straddle 1 with b = 1");
    return {l0, m0};
}

inline std::pair<double, double> partial_hyperbolicity_constants(const DominationCertificate& cert, double b) {
    if (!cert.pass) throw InvalidCertificate("partial_hyperbolicity_constants: certificate did not pass");
    return partial_hyperbolicity_constants(cert.lambda, b);
}

}  // namespace cuhyp
