#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/parallel.hpp"
#include "cuhyp/henon/henon.hpp"
#include "cuhyp/henon/plane_map.hpp"
#include "cuhyp/leaf/leaf_cycle.hpp"

namespace cuhyp {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

// Samples z = rho_j e^{i theta_k} in leaf coordinates, rho_j = rmax (j+1)/radii.
struct SampleSpec {
    int angles = 16;
    int radii = 8;
    unsigned threads = 1;
    double on_leaf_tolerance = 1e-6;  // graph distance for leaf membership
};

inline std::vector<Complex> leaf_samples(double rmax, const SampleSpec& s) {
    std::vector<Complex> z;
    for (int j = 0; j < s.radii; ++j)
        for (int k = 0; k < s.angles; ++k)
            z.push_back(std::polar(rmax * (j + 1) / s.radii, 2.0 * M_PI * (k + 0.5 * (j % 2)) / s.angles));
    return z;
}

// A sample that broke a probe condition.
struct ProbeWitness {
    int cycle = 0;
    int orbit_index = 0;
    Complex z;  // leaf coordinate of the starting sample
    int n = 0;  // iterate at which the condition failed
    std::string reason;
};

namespace detail {

// One backward step along center-unstable leaves: f^{-1} of the leaf point
// with coordinate z at orbit index m, read in the chart at m - 1 and
// projected onto that leaf along the chart's second axis.
template <PlaneMap M>
bool backward_leaf_step(const M& f, const LeafCycle& c, int m, Complex& z, double tol, double* off = nullptr) {
    const Vec2 p = f.apply_inverse(c.at(m).embed(z));
    const auto& prev = c.at(m - 1);
    const Vec2 h = prev.coordinates(p);
    const double d = std::abs(h[1] - prev.phi(h[0]));
    if (off) *off = d;
    z = h[0];
    return d < tol;
}

// Forward step without projection (transverse errors contract forward).
template <PlaneMap M>
bool forward_leaf_step(const M& f, const LeafCycle& c, int m, Vec2& p, Complex& z, double tol) {
    p = f.apply(p);
    const auto& next = c.at(m + 1);
    const Vec2 h = next.coordinates(p);
    z = h[0];
    return std::abs(h[1] - next.phi(h[0])) < tol;
}

struct Job {
    int cycle;
    int m;
    Complex z;
};

inline std::vector<Job> jobs(const std::vector<LeafCycle>& cycles, double rmax, const SampleSpec& s) {
    std::vector<Job> out;
    const auto z = leaf_samples(rmax, s);
    for (std::size_t c = 0; c < cycles.size(); ++c)
        for (int m = 0; m < cycles[c].period(); ++m)
            for (const auto& v : z) out.push_back({static_cast<int>(c), m, v});
    return out;
}

inline double min_radius(const std::vector<LeafCycle>& cycles) {
    if (cycles.empty()) throw InvalidInput("leaf probe: no leaves");
    double r = std::numeric_limits<double>::infinity();
    for (const auto& c : cycles) r = std::min(r, c.radius());
    return r;
}

// f^{-n}(W_rho) inside W_bound for n = 1..horizon; first witness otherwise.
template <PlaneMap M>
std::optional<ProbeWitness> backward_containment(const M& f, const std::vector<LeafCycle>& cycles, double rho,
                                                 double bound, int horizon, const SampleSpec& s) {
    const auto js = jobs(cycles, rho, s);
    std::vector<std::optional<ProbeWitness>> w(js.size());
    parallel_for(js.size(), s.threads, [&](std::size_t i) {
        const auto& j = js[i];
        const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
        Complex z = j.z;
        for (int n = 1; n <= horizon; ++n) {
            double off = 0.0;
            const bool on = backward_leaf_step(f, c, j.m - n + 1, z, s.on_leaf_tolerance, &off);
            if (!on || !(std::abs(z) < bound)) {
                w[i] = ProbeWitness{j.cycle, j.m, j.z, n,
                                    on ? "backward image outside the target radius" : "backward image off the leaf"};
                return;
            }
            if (std::abs(z) < 1e-14 * bound) return;
        }
    });
    for (auto& x : w)
        if (x) return x;
    return std::nullopt;
}

}  // namespace detail

struct EntryTime {
    std::optional<int> n;  // least N with f^{-k}(W_from) inside W_target for all N <= k <= horizon
    std::optional<ProbeWitness> witness;
};

// N(r_target, r_from) on the samples.
template <PlaneMap M>
EntryTime entry_time(const M& f, const std::vector<LeafCycle>& cycles, double r_from, double r_target,
                     const SampleSpec& s = {}, int horizon = 200) {
    const auto js = detail::jobs(cycles, r_from, s);
    std::vector<int> last(js.size(), 0);  // last k with |z_k| >= r_target
    std::vector<std::optional<ProbeWitness>> w(js.size());
    parallel_for(js.size(), s.threads, [&](std::size_t i) {
        const auto& j = js[i];
        const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
        Complex z = j.z;
        for (int k = 1; k <= horizon; ++k) {
            if (!detail::backward_leaf_step(f, c, j.m - k + 1, z, s.on_leaf_tolerance)) {
                w[i] = ProbeWitness{j.cycle, j.m, j.z, k, "backward image off the leaf"};
                return;
            }
            if (!(std::abs(z) < r_target)) last[i] = k;
            if (std::abs(z) < 1e-14 * r_target) break;
        }
        if (last[i] == horizon) w[i] = ProbeWitness{j.cycle, j.m, j.z, horizon, "no entry into the target radius within the horizon"};
    });
    EntryTime e;
    for (auto& x : w)
        if (x) {
            e.witness = x;
            return e;
        }
    e.n = 1 + *std::max_element(last.begin(), last.end());
    return e;
}

struct DynamicalDefinitionReport {
    Verdict verdict = Verdict::inconclusive;
    bool complete = true;   // false when some backward leaf is unresolved
    double r1 = 0.0;
    double r0 = 0.0;        // largest sampled radius with f^{-n}(W_r0) in W_r1
    std::optional<int> n;   // N(r0, r1)
    double contraction_rate = std::numeric_limits<double>::quiet_NaN();  // worst per-step |u| ratio
    std::optional<ProbeWitness> witness;
    SampleSpec spec;
    int horizon = 0;
    double r0_cap = 0.5;
};

// r0 by bisection on (0, cap r1]; then N(r0, r1).
template <PlaneMap M>
DynamicalDefinitionReport dynamically_defined_probe(const M& f, const std::vector<LeafCycle>& cycles, double r1,
                                                    const SampleSpec& s = {}, int horizon = 200, double cap = 0.5) {
    DynamicalDefinitionReport rep;
    rep.r1 = r1;
    rep.spec = s;
    rep.horizon = horizon;
    rep.r0_cap = cap;
    if (!(r1 > 0.0) || !(r1 < detail::min_radius(cycles))) throw InvalidInput("dynamically_defined_probe: need 0 < r1 < leaf size");
    for (const auto& c : cycles)
        if (!c.converged()) {
            rep.complete = false;
            rep.verdict = Verdict::inconclusive;
            return rep;
        }

    double r0 = cap * r1;
    auto w = detail::backward_containment(f, cycles, r0, r1, horizon, s);
    if (w) {
        double lo = 0.0, hi = r0;
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (detail::backward_containment(f, cycles, mid, r1, horizon, s)) hi = mid;
            else lo = mid;
        }
        r0 = lo;
        if (!(r0 > 1e-9 * r1)) {
            rep.witness = w;
            rep.verdict = Verdict::fail;
            return rep;
        }
    }
    rep.r0 = r0;

    const auto e = entry_time(f, cycles, r1, r0, s, horizon);
    rep.n = e.n;
    if (!e.n) {
        rep.witness = e.witness;
        rep.verdict = Verdict::fail;
        return rep;
    }

    // Per-step backward rate from rim samples of W_r1.
    double worst = 0.0;
    for (std::size_t ci = 0; ci < cycles.size(); ++ci) {
        const auto& c = cycles[ci];
        for (int m = 0; m < c.period(); ++m)
            for (int k = 0; k < s.angles; ++k) {
                Complex z = std::polar(r1, 2.0 * M_PI * k / s.angles);
                const double z0 = std::abs(z);
                int n = 0;
                // Whole cycles only, so per-step blocks average out.
                while (n < horizon && (std::abs(z) > 1e-8 * r1 || n % c.period() != 0)) {
                    detail::backward_leaf_step(f, c, m - n, z, std::numeric_limits<double>::infinity());
                    ++n;
                }
                if (n > 0) worst = std::max(worst, std::pow(std::abs(z) / z0, 1.0 / n));
            }
    }
    rep.contraction_rate = worst;
    rep.verdict = Verdict::pass;
    return rep;
}

struct OverlapItem {
    bool pass = false;
    int checked = 0;
    std::optional<ProbeWitness> witness;
};

struct OverlapCertificate {
    double r = 0.0;
    double r2 = 0.0;
    double r1 = 0.0;
    double r0 = 0.0;
    double r_minus1 = 0.0;
    double r_ball = 0.0;  // B^cu is the chart disc of this radius
    double margin = 0.0;  // distance between the r2 and r boundaries
    int n = 0;
    bool n_found = false;
    std::array<OverlapItem, 3> items;
    bool ordered = false;
    bool pass = false;
};

// Radii by the recipe: r1 from backward containment in W_r2, r0 = r1 / 2,
// N = N(r0 - r0/8, r1), B^cu between the images of W_r1 and W_r0, r_{-1}
// half the smallest image radius of the rim of W_r1.
template <PlaneMap M>
OverlapCertificate overlap_certificate(const M& f, const std::vector<LeafCycle>& cycles, double r2,
                                       const SampleSpec& s = {}, int horizon = 200) {
    OverlapCertificate cert;
    cert.r = detail::min_radius(cycles);
    cert.r2 = r2;
    if (!(r2 > 0.0) || !(r2 < cert.r)) throw InvalidInput("overlap_certificate: need 0 < r2 < leaf size");
    cert.margin = cert.r - r2;

    const auto dd = dynamically_defined_probe(f, cycles, r2, s, horizon);
    cert.r1 = dd.r0;
    cert.r0 = 0.5 * cert.r1;
    if (!(cert.r1 > 0.0)) return cert;

    const auto e = entry_time(f, cycles, cert.r1, cert.r0 * 0.875, s, horizon);
    cert.n_found = e.n.has_value();
    cert.n = e.n.value_or(horizon);
    const int N = cert.n;

    // Image radii of f^{-N}(W_r1).
    const auto js = detail::jobs(cycles, cert.r1, s);
    double img_max = 0.0, rim_min = std::numeric_limits<double>::infinity();
    for (const auto& j : js) {
        const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
        Complex z = j.z;
        for (int k = 1; k <= N; ++k) detail::backward_leaf_step(f, c, j.m - k + 1, z, std::numeric_limits<double>::infinity());
        img_max = std::max(img_max, std::abs(z));
        if (std::abs(std::abs(j.z) - cert.r1) < 1e-12 * cert.r1) rim_min = std::min(rim_min, std::abs(z));
    }
    cert.r_ball = img_max < cert.r0 ? 0.5 * (img_max + cert.r0) : cert.r0 * 0.9375;
    cert.r_minus1 = std::min(0.5 * rim_min, 0.5 * cert.r_ball);
    cert.ordered = 0.0 < cert.r_minus1 && cert.r_minus1 < cert.r0 && cert.r0 < cert.r1 && cert.r1 < cert.r2 &&
                   cert.r2 < cert.r && cert.r_minus1 <= cert.r_ball && cert.r_ball < cert.r0;

    // Item 1: f^{-n}(W_r1) inside the open W_r0 for N <= n <= horizon.
    {
        auto& it = cert.items[0];
        it.pass = cert.n_found;
        if (!cert.n_found) it.witness = e.witness;
        for (const auto& j : js) {
            if (!it.pass) break;
            const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
            Complex z = j.z;
            for (int k = 1; k <= horizon; ++k) {
                const bool on = detail::backward_leaf_step(f, c, j.m - k + 1, z, s.on_leaf_tolerance);
                if (k >= N) {
                    ++it.checked;
                    if (!on || !(std::abs(z) < cert.r0)) {
                        it.pass = false;
                        it.witness = ProbeWitness{j.cycle, j.m, j.z, k, "f^{-n}(W_r1) leaves W_r0"};
                        break;
                    }
                }
                if (std::abs(z) < 1e-14 * cert.r0) break;
            }
        }
    }

    // Item 2: W_{r-1}(f^{-N} x) in f^{-N}(W_r1(x)), and f^{-N}(W_r1) in B.
    {
        auto& it = cert.items[1];
        it.pass = true;
        for (const auto& j : detail::jobs(cycles, cert.r_minus1, s)) {
            const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
            // j.m is f^{-N} x; push forward N steps.
            Vec2 p = c.at(j.m).embed(j.z);
            Complex z = j.z;
            bool on = true;
            for (int k = 0; k < N && on; ++k) on = detail::forward_leaf_step(f, c, j.m + k, p, z, s.on_leaf_tolerance);
            ++it.checked;
            if (!on || !(std::abs(z) < cert.r1)) {
                it.pass = false;
                it.witness = ProbeWitness{j.cycle, j.m, j.z, N, "W_{r-1} not inside f^{-N}(W_r1)"};
                break;
            }
        }
        for (const auto& j : js) {
            if (!it.pass) break;
            const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
            Complex z = j.z;
            bool on = true;
            for (int k = 1; k <= N && on; ++k) on = detail::backward_leaf_step(f, c, j.m - k + 1, z, s.on_leaf_tolerance);
            ++it.checked;
            if (!on || !(std::abs(z) < cert.r_ball)) {
                it.pass = false;
                it.witness = ProbeWitness{j.cycle, j.m, j.z, N, "f^{-N}(W_r1) not inside B"};
            }
        }
    }

    // Item 3: f^k(B(f^{-N} x)) inside the open W_r(f^{k-N} x), 0 <= k <= N.
    {
        auto& it = cert.items[2];
        it.pass = true;
        for (const auto& j : detail::jobs(cycles, cert.r_ball, s)) {
            const auto& c = cycles[static_cast<std::size_t>(j.cycle)];
            Vec2 p = c.at(j.m).embed(j.z);
            Complex z = j.z;
            for (int k = 0; k <= N; ++k) {
                ++it.checked;
                bool on = true;
                if (k > 0) on = detail::forward_leaf_step(f, c, j.m + k - 1, p, z, s.on_leaf_tolerance);
                if (!on || !(std::abs(z) < cert.r)) {
                    it.pass = false;
                    it.witness = ProbeWitness{j.cycle, j.m, j.z, k, "forward image of B leaves W_r"};
                    break;
                }
            }
            if (!it.pass) break;
        }
    }
    cert.pass = cert.ordered && cert.items[0].pass && cert.items[1].pass && cert.items[2].pass;
    return cert;
}

struct SampleVerdict {
    int cycle = 0;
    int orbit_index = 0;
    Complex z;
    int n = 0;  // first separation time, 0 when none within the horizon
    bool separated = false;
};

struct ExpansivenessReport {
    double c = 0.0;
    double epsilon = 0.0;
    int horizon = 0;
    SampleSpec spec;
    std::vector<SampleVerdict> samples;
    int sup_n = 0;
    Verdict verdict = Verdict::inconclusive;
    std::optional<SampleVerdict> witness;  // first non-separating sample
};

// First n in 1..horizon with |f^n(y) - x_{m+n}| > c, where x_{m+n} is taken
// from the cycle instead of iterating x. Escaped orbits count as separated.
template <PlaneMap M>
std::optional<int> first_separation(const M& f, const LeafCycle& c, int m, const Vec2& y, double sep, int horizon) {
    Vec2 w = y;
    for (int n = 1; n <= horizon; ++n) {
        w = f.apply(w);
        if (overflowed(w) || norm(w - c.at(m + n).base) > sep) return n;
    }
    return std::nullopt;
}

// Samples at radii up to eps = min(r/4, c/2) on each leaf; the base point
// itself is never sampled.
template <PlaneMap M>
ExpansivenessReport forward_expansive_probe(const M& f, const std::vector<LeafCycle>& cycles, double c,
                                            const SampleSpec& s = {}, int horizon = 200) {
    if (!(c > 0.0)) throw InvalidInput("forward_expansive_probe: c must be positive");
    ExpansivenessReport rep;
    rep.c = c;
    rep.horizon = horizon;
    rep.spec = s;
    rep.epsilon = std::min(0.25 * detail::min_radius(cycles), 0.5 * c);
    const auto js = detail::jobs(cycles, rep.epsilon, s);
    rep.samples.resize(js.size());
    parallel_for(js.size(), s.threads, [&](std::size_t i) {
        const auto& j = js[i];
        const auto& cy = cycles[static_cast<std::size_t>(j.cycle)];
        const auto n = first_separation(f, cy, j.m, cy.at(j.m).embed(j.z), c, horizon);
        rep.samples[i] = SampleVerdict{j.cycle, j.m, j.z, n.value_or(0), n.has_value()};
    });
    rep.verdict = Verdict::pass;
    for (const auto& v : rep.samples) {
        rep.sup_n = std::max(rep.sup_n, v.n);
        if (!v.separated && !rep.witness) {
            rep.witness = v;
            rep.verdict = Verdict::inconclusive;
        }
    }
    return rep;
}

struct UPlusResult {
    bool hit = false;
    bool inconclusive = false;
    int n = 0;     // escape step of the witness
    Complex z;     // leaf coordinate of the witness
};

// Per leaf: does some sample of the leaf escape to U+ within max_iter?
inline std::vector<UPlusResult> uplus_probe(const GeneralizedHenon& h, const std::vector<LeafCycle>& cycles,
                                            int max_iter, const SampleSpec& s = {}) {
    std::vector<UPlusResult> out;
    for (const auto& c : cycles)
        for (const auto& leaf : c.leaves) {
            UPlusResult r;
            r.inconclusive = true;
            for (const auto& z : leaf_samples(leaf.epsilon, s)) {
                const auto e = escapes_to_uplus(h, leaf.embed(z), max_iter);
                if (e.escaped && (!r.hit || e.n < r.n)) {
                    r.hit = true;
                    r.inconclusive = false;
                    r.n = e.n;
                    r.z = z;
                }
            }
            out.push_back(r);
        }
    return out;
}

}  // namespace cuhyp
