#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cuhyp/core/errors.hpp"
#include "cuhyp/kobayashi/kobayashi.hpp"
#include "cuhyp/leaf/probes.hpp"
#include "cuhyp/orbits/periodic.hpp"
#include "cuhyp/splitting/cocycle.hpp"

namespace cuhyp::report {

using nlohmann::json;

// Non-finite values become null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
inline json cnum(Complex z) { return json::array({num(z.real()), num(z.imag())}); }
inline json vec(const Vec2& v) { return json::array({cnum(v[0]), cnum(v[1])}); }

inline std::string g17(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline json orbit_json(const PeriodicOrbit& o, double chi) {
    json pts = json::array();
    for (const auto& p : o.points) pts.push_back(vec(p));
    return {{"period", o.period},
            {"multiplicity", o.multiplicity},
            {"points", pts},
            {"multipliers", json::array({cnum(o.multipliers[0]), cnum(o.multipliers[1])})},
            {"lambda_minus", num(o.lambda_minus)},
            {"lambda_plus", num(o.lambda_plus)},
            {"chi", num(chi)},
            {"classification", to_string(o.classification)},
            {"residual", num(o.residual)}};
}

inline std::string orbit_csv_header() {
    return "period,base_x_re,base_x_im,base_y_re,base_y_im,mult1_re,mult1_im,mult2_re,mult2_im,"
           "lambda_minus,lambda_plus,chi,classification\n";
}

inline std::string orbit_csv_row(const PeriodicOrbit& o, double chi) {
    const Vec2& p = o.points.front();
    std::string s = std::to_string(o.period);
    for (double x : {p[0].real(), p[0].imag(), p[1].real(), p[1].imag(), o.multipliers[0].real(), o.multipliers[0].imag(),
                     o.multipliers[1].real(), o.multipliers[1].imag(), o.lambda_minus, o.lambda_plus, chi})
        s += "," + g17(x);
    return s + "," + to_string(o.classification) + "\n";
}

inline json expansion_json(const ExpansionReport& r) {
    return {{"chi_min", num(r.chi_min)},
            {"witness", r.witness},
            {"C", num(r.c)},
            {"lambda1", num(r.lambda1)},
            {"alarm_threshold", num(r.alarm_threshold)},
            {"zero_exponent_alarm", r.zero_exponent_alarm}};
}

inline json splitting_json(const SplittingData& s, const DominationCertificate& d) {
    return {{"lambda", num(d.lambda)},
            {"mu", num(s.mu)},
            {"C", num(d.c)},
            {"lambda0", num(d.lambda0)},
            {"mu0", num(d.mu0)},
            {"b", num(d.b)},
            {"horizon", d.horizon},
            {"min_angle", num(s.min_angle)},
            {"resolved", s.resolved},
            {"depth", s.depth},
            {"invariance_residual", num(s.invariance_residual)},
            {"backward_rate", num(d.backward_rate)},
            {"pass", d.pass}};
}

inline json leaf_json(const LeafChart& l) {
    json a = json::array();
    for (const auto& c : l.phi.a) a.push_back(cnum(c));
    return {{"kind", to_string(l.kind)},
            {"orbit_index", l.orbit_index},
            {"base", vec(l.base)},
            {"epsilon", num(l.epsilon)},
            {"coefficients", a},
            {"tangency", num(l.tangency())},
            {"iterations", l.iterations},
            {"converged", l.converged},
            {"invariance_residual", num(l.invariance_residual)}};
}

inline json witness_json(const std::optional<ProbeWitness>& w) {
    if (!w) return nullptr;
    return {{"cycle", w->cycle}, {"orbit_index", w->orbit_index}, {"z", cnum(w->z)}, {"n", w->n}, {"reason", w->reason}};
}

inline json spec_json(const SampleSpec& s) {
    return {{"angles", s.angles}, {"radii", s.radii}, {"on_leaf_tolerance", num(s.on_leaf_tolerance)}};
}

inline json dd_json(const DynamicalDefinitionReport& r) {
    return {{"verdict", to_string(r.verdict)},
            {"complete", r.complete},
            {"r1", num(r.r1)},
            {"r0", num(r.r0)},
            {"r0_cap", num(r.r0_cap)},
            {"N", r.n ? json(*r.n) : json(nullptr)},
            {"contraction_rate", num(r.contraction_rate)},
            {"horizon", r.horizon},
            {"samples", spec_json(r.spec)},
            {"witness", witness_json(r.witness)}};
}

inline json overlap_json(const OverlapCertificate& c) {
    json items = json::array();
    for (const auto& it : c.items)
        items.push_back({{"pass", it.pass}, {"checked", it.checked}, {"witness", witness_json(it.witness)}});
    return {{"r", num(c.r)},         {"r2", num(c.r2)},       {"r1", num(c.r1)},
            {"r0", num(c.r0)},       {"r_minus1", num(c.r_minus1)}, {"r_ball", num(c.r_ball)},
            {"margin", num(c.margin)}, {"N", c.n},            {"N_found", c.n_found},
            {"ordered", c.ordered},  {"items", items},         {"pass", c.pass}};
}

inline json expansive_json(const ExpansivenessReport& r, bool with_samples) {
    json j = {{"verdict", to_string(r.verdict)},
              {"c", num(r.c)},
              {"epsilon", num(r.epsilon)},
              {"horizon", r.horizon},
              {"sup_n", r.sup_n},
              {"sample_count", r.samples.size()},
              {"samples_spec", spec_json(r.spec)}};
    if (r.witness)
        j["witness"] = {{"cycle", r.witness->cycle}, {"orbit_index", r.witness->orbit_index}, {"z", cnum(r.witness->z)}};
    else
        j["witness"] = nullptr;
    if (with_samples) {
        json s = json::array();
        for (const auto& v : r.samples)
            s.push_back({{"cycle", v.cycle}, {"orbit_index", v.orbit_index}, {"z", cnum(v.z)}, {"separated", v.separated}, {"n", v.n}});
        j["samples"] = s;
    }
    return j;
}

inline std::string expansive_csv(const ExpansivenessReport& r) {
    std::string s = "cycle,orbit_index,z_re,z_im,separated,n\n";
    for (const auto& v : r.samples)
        s += std::to_string(v.cycle) + "," + std::to_string(v.orbit_index) + "," + g17(v.z.real()) + "," + g17(v.z.imag()) +
             "," + (v.separated ? "1" : "0") + "," + std::to_string(v.n) + "\n";
    return s;
}

inline json contraction_json(const ContractionCertificate& c) {
    json steps = json::array();
    for (const auto& s : c.steps)
        steps.push_back({{"orbit_index", s.orbit_index},
                         {"derivative_norm", num(s.derivative_norm)},
                         {"image_sup", num(s.image_sup)},
                         {"frame_norm", num(s.frame_norm)}});
    json direct = json::array(), bound = json::array();
    for (double d : c.direct) direct.push_back(num(d));
    for (double d : c.half_bound) bound.push_back(num(d));
    return {{"available", c.available},
            {"reason", c.reason},
            {"rho", num(c.rho)},
            {"rescalings", c.rescalings},
            {"probe_N", c.probe_n},
            {"steps", steps},
            {"C_estimate", num(c.c_estimate)},
            {"C_is_lower_estimate", true},
            {"window", c.window},
            {"direct", direct},
            {"half_bound", bound},
            {"pass", c.pass}};
}

// Verdict of a condition in a dossier.
struct Condition {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    std::string note;
};

struct Audit {
    bool consistent = true;
    std::vector<std::string> flags;
};

// The conditions are claimed equivalent: all pass, or none does.
inline Audit audit_equivalence(const std::vector<Condition>& cs) {
    Audit a;
    if (cs.empty()) return a;
    std::size_t passed = 0;
    for (const auto& c : cs) passed += c.verdict == Verdict::pass;
    if (passed != 0 && passed != cs.size()) {
        a.consistent = false;
        std::string s = "mixed verdicts:";
        for (const auto& c : cs) s += " " + c.name + "=" + to_string(c.verdict);
        a.flags.push_back(s + "; needs review");
    }
    return a;
}

// cause passing while effect does not.
inline void audit_implication(Audit& a, const Condition& cause, const Condition& effect) {
    if (cause.verdict == Verdict::pass && effect.verdict != Verdict::pass) {
        a.consistent = false;
        a.flags.push_back(cause.name + " passes but implied " + effect.name + " is " + to_string(effect.verdict));
    }
}

inline json conditions_json(const std::vector<Condition>& cs, const Audit& a) {
    json j = json::object();
    json conds = json::array();
    for (const auto& c : cs) conds.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"note", c.note}});
    j["conditions"] = conds;
    j["consistent"] = a.consistent;
    j["flags"] = a.flags;
    return j;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write " + path);
    out << content;
}

inline void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace cuhyp::report
