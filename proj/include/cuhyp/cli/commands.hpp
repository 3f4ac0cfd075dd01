#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/parallel.hpp"
#include "cuhyp/henon/map_spec.hpp"
#include "cuhyp/kobayashi/kobayashi.hpp"
#include "cuhyp/leaf/probes.hpp"
#include "cuhyp/orbits/periodic.hpp"
#include "cuhyp/report/report.hpp"
#include "cuhyp/splitting/cocycle.hpp"

namespace cuhyp::cli {

using nlohmann::json;

struct RasterSpec {
    int width = 512;
    int height = 512;
    std::array<double, 4> box{-4.0, 4.0, -4.0, 4.0};  // s_min, s_max, t_min, t_max
    int max_iter = 100;
    int overlay = 0;  // number of leaf traces
    // Slice point = origin + s u + t v.
    Vec2 origin{0.0, 0.0};
    Vec2 u{1.0, 0.0};
    Vec2 v{0.0, 1.0};
};

struct RunConfig {
    std::string map_path;
    std::string out_dir = ".";
    int max_period = 3;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> formats{"json", "csv"};
    GridSpec grid;
    DirectionOptions directions;
    int domination_horizon = 60;
    LeafBuildOptions leaf;
    SampleSpec samples;
    int probe_horizon = 200;
    double r1_fraction = 0.5;
    double c = 0.5;
    ContractionOptions contraction;
    int uplus_max_iter = 100;
    double alarm_threshold = 0.02;
    double hyperbolic_margin = 1e-6;
    RasterSpec raster;

    bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw SpecError("config: " + where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw SpecError("config: unknown key \"" + k + "\" in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SpecError(std::string("config: bad value for \"") + key + "\"");
    }
}

inline Vec2 read_vec(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw SpecError(std::string("config: ") + what + " must be [z1, z2]");
    return Vec2{cuhyp::detail::json_complex(j[0], what), cuhyp::detail::json_complex(j[1], what)};
}

}  // namespace detail

inline void apply_config(RunConfig& c, const json& j) {
    detail::check_keys(j,
                       {"map", "max_period", "threads", "seed", "formats", "grid", "splitting", "leaf", "probe", "contraction",
                        "uplus", "alarm_threshold", "raster"},
                       "config");
    detail::read(j, "map", c.map_path);
    detail::read(j, "max_period", c.max_period);
    detail::read(j, "threads", c.threads);
    detail::read(j, "seed", c.seed);
    detail::read(j, "formats", c.formats);
    detail::read(j, "alarm_threshold", c.alarm_threshold);
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        detail::check_keys(g, {"resolution", "max_resolution", "refine"}, "grid");
        detail::read(g, "resolution", c.grid.resolution);
        detail::read(g, "max_resolution", c.grid.max_resolution);
        detail::read(g, "refine", c.grid.refine);
    }
    if (j.contains("splitting")) {
        const auto& s = j["splitting"];
        detail::check_keys(s, {"horizon", "tolerance", "max_depth"}, "splitting");
        detail::read(s, "horizon", c.domination_horizon);
        c.directions.horizon = c.domination_horizon;
        detail::read(s, "tolerance", c.directions.tolerance);
        detail::read(s, "max_depth", c.directions.max_depth);
    }
    if (j.contains("leaf")) {
        const auto& l = j["leaf"];
        detail::check_keys(l, {"degree", "max_radius", "budget_fraction", "tolerance", "max_iter"}, "leaf");
        detail::read(l, "degree", c.leaf.solve.degree);
        detail::read(l, "max_radius", c.leaf.max_radius);
        detail::read(l, "budget_fraction", c.leaf.budget_fraction);
        detail::read(l, "tolerance", c.leaf.solve.tolerance);
        detail::read(l, "max_iter", c.leaf.solve.max_iter);
    }
    if (j.contains("probe")) {
        const auto& p = j["probe"];
        detail::check_keys(p, {"angles", "radii", "horizon", "r1_fraction", "c", "on_leaf_tolerance"}, "probe");
        detail::read(p, "angles", c.samples.angles);
        detail::read(p, "radii", c.samples.radii);
        detail::read(p, "horizon", c.probe_horizon);
        detail::read(p, "r1_fraction", c.r1_fraction);
        detail::read(p, "c", c.c);
        detail::read(p, "on_leaf_tolerance", c.samples.on_leaf_tolerance);
    }
    if (j.contains("contraction")) {
        detail::check_keys(j["contraction"], {"window"}, "contraction");
        detail::read(j["contraction"], "window", c.contraction.window);
    }
    if (j.contains("uplus")) {
        detail::check_keys(j["uplus"], {"max_iter"}, "uplus");
        detail::read(j["uplus"], "max_iter", c.uplus_max_iter);
    }
    if (j.contains("raster")) {
        const auto& r = j["raster"];
        detail::check_keys(r, {"width", "height", "box", "max_iter", "overlay", "slice"}, "raster");
        detail::read(r, "width", c.raster.width);
        detail::read(r, "height", c.raster.height);
        detail::read(r, "box", c.raster.box);
        detail::read(r, "max_iter", c.raster.max_iter);
        detail::read(r, "overlay", c.raster.overlay);
        if (r.contains("slice")) {
            const auto& s = r["slice"];
            detail::check_keys(s, {"origin", "u", "v"}, "raster.slice");
            if (s.contains("origin")) c.raster.origin = detail::read_vec(s["origin"], "slice origin");
            if (s.contains("u")) c.raster.u = detail::read_vec(s["u"], "slice u");
            if (s.contains("v")) c.raster.v = detail::read_vec(s["v"], "slice v");
        }
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SpecError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    apply_config(c, j);
    // A relative map path is read from the config's directory.
    if (!c.map_path.empty() && std::filesystem::path(c.map_path).is_relative())
        c.map_path = (std::filesystem::path(path).parent_path() / c.map_path).string();
    return c;
}

inline void validate(const RunConfig& c) {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw SpecError("config: " + what);
    };
    need(c.max_period >= 1, "max_period must be >= 1");
    need(c.grid.resolution >= 2 && c.grid.max_resolution >= c.grid.resolution, "grid resolutions must be >= 2 and ordered");
    need(c.directions.tolerance > 0.0, "splitting tolerance must be positive");
    need(c.domination_horizon >= 1, "splitting horizon must be >= 1");
    need(c.leaf.solve.tolerance > 0.0, "leaf tolerance must be positive");
    need(c.leaf.solve.degree >= 1, "leaf degree must be >= 1");
    need(c.leaf.max_radius > 0.0, "leaf max_radius must be positive");
    need(c.leaf.budget_fraction > 0.0 && c.leaf.budget_fraction <= 1.0, "leaf budget_fraction must be in (0, 1]");
    need(c.samples.angles >= 1 && c.samples.radii >= 1, "probe sample counts must be >= 1");
    need(c.samples.on_leaf_tolerance > 0.0, "probe on_leaf_tolerance must be positive");
    need(c.probe_horizon >= 1, "probe horizon must be >= 1");
    need(c.r1_fraction > 0.0 && c.r1_fraction < 1.0, "probe r1_fraction must be in (0, 1)");
    need(c.c > 0.0, "expansiveness constant c must be positive");
    need(c.contraction.window >= 1, "contraction window must be >= 1");
    need(c.uplus_max_iter >= 1, "uplus max_iter must be >= 1");
    need(c.alarm_threshold > 0.0, "alarm_threshold must be positive");
    for (const auto& f : c.formats) need(f == "json" || f == "csv" || f == "raster", "unknown format \"" + f + "\"");
}

// Echo of the run parameters; paths and thread count are left out so that
// dossiers compare equal across output directories and machines.
inline json config_json(const RunConfig& c) {
    return {{"max_period", c.max_period},
            {"seed", c.seed},
            {"grid", {{"resolution", c.grid.resolution}, {"max_resolution", c.grid.max_resolution}, {"refine", c.grid.refine}}},
            {"splitting",
             {{"horizon", c.domination_horizon}, {"tolerance", c.directions.tolerance}, {"max_depth", c.directions.max_depth}}},
            {"leaf",
             {{"degree", c.leaf.solve.degree},
              {"max_radius", c.leaf.max_radius},
              {"budget_fraction", c.leaf.budget_fraction},
              {"tolerance", c.leaf.solve.tolerance},
              {"max_iter", c.leaf.solve.max_iter}}},
            {"probe",
             {{"angles", c.samples.angles},
              {"radii", c.samples.radii},
              {"horizon", c.probe_horizon},
              {"r1_fraction", c.r1_fraction},
              {"c", c.c},
              {"on_leaf_tolerance", c.samples.on_leaf_tolerance}}},
            {"contraction", {{"window", c.contraction.window}}},
            {"uplus", {{"max_iter", c.uplus_max_iter}}},
            {"alarm_threshold", c.alarm_threshold}};
}

// ---------------------------------------------------------------------------
// Pipeline stages

struct OrbitStage {
    std::vector<PeriodicOrbit> orbits;
    std::vector<SearchDiagnostics> diagnostics;  // per period, Henon maps only
    std::optional<ExpansionReport> expansion;
};

inline OrbitStage run_orbits(const AnyMap& m, const RunConfig& cfg) {
    OrbitStage st;
    if (const auto* h = std::get_if<GeneralizedHenon>(&m)) {
        GridSpec g = cfg.grid;
        g.threads = cfg.threads;
        for (int n = 1; n <= cfg.max_period; ++n) {
            SearchDiagnostics d;
            auto os = find_periodic(*h, n, g, &d);
            st.diagnostics.push_back(d);
            st.orbits.insert(st.orbits.end(), os.begin(), os.end());
        }
    } else {
        // Skew models: the fixed point at the origin.
        st.orbits.push_back(make_periodic_orbit(std::get<PolynomialSkewMap>(m), Vec2{0.0, 0.0}, 1));
    }
    if (!st.orbits.empty()) st.expansion = uniform_expansion_report(st.orbits, cfg.alarm_threshold);
    return st;
}

struct OrbitAnalysis {
    SplittingData splitting;
    DominationCertificate domination;
    std::optional<LeafBuild> leaf;
    std::string leaf_error;
};

inline std::vector<OrbitAnalysis> run_splitting(const OrbitStage& st, const RunConfig& cfg) {
    std::vector<OrbitAnalysis> out(st.orbits.size());
    parallel_for(st.orbits.size(), cfg.threads, [&](std::size_t i) {
        const auto& o = st.orbits[i];
        out[i].splitting = compute_directions(o, cfg.directions);
        out[i].domination = domination_check(Cocycle::from_orbit(o), out[i].splitting, cfg.domination_horizon);
    });
    return out;
}

template <PlaneMap M>
void run_leaves(const M& f, const OrbitStage& st, std::vector<OrbitAnalysis>& an, const RunConfig& cfg,
                LeafKind kind = LeafKind::center_unstable) {
    parallel_for(st.orbits.size(), cfg.threads, [&](std::size_t i) {
        if (!an[i].domination.pass) {
            an[i].leaf_error = "no dominated splitting on this orbit";
            return;
        }
        try {
            an[i].leaf = build_leaf_cycle(f, st.orbits[i], kind, cfg.leaf);
            if (!an[i].leaf->cycle.converged()) an[i].leaf_error = "leaf solve did not converge";
        } catch (const std::exception& e) {
            an[i].leaf.reset();
            an[i].leaf_error = e.what();
        }
    });
}

inline bool hyperbolic_orbit(const OrbitAnalysis& a, double margin) {
    return a.domination.pass && a.domination.mu0 > 1.0 + margin && a.domination.lambda0 < 1.0 - margin;
}

inline Verdict verdict_of(bool b) { return b ? Verdict::pass : Verdict::fail; }

template <PlaneMap M>
json run_certify(const M& f, const AnyMap& m, const RunConfig& cfg) {
    using report::Condition;
    json d = json::object();
    d["map"] = map_spec_json(m);
    d["config"] = config_json(cfg);

    const auto st = run_orbits(m, cfg);
    auto an = run_splitting(st, cfg);
    run_leaves(f, st, an, cfg);

    json orbits = json::array();
    for (std::size_t i = 0; i < st.orbits.size(); ++i) {
        json o = report::orbit_json(st.orbits[i], st.expansion ? st.expansion->chi[i] : NAN);
        o["splitting"] = report::splitting_json(an[i].splitting, an[i].domination);
        o["leaf_error"] = an[i].leaf_error;
        orbits.push_back(o);
    }
    d["orbits"] = orbits;
    if (st.expansion) d["expansion"] = report::expansion_json(*st.expansion);

    json stages = json::object();
    const bool have_orbits = !st.orbits.empty();
    stages["orbits"] = {{"verdict", to_string(have_orbits ? Verdict::pass : Verdict::inconclusive)}, {"count", st.orbits.size()}};

    bool all_dominated = have_orbits, all_hyperbolic = have_orbits, all_resolved = have_orbits;
    for (const auto& a : an) {
        all_dominated = all_dominated && a.domination.pass;
        all_hyperbolic = all_hyperbolic && hyperbolic_orbit(a, cfg.hyperbolic_margin);
        all_resolved = all_resolved && a.splitting.resolved;
    }
    stages["splitting"] = {{"verdict", to_string(!all_resolved ? Verdict::inconclusive : verdict_of(all_dominated))},
                           {"dominated", all_dominated}};

    std::vector<LeafCycle> cycles;
    bool leaves_complete = have_orbits;
    for (const auto& a : an) {
        if (a.leaf && a.leaf_error.empty()) cycles.push_back(a.leaf->cycle);
        else leaves_complete = false;
    }
    stages["leaves"] = {{"verdict", to_string(leaves_complete ? Verdict::pass : Verdict::inconclusive)},
                        {"built", cycles.size()}};

    Condition hyp{"uniformly_hyperbolic", all_resolved ? verdict_of(all_hyperbolic) : Verdict::inconclusive,
                  "every orbit dominated with lambda0 < 1 < mu0"};
    Condition exp{"forward_expansive", Verdict::inconclusive, ""};
    Condition dd{"dynamically_defined", Verdict::inconclusive, ""};
    Condition overlap{"overlapping", Verdict::inconclusive, ""};

    if (!leaves_complete) {
        const std::string note = cycles.empty() ? "no leaves" : "some leaves missing";
        exp.note = dd.note = overlap.note = note;
        stages["dynamically_defined"] = {{"verdict", "inconclusive"}, {"note", note}};
        stages["expansive"] = {{"verdict", "inconclusive"}, {"note", note}};
        stages["overlap"] = {{"verdict", "inconclusive"}, {"note", note}};
    } else {
        const double r = cuhyp::detail::min_radius(cycles);
        auto sp = cfg.samples;
        sp.threads = cfg.threads;
        const auto ddr = dynamically_defined_probe(f, cycles, cfg.r1_fraction * r, sp, cfg.probe_horizon);
        dd.verdict = ddr.verdict;
        stages["dynamically_defined"] = report::dd_json(ddr);
        const auto er = forward_expansive_probe(f, cycles, cfg.c, sp, cfg.probe_horizon);
        exp.verdict = er.verdict;
        stages["expansive"] = report::expansive_json(er, false);
        const auto oc = overlap_certificate(f, cycles, cfg.r1_fraction * r, sp, cfg.probe_horizon);
        overlap.verdict = verdict_of(oc.pass);
        stages["overlap"] = report::overlap_json(oc);
    }

    // Lower-level evidence: U+ and the unstable contraction certificate.
    if constexpr (std::is_same_v<M, GeneralizedHenon>) {
        if (leaves_complete) {
            const auto u = uplus_probe(f, cycles, cfg.uplus_max_iter, cfg.samples);
            bool all = true, inc = false;
            json per = json::array();
            for (const auto& x : u) {
                all = all && x.hit;
                inc = inc || x.inconclusive;
                per.push_back({{"hit", x.hit}, {"n", x.n}, {"inconclusive", x.inconclusive}});
            }
            stages["uplus"] = {{"verdict", to_string(all ? Verdict::pass : (inc ? Verdict::inconclusive : Verdict::fail))},
                               {"leaves", per}};
        } else {
            stages["uplus"] = {{"verdict", "inconclusive"}, {"note", "leaves missing"}};
        }
    } else {
        stages["uplus"] = {{"verdict", "inconclusive"}, {"note", "not a Henon map"}};
    }

    {
        json certs = json::array();
        bool all = leaves_complete, unavailable = !leaves_complete;
        for (std::size_t i = 0; i < st.orbits.size(); ++i) {
            if (!an[i].leaf || !an[i].leaf_error.empty()) continue;
            auto co = cfg.contraction;
            co.samples = cfg.samples;
            co.probe_horizon = cfg.probe_horizon;
            const auto cc = unstable_contraction_certificate(f, an[i].leaf->cycle, Cocycle::from_orbit(st.orbits[i]),
                                                             an[i].leaf->splitting, co);
            all = all && cc.pass;
            unavailable = unavailable || !cc.available;
            certs.push_back(report::contraction_json(cc));
        }
        const Verdict v = unavailable ? Verdict::inconclusive : verdict_of(all);
        stages["unstable_contraction"] = {{"verdict", to_string(v)}, {"orbits", certs}};
    }
    d["stages"] = stages;

    // Theorem A: partial hyperbolicity is the hypothesis.
    std::vector<Condition> ta{hyp, exp, dd};
    auto audit_a = report::audit_equivalence(ta);
    report::audit_implication(audit_a, exp, dd);
    report::audit_implication(audit_a, dd, overlap);
    json tha = report::conditions_json(ta, audit_a);
    tha["hypothesis_partially_hyperbolic"] = all_dominated;
    if (!all_dominated) tha["note"] = "hypothesis not met on the sampled orbits";
    d["theorem_a"] = tha;

    // Theorem B: dissipative Henon maps with dominated splitting.
    std::vector<Condition> tb{{"J_uniformly_hyperbolic", Verdict::inconclusive, "proxy: every orbit dominated with mu0 > 1"},
                              {"J0_empty", Verdict::inconclusive, "proxy: no zero-exponent alarm"},
                              {"saddles_uniformly_hyperbolic", Verdict::inconclusive, "proxy: backward F envelope rate < 1"},
                              {"saddles_uniformly_expanding", Verdict::inconclusive, "proxy: lambda1 < 1"}};
    bool applicable = false;
    if constexpr (std::is_same_v<M, GeneralizedHenon>) applicable = f.dissipative() && all_dominated && st.expansion;
    if (applicable) {
        double worst_rate = 0.0;
        bool saddles = true;
        for (std::size_t i = 0; i < an.size(); ++i) {
            worst_rate = std::max(worst_rate, an[i].domination.backward_rate);
            saddles = saddles && st.orbits[i].classification == OrbitClass::saddle;
        }
        tb[0].verdict = verdict_of(all_hyperbolic);
        tb[1].verdict = verdict_of(!st.expansion->zero_exponent_alarm);
        tb[2].verdict = verdict_of(saddles && worst_rate < 1.0 - cfg.hyperbolic_margin);
        tb[3].verdict = verdict_of(saddles && st.expansion->lambda1 < 1.0);
    }
    const auto audit_b = report::audit_equivalence(tb);
    json thb = report::conditions_json(tb, audit_b);
    thb["applicable"] = applicable;
    if (!applicable) thb["note"] = "needs a dissipative Henon map with dominated splitting on the sampled orbits";
    d["theorem_b"] = thb;
    d["zero_exponent_alarm"] = st.expansion ? json(st.expansion->zero_exponent_alarm) : json(nullptr);
    return d;
}

// ---------------------------------------------------------------------------
// Raster

inline std::vector<std::uint16_t> escape_raster(const GeneralizedHenon& h, const RasterSpec& r, unsigned threads) {
    const auto w = static_cast<std::size_t>(r.width), ht = static_cast<std::size_t>(r.height);
    std::vector<std::uint16_t> px(w * ht);
    const double ds = (r.box[1] - r.box[0]) / r.width, dt = (r.box[3] - r.box[2]) / r.height;
    parallel_for(ht, threads, [&](std::size_t i) {
        const double t = r.box[3] - (static_cast<double>(i) + 0.5) * dt;
        for (std::size_t j = 0; j < w; ++j) {
            const double s = r.box[0] + (static_cast<double>(j) + 0.5) * ds;
            const auto e = escapes_to_uplus(h, r.origin + r.u * s + r.v * t, r.max_iter);
            const int n = e.escaped ? e.n : r.max_iter + 1;
            px[i * w + j] = static_cast<std::uint16_t>(std::lround(65535.0 * n / (r.max_iter + 1)));
        }
    });
    return px;
}

inline std::string pgm16(const std::vector<std::uint16_t>& px, int width, int height) {
    std::string s = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
    for (auto v : px) {
        s.push_back(static_cast<char>(v >> 8));
        s.push_back(static_cast<char>(v & 0xff));
    }
    return s;
}

// Real least-squares coordinates (s, t) of p - origin in span_R{u, v}.
inline std::pair<double, double> slice_coordinates(const RasterSpec& r, const Vec2& p) {
    const Vec2 d = p - r.origin;
    const double uu = dot(r.u, r.u).real(), vv = dot(r.v, r.v).real(), uv = dot(r.u, r.v).real();
    const double du = dot(r.u, d).real(), dv = dot(r.v, d).real();
    const double det = uu * vv - uv * uv;
    return {(vv * du - uv * dv) / det, (uu * dv - uv * du) / det};
}

// ---------------------------------------------------------------------------
// Commands

inline void ensure_out(const RunConfig& c) {
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw SpecError("cannot create output directory " + c.out_dir + ": " + ec.message());
}

inline std::string out_path(const RunConfig& c, const std::string& name) {
    return (std::filesystem::path(c.out_dir) / name).string();
}

inline int cmd_periodic(const AnyMap& m, const RunConfig& cfg, std::ostream& out) {
    const auto st = run_orbits(m, cfg);
    json j = {{"map", map_spec_json(m)}, {"max_period", cfg.max_period}};
    json periods = json::array();
    for (std::size_t k = 0; k < st.diagnostics.size(); ++k) {
        const auto& d = st.diagnostics[k];
        std::size_t count = 0;
        for (const auto& o : st.orbits) count += o.period == static_cast<int>(k + 1);
        periods.push_back({{"period", k + 1},
                           {"orbits", count},
                           {"resolutions", d.resolutions},
                           {"point_counts", d.counts},
                           {"expected_points", d.expected},
                           {"saturated", d.saturated},
                           {"saturation_reason", d.saturation_reason},
                           {"singular_seeds", d.singular_seeds},
                           {"nonconverged_seeds", d.nonconverged_seeds}});
    }
    j["periods"] = periods;
    json orbits = json::array();
    std::string csv = report::orbit_csv_header();
    for (std::size_t i = 0; i < st.orbits.size(); ++i) {
        const double chi = st.expansion ? st.expansion->chi[i] : NAN;
        orbits.push_back(report::orbit_json(st.orbits[i], chi));
        csv += report::orbit_csv_row(st.orbits[i], chi);
    }
    j["orbits"] = orbits;
    if (st.expansion) j["expansion"] = report::expansion_json(*st.expansion);
    if (cfg.wants("json")) report::write_json(out_path(cfg, "orbits.json"), j);
    if (cfg.wants("csv")) report::write_file(out_path(cfg, "orbits.csv"), csv);
    out << "orbits: " << st.orbits.size() << "\n";
    if (st.expansion)
        out << "chi_min: " << report::g17(st.expansion->chi_min)
            << "\nzero_exponent_alarm: " << (st.expansion->zero_exponent_alarm ? "true" : "false") << "\n";
    return 0;
}

inline int cmd_splitting(const AnyMap& m, const RunConfig& cfg, std::ostream& out) {
    const auto st = run_orbits(m, cfg);
    const auto an = run_splitting(st, cfg);
    json arr = json::array();
    std::string csv = "period,base_x_re,base_x_im,base_y_re,base_y_im,lambda,mu,C,lambda0,mu0,horizon,min_angle,pass\n";
    int passed = 0;
    for (std::size_t i = 0; i < st.orbits.size(); ++i) {
        json o = report::splitting_json(an[i].splitting, an[i].domination);
        o["period"] = st.orbits[i].period;
        o["base"] = report::vec(st.orbits[i].points.front());
        arr.push_back(o);
        const auto& p = st.orbits[i].points.front();
        const auto& d = an[i].domination;
        csv += std::to_string(st.orbits[i].period);
        for (double x : {p[0].real(), p[0].imag(), p[1].real(), p[1].imag(), d.lambda, an[i].splitting.mu, d.c, d.lambda0, d.mu0})
            csv += "," + report::g17(x);
        csv += "," + std::to_string(d.horizon) + "," + report::g17(an[i].splitting.min_angle) + "," + (d.pass ? "1" : "0") + "\n";
        passed += d.pass;
    }
    if (cfg.wants("json")) report::write_json(out_path(cfg, "splitting.json"), {{"map", map_spec_json(m)}, {"orbits", arr}});
    if (cfg.wants("csv")) report::write_file(out_path(cfg, "splitting.csv"), csv);
    out << "dominated: " << passed << "/" << st.orbits.size() << "\n";
    return 0;
}

template <PlaneMap M>
int cmd_leaf(const M& f, const AnyMap& m, const RunConfig& cfg, std::ostream& out) {
    const auto st = run_orbits(m, cfg);
    auto cu = run_splitting(st, cfg);
    auto sk = cu;
    run_leaves(f, st, cu, cfg, LeafKind::center_unstable);
    run_leaves(f, st, sk, cfg, LeafKind::stable);
    json arr = json::array();
    std::vector<LeafCycle> cycles;
    bool complete = !st.orbits.empty();
    for (std::size_t i = 0; i < st.orbits.size(); ++i) {
        json o = {{"period", st.orbits[i].period}, {"base", report::vec(st.orbits[i].points.front())}};
        for (auto [name, a] : {std::pair<const char*, OrbitAnalysis*>{"center_unstable", &cu[i]}, {"stable", &sk[i]}}) {
            json leaves = json::array();
            if (a->leaf)
                for (const auto& l : a->leaf->cycle.leaves) leaves.push_back(report::leaf_json(l));
            o[name] = {{"leaves", leaves}, {"error", a->leaf_error}};
        }
        arr.push_back(o);
        if (cu[i].leaf && cu[i].leaf_error.empty()) cycles.push_back(cu[i].leaf->cycle);
        else complete = false;
    }
    json j = {{"map", map_spec_json(m)}, {"orbits", arr}};
    if (complete) {
        auto sp = cfg.samples;
        sp.threads = cfg.threads;
        const double r = cuhyp::detail::min_radius(cycles);
        const auto dd = dynamically_defined_probe(f, cycles, cfg.r1_fraction * r, sp, cfg.probe_horizon);
        j["dynamically_defined"] = report::dd_json(dd);
        j["overlap"] = report::overlap_json(overlap_certificate(f, cycles, cfg.r1_fraction * r, sp, cfg.probe_horizon));
        out << "dynamically_defined: " << to_string(dd.verdict) << "\n";
    } else {
        j["dynamically_defined"] = {{"verdict", "inconclusive"}, {"note", "some leaves missing"}};
        out << "dynamically_defined: inconclusive\n";
    }
    if (cfg.wants("json")) report::write_json(out_path(cfg, "leaves.json"), j);
    out << "leaf cycles: " << cycles.size() << "/" << st.orbits.size() << "\n";
    return 0;
}

template <PlaneMap M>
int cmd_expansive(const M& f, const AnyMap& m, const RunConfig& cfg, std::ostream& out) {
    const auto st = run_orbits(m, cfg);
    auto an = run_splitting(st, cfg);
    run_leaves(f, st, an, cfg);
    std::vector<LeafCycle> cycles;
    bool complete = !st.orbits.empty();
    for (const auto& a : an) {
        if (a.leaf && a.leaf_error.empty()) cycles.push_back(a.leaf->cycle);
        else complete = false;
    }
    json j = {{"map", map_spec_json(m)}};
    if (!complete) {
        j["expansive"] = {{"verdict", "inconclusive"}, {"note", "some leaves missing"}};
        if (cfg.wants("json")) report::write_json(out_path(cfg, "expansive.json"), j);
        out << "expansive: inconclusive\n";
        return 0;
    }
    auto sp = cfg.samples;
    sp.threads = cfg.threads;
    const auto er = forward_expansive_probe(f, cycles, cfg.c, sp, cfg.probe_horizon);
    j["expansive"] = report::expansive_json(er, true);
    if (cfg.wants("json")) report::write_json(out_path(cfg, "expansive.json"), j);
    if (cfg.wants("csv")) report::write_file(out_path(cfg, "expansive.csv"), report::expansive_csv(er));
    out << "expansive: " << to_string(er.verdict) << " (sup n = " << er.sup_n << ")\n";
    return 0;
}

template <PlaneMap M>
int cmd_certify(const M& f, const AnyMap& m, const RunConfig& cfg, std::ostream& out) {
    const json d = run_certify(f, m, cfg);
    report::write_json(out_path(cfg, "dossier.json"), d);
    for (const char* t : {"theorem_a", "theorem_b"}) {
        out << t << ":";
        for (const auto& c : d[t]["conditions"]) out << " " << c["name"].get<std::string>() << "=" << c["verdict"].get<std::string>();
        out << (d[t]["consistent"].get<bool>() ? "" : " [INCONSISTENT]") << "\n";
    }
    return 0;
}

inline int cmd_raster(const AnyMap& m, const RunConfig& cfg, std::ostream& out) {
    const auto* h = std::get_if<GeneralizedHenon>(&m);
    if (!h) throw SpecError("raster: needs a Henon map spec");
    const auto& r = cfg.raster;
    if (r.width < 1 || r.height < 1 || !(r.box[0] < r.box[1]) || !(r.box[2] < r.box[3]) || r.max_iter < 1)
        throw SpecError("raster: degenerate box or size");
    if (r.overlay < 0) throw SpecError("raster: overlay must be >= 0");
    const auto uu = dot(r.u, r.u).real(), vv = dot(r.v, r.v).real(), uv = dot(r.u, r.v).real();
    if (!(uu * vv - uv * uv > 1e-24 * uu * vv)) throw SpecError("raster: slice directions are degenerate");

    const auto px = escape_raster(*h, r, cfg.threads);
    report::write_file(out_path(cfg, "raster.pgm"), pgm16(px, r.width, r.height));

    if (r.overlay > 0) {
        const auto st = run_orbits(m, cfg);
        auto an = run_splitting(st, cfg);
        run_leaves(*h, st, an, cfg);
        std::string csv = "leaf,period,k,x_re,x_im,y_re,y_im,s,t\n";
        int made = 0;
        const int pts = 65;
        for (std::size_t i = 0; i < st.orbits.size() && made < r.overlay; ++i) {
            if (!an[i].leaf || !an[i].leaf_error.empty()) continue;
            for (const auto& l : an[i].leaf->cycle.leaves) {
                if (made == r.overlay) break;
                for (int k = 0; k < pts; ++k) {
                    const double z = l.epsilon * (2.0 * k / (pts - 1) - 1.0);
                    const Vec2 p = l.embed(z);
                    const auto [s, t] = slice_coordinates(r, p);
                    csv += std::to_string(made) + "," + std::to_string(st.orbits[i].period) + "," + std::to_string(k);
                    for (double x : {p[0].real(), p[0].imag(), p[1].real(), p[1].imag(), s, t}) csv += "," + report::g17(x);
                    csv += "\n";
                }
                ++made;
            }
        }
        if (made < r.overlay)
            throw SpecError("raster: " + std::to_string(r.overlay) + " overlays requested, only " + std::to_string(made) +
                            " leaves available up to period " + std::to_string(cfg.max_period));
        report::write_file(out_path(cfg, "leaf_overlay.csv"), csv);
    }
    out << "raster: " << r.width << "x" << r.height << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

// Exit codes: 0 ran, 2 usage or spec error, 1 unexpected failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Hyperbolicity probes for complex Henon maps"};
    app.require_subcommand(1);
    std::string map_path, config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("--map", map_path, "map spec JSON");
    app.add_option("--config", config_path, "run config JSON");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "seed recorded in outputs");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    std::optional<int> max_period, horizon, degree, width, height, max_iter, overlay, angles, radii;
    std::optional<double> c, max_radius;
    std::vector<double> box;

    auto* periodic = app.add_subcommand("periodic", "periodic orbits, multipliers and exponents");
    auto* splitting = app.add_subcommand("splitting", "E/F splitting and domination certificates");
    auto* leaf = app.add_subcommand("leaf", "center-unstable and stable leaves, dynamically-defined probe");
    auto* expansive = app.add_subcommand("expansive", "forward expansiveness probe");
    auto* certify = app.add_subcommand("certify", "full dossier of verdicts");
    auto* raster = app.add_subcommand("raster", "escape-time raster with leaf overlays");
    for (auto* s : {periodic, splitting, leaf, expansive, certify, raster}) {
        s->fallthrough();
        s->add_option("--max-period", max_period, "largest period searched");
    }
    for (auto* s : {leaf, expansive, certify}) {
        s->add_option("--angles", angles, "sample angles per leaf");
        s->add_option("--radii", radii, "sample radii per leaf");
    }
    splitting->add_option("--horizon", horizon, "domination horizon");
    leaf->add_option("--degree", degree, "graph polynomial degree");
    leaf->add_option("--max-radius", max_radius, "upper end of the radius search");
    expansive->add_option("--c", c, "expansiveness constant");
    expansive->add_option("--horizon", horizon, "probe horizon");
    raster->add_option("--width", width);
    raster->add_option("--height", height);
    raster->add_option("--box", box, "s_min s_max t_min t_max")->expected(4);
    raster->add_option("--max-iter", max_iter);
    raster->add_option("--overlay", overlay, "number of leaf traces");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!map_path.empty()) cfg.map_path = map_path;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (max_period) cfg.max_period = *max_period;
        if (angles) cfg.samples.angles = *angles;
        if (radii) cfg.samples.radii = *radii;
        if (degree) cfg.leaf.solve.degree = *degree;
        if (max_radius) cfg.leaf.max_radius = *max_radius;
        if (c) cfg.c = *c;
        if (horizon) {
            if (splitting->parsed()) cfg.domination_horizon = cfg.directions.horizon = *horizon;
            else cfg.probe_horizon = *horizon;
        }
        if (width) cfg.raster.width = *width;
        if (height) cfg.raster.height = *height;
        if (box.size() == 4) std::copy(box.begin(), box.end(), cfg.raster.box.begin());
        if (max_iter) cfg.raster.max_iter = *max_iter;
        if (overlay) cfg.raster.overlay = *overlay;
        if (cfg.map_path.empty()) throw SpecError("no map spec given (--map or \"map\" in the config)");
        validate(cfg);
        const AnyMap m = load_map_spec(cfg.map_path);
        ensure_out(cfg);

        if (periodic->parsed()) return cmd_periodic(m, cfg, out);
        if (splitting->parsed()) return cmd_splitting(m, cfg, out);
        if (raster->parsed()) return cmd_raster(m, cfg, out);
        return std::visit(
            [&](const auto& f) {
                if (leaf->parsed()) return cmd_leaf(f, m, cfg, out);
                if (expansive->parsed()) return cmd_expansive(f, m, cfg, out);
                return cmd_certify(f, m, cfg, out);
            },
            m);
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cuhyp::cli
