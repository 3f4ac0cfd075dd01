#include <gtest/gtest.h>

#include <cmath>

#include "cuhyp/graph/transform.hpp"
#include "cuhyp/henon/henon.hpp"
#include "cuhyp/henon/skew_model.hpp"
#include "cuhyp/orbits/periodic.hpp"
#include "support/gen.hpp"

using namespace cuhyp;
using cuhyp::testing::Gen;

namespace {

LocalizedFamily skew_family(const PolynomialSkewMap& f, double r, LeafKind kind = LeafKind::center_unstable) {
    const auto c = Cocycle::periodic({f.jacobian(Vec2{0.0, 0.0})}, {Vec2{0.0, 0.0}});
    return localize(f, c, compute_directions(c, 1), r, kind);
}

GeneralizedHenon shifted_square() { return GeneralizedHenon::single({-1.0, 0.0, 1.0}, 0.5); }
GeneralizedHenon horseshoe() { return GeneralizedHenon::single({-6.0, 0.0, 1.0}, 0.5); }

PeriodicOrbit saddle_22() {
    for (const auto& o : find_fixed_points(shifted_square()))
        if (std::abs(o.points[0][1] - 2.0) < 1e-9) return o;
    throw std::runtime_error("fixed point (2,2) not found");
}

LocalizedFamily orbit_family(const GeneralizedHenon& h, const PeriodicOrbit& o, LeafKind kind = LeafKind::center_unstable) {
    const auto c = Cocycle::from_orbit(o);
    const auto s = compute_directions(c, o.period);
    const double r = admissible_radius(h, c, s, 1.0, kind);
    return localize(h, c, s, r, kind);
}

LipschitzGraph random_graph(Gen& g, double r, double gamma, int degree = 16) {
    std::vector<Complex> a(static_cast<std::size_t>(degree) + 1, 0.0);
    for (int j = 1; j <= degree; ++j) a[static_cast<std::size_t>(j)] = g.complex_normal() / std::pow(r, j - 1) / std::pow(2.0, j);
    auto phi = LipschitzGraph::from_coefficients(a, r);
    // Rescale into the cone.
    const double s = 0.9 * gamma / phi.gamma_hat;
    for (auto& c : a) c *= s;
    return LipschitzGraph::from_coefficients(a, r);
}

// max |a_j| r^j: coefficient sizes in units of graph values on the disc.
double scaled_max(const LipschitzGraph& phi, std::size_t from = 0) {
    double m = 0.0;
    for (std::size_t j = from; j < phi.a.size(); ++j) m = std::max(m, std::abs(phi.a[j]) * std::pow(phi.radius, j));
    return m;
}

std::vector<Complex> disc_samples(Gen& g, double r, int n) {
    std::vector<Complex> s;
    for (int i = 0; i < n; ++i) s.push_back(g.in_disc(r));
    return s;
}

}  // namespace

TEST(HPParams, DerivedQuantities) {
    HPParams p{0.5, 2.0, 0.5, 0.1, 1.0};
    EXPECT_DOUBLE_EQ(p.lambda_prime(), 1.5 * (0.5 + 0.1 * 1.5));
    EXPECT_DOUBLE_EQ(p.mu_prime(), 2.0 / 1.5 - 0.1);
    EXPECT_DOUBLE_EQ(p.lambda0_claim1(), 0.7);
    EXPECT_DOUBLE_EQ(p.mu0_prop(), 2.0 - 0.15);
    EXPECT_TRUE(p.admissible());
    // delta bound at (0.5, 2, 0.5): min(1.5 / 4.5, 0.875 / 4.875).
    EXPECT_NEAR(HPParams::delta_bound(0.5, 2.0, 0.5), 0.875 / 4.875, 1e-15);
    p.delta = 0.18;
    EXPECT_FALSE(p.admissible());
    p.delta = 0.1;
    p.gamma = 1.0;  // gamma must stay below min(1, sqrt(4) - 1) = 1
    EXPECT_FALSE(p.admissible());
    EXPECT_THROW(require_admissible(p), ParamsViolated);
}

TEST(HPParams, RandomAdmissibleDrawsSatisfyOrdering) {
    Gen g(51);
    for (int i = 0; i < 1000; ++i) {
        const double lambda = g.uniform(0.01, 1.5);
        const double mu = lambda * g.uniform(1.1, 20.0);
        const double gamma = g.uniform(0.01, 0.99) * HPParams::gamma_bound(lambda, mu);
        const double delta = g.uniform(0.0, 0.999) * HPParams::delta_bound(lambda, mu, gamma);
        HPParams p{lambda, mu, gamma, delta, 1.0};
        EXPECT_TRUE(p.admissible()) << p.violation();
        EXPECT_LT(p.lambda_prime(), p.mu_prime());
    }
}

TEST(Localize, LinearModelIsNormalForm) {
    for (double r : {0.1, 1.0, 10.0}) {
        const auto fam = skew_family(PolynomialSkewMap::linear(), r);
        EXPECT_NEAR(std::abs(fam.a_block[0] - 2.0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(fam.b_block[0] - 0.5), 0.0, 1e-14);
        EXPECT_LT(fam.delta, 1e-14);
        Gen g(52);
        for (int i = 0; i < 20; ++i) EXPECT_LT(norm(fam.nonlinear(0, g.vec_in_box<2>(r))), 1e-13 * r);
    }
}

TEST(Localize, SaddleChartsDiagonalize) {
    const auto fam = orbit_family(shifted_square(), saddle_22());
    EXPECT_LT(fam.off_diagonal, 1e-10);
    // Blocks are the multipliers 2 +- sqrt(3.5).
    EXPECT_NEAR(std::abs(fam.a_block[0]), 2.0 + std::sqrt(3.5), 1e-10);
    EXPECT_NEAR(std::abs(fam.b_block[0]), 2.0 - std::sqrt(3.5), 1e-10);
    const Vec2 zero{0.0, 0.0};
    EXPECT_LT(norm(fam.nonlinear(0, zero)), 1e-14);
}

TEST(Localize, QuadraticSmallnessUnderHalving) {
    const auto o = saddle_22();
    const auto c = Cocycle::from_orbit(o);
    const auto s = compute_directions(c, o.period);
    const auto fam = localize(shifted_square(), c, s, 0.1);
    // p'' = 2 makes D(alpha, beta) linear in h, so halving R halves the bound.
    for (double r : {0.1, 0.05, 0.02}) EXPECT_LE(fam.sampled_delta(0, r / 2), 0.5 * fam.sampled_delta(0, r) * (1.0 + 1e-9));
}

TEST(Localize, BudgetExceededSuggestsRadius) {
    const auto o = saddle_22();
    const auto c = Cocycle::from_orbit(o);
    const auto s = compute_directions(c, o.period);
    double suggested = 0.0;
    try {
        localize(shifted_square(), c, s, 5.0);
        FAIL() << "expected DeltaBudgetExceeded";
    } catch (const DeltaBudgetExceeded& e) {
        suggested = e.suggested_radius();
        EXPECT_GT(e.measured(), 0.0);
    }
    ASSERT_GT(suggested, 0.0);
    ASSERT_LT(suggested, 5.0);
    const auto fam = localize(shifted_square(), c, s, suggested);
    EXPECT_TRUE(fam.params().admissible());
    EXPECT_THROW(localize(shifted_square(), c, s, 1.01 * suggested + 1e-3), DeltaBudgetExceeded);
}

TEST(GraphStep, LinearModelScalesSlope) {
    const auto fam = skew_family(PolynomialSkewMap::linear(), 1.0);
    const Complex a(0.3, -0.2);
    std::vector<Complex> c(17, 0.0);
    c[1] = a;
    const auto out = graph_transform_step(fam, 0, LipschitzGraph::from_coefficients(c, fam.graph_radius));
    EXPECT_NEAR(std::abs(out.a[1] - a / 4.0), 0.0, 1e-15);
    EXPECT_LT(scaled_max(out, 2), 1e-16);
    EXPECT_EQ(out.a[0], Complex(0.0));
}

TEST(GraphStep, QuadraticModelFromZero) {
    const auto fam = skew_family(PolynomialSkewMap::quadratic(), 0.05);
    const auto out = graph_transform_step(fam, 0, LipschitzGraph::zero(16, fam.graph_radius));
    // F(x) = x^2 and G^{-1}(x) = x / 2.
    EXPECT_NEAR(std::abs(out.a[2] - 0.25), 0.0, 1e-12);
    EXPECT_LT(std::abs(out.a[1]), 1e-12);
    EXPECT_LT(out.inversion_residual, 1e-15);
    EXPECT_FALSE(out.degree_warning);
}

TEST(GraphStep, TruncationRaisesDegreeWarning) {
    const auto fam = skew_family(PolynomialSkewMap::quadratic(), 0.05);
    const auto out = graph_transform_step(fam, 0, LipschitzGraph::zero(1, fam.graph_radius));
    EXPECT_TRUE(out.degree_warning);
    const double r = fam.graph_radius;
    EXPECT_NEAR(out.tail, 0.25 * r * r, 1e-12);
}

TEST(GraphMetric, Examples) {
    const auto z = LipschitzGraph::zero(4, 1.0);
    const auto sq = LipschitzGraph::from_coefficients({0.0, 0.0, 1.0}, 1.0);
    EXPECT_EQ(graph_metric(sq, sq), 0.0);
    EXPECT_NEAR(graph_metric(sq, z), 1.0, 1e-15);
    EXPECT_THROW(graph_metric(sq, LipschitzGraph::zero(2, 0.5)), InvalidInput);
}

TEST(GraphMetric, TriangleInequalityAndSymmetry) {
    Gen g(53);
    for (int i = 0; i < 200; ++i) {
        const double r = g.uniform(0.1, 2.0);
        const auto a = random_graph(g, r, 1.0), b = random_graph(g, r, 1.0), c = random_graph(g, r, 1.0);
        EXPECT_LE(graph_metric(a, c), graph_metric(a, b) + graph_metric(b, c) + 1e-12);
        EXPECT_NEAR(graph_metric(a, b), graph_metric(b, a), 1e-15);
    }
}

TEST(GraphMetric, OuterCircleAttainsSupremumForPolynomials) {
    Gen g(54);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_graph(g, 0.7, 1.0, 6);
        const auto z = LipschitzGraph::zero(6, 0.7);
        // Interior samples never exceed the metric.
        for (int k = 0; k < 200; ++k) {
            const Complex x = g.in_disc(0.7);
            if (std::abs(x) < 1e-6) continue;
            EXPECT_LE(std::abs(a(x)) / std::abs(x), graph_metric(a, z) * (1.0 + 1e-2));
        }
    }
}

TEST(Contraction, LinearModelRandomPairs) {
    const auto fam = skew_family(PolynomialSkewMap::linear(), 1.0);
    const double gamma = fam.params().gamma;
    Gen g(55);
    for (int i = 0; i < 100; ++i) {
        const auto phi = random_graph(g, fam.graph_radius, gamma), psi = random_graph(g, fam.graph_radius, gamma);
        EXPECT_LE(measured_contraction(fam, 0, phi, psi), 0.3);
    }
}

TEST(Contraction, HenonSaddleWithinTheoreticalRegime) {
    const auto fam = orbit_family(shifted_square(), saddle_22());
    const auto p = fam.params();
    Gen g(56);
    double kappa = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto phi = random_graph(g, fam.graph_radius, p.gamma), psi = random_graph(g, fam.graph_radius, p.gamma);
        kappa = std::max(kappa, measured_contraction(fam, 0, phi, psi));
    }
    EXPECT_LT(kappa, 1.0);
    EXPECT_LE(kappa, p.lambda_prime() / p.mu_prime());
}

TEST(ConePreservation, OutputStaysInCone) {
    Gen g(57);
    for (const auto& fam : {orbit_family(shifted_square(), saddle_22()), skew_family(PolynomialSkewMap::quadratic(), 0.05)}) {
        const double gamma = fam.params().gamma;
        for (int i = 0; i < 30; ++i) {
            const auto phi = random_graph(g, fam.graph_radius, gamma);
            ASSERT_LE(phi.gamma_hat, gamma);
            EXPECT_LE(graph_transform_step(fam, 0, phi).gamma_hat, gamma);
        }
    }
}

TEST(SolveLeaf, LinearModelOneStep) {
    const auto fam = skew_family(PolynomialSkewMap::linear(), 1.0);
    const auto leaf = solve_leaf(fam, fam.params(), LeafKind::center_unstable);
    EXPECT_TRUE(leaf.converged);
    EXPECT_EQ(leaf.iterations, 1);
    EXPECT_LT(scaled_max(leaf.phi), 1e-16);
    EXPECT_LT(leaf.tangency(), 1e-8);
    EXPECT_LT(leaf.invariance_residual, 1e-8);
}

TEST(SolveLeaf, QuadraticModelCoefficient) {
    const auto fam = skew_family(PolynomialSkewMap::quadratic(), 0.05);
    const auto leaf = solve_leaf(fam, fam.params(), LeafKind::center_unstable);
    ASSERT_TRUE(leaf.converged);
    // a = 0.5 a / 4 + 1 / 4.
    EXPECT_NEAR(leaf.phi.a[2].real(), 2.0 / 7.0, 1e-10);
    EXPECT_NEAR(leaf.phi.a[2].imag(), 0.0, 1e-10);
    EXPECT_LT(scaled_max(leaf.phi, 3), 1e-16);
    // The leaf is the curve y = 2/7 x^2 in the ambient plane.
    const Vec2 p = leaf.embed(Complex(0.01, 0.005));
    EXPECT_NEAR(std::abs(p[1] - 2.0 / 7.0 * p[0] * p[0]), 0.0, 1e-15);
}

TEST(SolveLeaf, IncrementRatioMatchesLambdaOverMu) {
    const auto fam = skew_family(PolynomialSkewMap::quadratic(), 0.05);
    Gen g(58);
    const auto init = random_graph(g, fam.graph_radius, fam.params().gamma);
    const auto leaf = solve_leaf(fam, fam.params(), LeafKind::center_unstable, {}, 0, init);
    ASSERT_TRUE(leaf.converged);
    ASSERT_GE(leaf.history.size(), 6u);
    const double ratio = leaf.history[5] / leaf.history[4];
    EXPECT_NEAR(ratio, 0.25, 0.25 * 0.05);
}

TEST(SolveLeaf, UniqueFromDistinctStarts) {
    const auto fam = orbit_family(shifted_square(), saddle_22());
    Gen g(59);
    const double gamma = fam.params().gamma;
    const auto a = solve_leaf(fam, fam.params(), LeafKind::center_unstable, {}, 0, random_graph(g, fam.graph_radius, gamma));
    const auto b = solve_leaf(fam, fam.params(), LeafKind::center_unstable, {}, 0, random_graph(g, fam.graph_radius, gamma));
    EXPECT_LT(graph_metric(a.phi, b.phi), 1e-10);
}

TEST(SolveLeaf, StableLeafOfQuadraticModelIsTheAxis) {
    // x = 0 is invariant under (2x, y/2 + x^2).
    const auto fam = skew_family(PolynomialSkewMap::quadratic(), 0.05, LeafKind::stable);
    const auto leaf = solve_leaf(fam, fam.params(), LeafKind::stable);
    ASSERT_TRUE(leaf.converged);
    EXPECT_LT(scaled_max(leaf.phi), 1e-16);
    EXPECT_LT(line_angle(leaf.tangent(), Vec2{0.0, 1.0}), 1e-12);
}

TEST(SolveLeaf, HenonOrbitLeavesAreInvariantAndTangent) {
    const auto h = horseshoe();
    for (int n : {1, 2, 3}) {
        for (const auto& o : find_periodic(h, n)) {
            for (auto kind : {LeafKind::center_unstable, LeafKind::stable}) {
                const auto fam = orbit_family(h, o, kind);
                const auto sol = solve_leaves(fam, fam.params());
                ASSERT_TRUE(sol.converged);
                EXPECT_TRUE(sol.invariant) << sol.invariance_residual;
                for (const auto& leaf : sol.leaves) {
                    EXPECT_LT(leaf.tangency(), 1e-8);
                    // Ambient check: f maps leaf points onto the next leaf.
                    const auto& next = sol.leaves[static_cast<std::size_t>(fam.target(leaf.chart_index))];
                    const Vec2 p = leaf.embed(0.2 * leaf.epsilon / std::abs(fam.a_block[static_cast<std::size_t>(leaf.chart_index)]));
                    const Vec2 q = kind == LeafKind::center_unstable ? h.apply(p) : h.apply_inverse(p);
                    EXPECT_LT(next.graph_distance(q), 1e-8);
                }
                EXPECT_LT(approximation_residual(fam, sol.leaves), 1e-10);
            }
        }
    }
}

TEST(SolveLeaf, KindMismatchRejected) {
    const auto fam = skew_family(PolynomialSkewMap::linear(), 1.0);
    EXPECT_THROW(solve_leaf(fam, fam.params(), LeafKind::stable), InvalidInput);
}

TEST(SolveLeaf, InadmissibleParamsRejected) {
    const auto fam = skew_family(PolynomialSkewMap::linear(), 1.0);
    auto p = fam.params();
    p.gamma = 2.0;
    EXPECT_THROW(solve_leaf(fam, p, LeafKind::center_unstable), ParamsViolated);
}

TEST(Residual, LinearAndQuadraticModels) {
    const auto lin = skew_family(PolynomialSkewMap::linear(), 1.0);
    EXPECT_LT(approximation_residual(lin, solve_leaf(lin, lin.params(), LeafKind::center_unstable)), 1e-14);
    const auto quad = skew_family(PolynomialSkewMap::quadratic(), 0.05);
    for (int d : {8, 16}) {
        SolveOptions o;
        o.degree = d;
        EXPECT_LT(approximation_residual(quad, solve_leaf(quad, quad.params(), LeafKind::center_unstable, o)), 1e-10);
    }
}

TEST(Residual, DegreeOneTruncationOnQuadraticModel) {
    const auto fam = skew_family(PolynomialSkewMap::quadratic(), 0.05);
    SolveOptions o;
    o.degree = 1;
    const auto leaf = solve_leaf(fam, fam.params(), LeafKind::center_unstable, o);
    const double r = fam.graph_radius;
    // The degree-1 fixed point is phi = 0, whose pointwise image is x^2 / 4.
    EXPECT_LT(scaled_max(leaf.phi), 1e-16);
    EXPECT_NEAR(approximation_residual(fam, leaf), 0.25 * r * r, 1e-14);
    // Its distance to the true leaf 2/7 x^2 on |x| = r.
    double gap = 0.0;
    for (int k = 0; k < 64; ++k) {
        const Complex z = std::polar(r, 2.0 * M_PI * k / 64);
        gap = std::max(gap, std::abs(2.0 / 7.0 * z * z - leaf.phi(z)));
    }
    EXPECT_NEAR(gap, 2.0 / 7.0 * r * r, 1e-15);
}

TEST(Claims, RandomAdmissibleHenonDraws) {
    Gen g(60);
    int draws = 0;
    while (draws < 5) {
        const double c0 = g.uniform(-8.0, -5.0), b = g.uniform(0.2, 0.6);
        const auto h = GeneralizedHenon::single({c0, 0.0, 1.0}, b);
        for (const auto& o : find_periodic(h, draws % 2 + 1)) {
            if (o.classification != OrbitClass::saddle) continue;
            const auto fam = orbit_family(h, o);
            const auto p = fam.params();
            ASSERT_TRUE(p.admissible());
            const double r = fam.graph_radius;
            const auto samples = disc_samples(g, r, 1000);
            for (int k = 0; k < fam.steps(); ++k) {
                const auto phi = random_graph(g, r, p.gamma), psi = random_graph(g, r, p.gamma);
                EXPECT_LE(claim1_ratio(fam, k, phi, psi, samples), p.lambda0_claim1());
                EXPECT_GE(domain_ratio(fam, k, phi, samples), p.mu0_prop());
                EXPECT_LT(claim2_defect(fam, k, 3, phi, disc_samples(g, 0.9 * r, 1000)), 1e-9);
            }
            ++draws;
            break;
        }
    }
}

TEST(Claims, SkewModels) {
    Gen g(61);
    for (const auto& f : {PolynomialSkewMap::linear(), PolynomialSkewMap::quadratic()}) {
        const auto fam = skew_family(f, 0.05);
        const auto p = fam.params();
        const double r = fam.graph_radius;
        const auto samples = disc_samples(g, r, 1000);
        const auto phi = random_graph(g, r, p.gamma), psi = random_graph(g, r, p.gamma);
        // Equality holds for these models, so allow roundoff.
        EXPECT_LE(claim1_ratio(fam, 0, phi, psi, samples), p.lambda0_claim1() * (1.0 + 1e-12));
        EXPECT_GE(domain_ratio(fam, 0, phi, samples), p.mu0_prop());
        EXPECT_LT(claim2_defect(fam, 0, 4, phi, samples), 1e-9);
    }
}
