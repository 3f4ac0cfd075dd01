#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cuhyp/orbits/periodic.hpp"
#include "support/gen.hpp"

using namespace cuhyp;

namespace {

GeneralizedHenon horseshoe() { return GeneralizedHenon::single({-6.0, 0.0, 1.0}, 0.5); }
GeneralizedHenon shifted_square() { return GeneralizedHenon::single({-1.0, 0.0, 1.0}, 0.5); }

}  // namespace

TEST(FixedPoints, QuadraticFormula) {
    const auto fp = find_fixed_points(shifted_square());
    ASSERT_EQ(fp.size(), 2u);
    // y^2 - 1.5 y - 1 = 0.
    const double disc = std::sqrt(2.25 + 4.0);
    EXPECT_LT(norm(fp[0].points[0] - Vec2{(1.5 - disc) / 2, (1.5 - disc) / 2}), 1e-14);
    EXPECT_LT(norm(fp[1].points[0] - Vec2{(1.5 + disc) / 2, (1.5 + disc) / 2}), 1e-14);
    EXPECT_LT(norm(fp[0].points[0] - Vec2{-0.5, -0.5}), 1e-14);
    EXPECT_LT(norm(fp[1].points[0] - Vec2{2.0, 2.0}), 1e-14);
}

TEST(FixedPoints, PureSquare) {
    const auto fp = find_fixed_points(GeneralizedHenon::single({0.0, 0.0, 1.0}, 0.5));
    ASSERT_EQ(fp.size(), 2u);
    EXPECT_LT(norm(fp[0].points[0]), 1e-15);
    EXPECT_LT(norm(fp[1].points[0] - Vec2{1.5, 1.5}), 1e-14);
}

TEST(FixedPoints, CountEqualsDegreeWithMultiplicity) {
    cuhyp::testing::Gen g(31);
    for (int i = 0; i < 50; ++i) {
        const int d = g.integer(2, 6);
        std::vector<Complex> c;
        for (int k = 0; k < d; ++k) c.push_back(g.complex_normal());
        c.push_back(1.0);
        const auto fp = find_fixed_points(GeneralizedHenon::single(c, g.complex_normal()));
        int total = 0;
        for (const auto& o : fp) total += o.multiplicity;
        EXPECT_EQ(total, d);
    }
    // Double root: p(y) - 1.5 y = (y - 1)^2.
    const auto fp = find_fixed_points(GeneralizedHenon::single({1.0, -0.5, 1.0}, 0.5));
    ASSERT_EQ(fp.size(), 1u);
    EXPECT_EQ(fp[0].multiplicity, 2);
}

TEST(FindPeriodic, PeriodOneMatchesFixedPoints) {
    const auto h = horseshoe();
    const auto exact = find_fixed_points(h);
    const auto via = find_periodic(h, 1);
    ASSERT_EQ(exact.size(), via.size());
    for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_EQ(norm(exact[i].points[0] - via[i].points[0]), 0.0);
    GridSpec g;
    g.analytic_fixed_points = false;
    const auto newton = find_periodic(h, 1, g);
    ASSERT_EQ(newton.size(), exact.size());
    for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_LT(norm(exact[i].points[0] - newton[i].points[0]), 1e-10);
}

TEST(FindPeriodic, PeriodTwoResultantCount) {
    const auto h = horseshoe();
    SearchDiagnostics d;
    const auto two = find_periodic(h, 2, GridSpec{}, &d);
    // (d^2 - d) / 2 two-cycles.
    EXPECT_EQ(two.size(), 1u);
    EXPECT_EQ(d.expected, 4u);
    EXPECT_TRUE(d.saturated);
    // On a 2-cycle {(a, c), (c, a)}: 1.5 a = c^2 - 6 and 1.5 c = a^2 - 6, so
    // a + c = -1.5 and a c = -3.75.
    ASSERT_EQ(two[0].points.size(), 2u);
    const Complex s = two[0].points[0][0] + two[0].points[1][0];
    EXPECT_NEAR(std::abs(s + 1.5), 0.0, 1e-10);
    const Complex x1 = (-1.5 - std::sqrt(17.25)) / 2.0;
    EXPECT_NEAR(std::abs(two[0].points[0][0] - x1), 0.0, 1e-10);
}

TEST(FindPeriodic, HorseshoeCountsAndIdentities) {
    const auto h = horseshoe();
    const std::size_t expected_orbits[] = {2, 1, 2, 3, 6, 9};
    for (int n = 1; n <= 6; ++n) {
        SearchDiagnostics d;
        const auto orbits = find_periodic(h, n, GridSpec{}, &d);
        EXPECT_EQ(orbits.size(), expected_orbits[n - 1]) << "period " << n;
        EXPECT_TRUE(d.saturated) << "period " << n;
        for (const auto& o : orbits) {
            EXPECT_EQ(o.period, n);
            EXPECT_LT(norm(iterate(h, o.points[0], n) - o.points[0]), 1e-9);
            for (int i = 0; i < n; ++i)
                EXPECT_LT(norm(h.apply(o.points[i]) - o.points[(i + 1) % n]), 1e-9);
            EXPECT_NEAR(o.lambda_minus + o.lambda_plus, std::log(0.5), 1e-8);
            EXPECT_NEAR(std::abs(o.multipliers[0] * o.multipliers[1]), std::pow(0.5, n), 1e-8);
            EXPECT_EQ(o.classification, OrbitClass::saddle);
        }
    }
}

TEST(FindPeriodic, InvariantUnderGridRefinement) {
    const auto h = horseshoe();
    GridSpec coarse;
    coarse.resolution = 128;
    GridSpec fine;
    fine.resolution = 256;
    const auto a = find_periodic(h, 4, coarse);
    const auto b = find_periodic(h, 4, fine);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(norm(a[i].points[0] - b[i].points[0]), 1e-9);
}

TEST(FindPeriodic, DeterministicAcrossThreadCounts) {
    const auto h = horseshoe();
    GridSpec one;
    one.threads = 1;
    GridSpec four;
    four.threads = 4;
    const auto a = find_periodic(h, 5, one);
    const auto b = find_periodic(h, 5, four);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(norm(a[i].points[0] - b[i].points[0]), 0.0);
}

TEST(FindPeriodic, RejectsBadPeriod) { EXPECT_THROW(find_periodic(horseshoe(), 0), InvalidInput); }

TEST(Multipliers, FixedPointOfShiftedSquare) {
    const auto fp = find_fixed_points(shifted_square());
    const auto& o = fp[1];
    const auto mu = multipliers(o);
    // mu^2 - 4 mu + 0.5 = 0.
    EXPECT_NEAR(mu[0].real(), 2.0 + std::sqrt(3.5), 1e-12);
    EXPECT_NEAR(mu[1].real(), 2.0 - std::sqrt(3.5), 1e-12);
    EXPECT_NEAR(mu[0].real(), 3.8708, 1e-4);
    EXPECT_NEAR(mu[1].real(), 0.1292, 1e-4);
    EXPECT_NEAR(std::abs(mu[0] * mu[1]), 0.5, 1e-14);
    EXPECT_NEAR(o.lambda_plus, std::log(2.0 + std::sqrt(3.5)), 1e-12);
    EXPECT_NEAR(o.lambda_plus, 1.3535, 1e-4);
    EXPECT_NEAR(o.lambda_minus, -2.0466, 1e-4);
    EXPECT_NEAR(o.lambda_plus + o.lambda_minus, std::log(0.5), 1e-12);
}

TEST(OrbitLogAverage, SinglePointAndConstantCocycle) {
    const auto fp = find_fixed_points(shifted_square());
    EXPECT_NEAR(orbit_log_average(fp[1], fp[1].f_directions), std::log(2.0 + std::sqrt(3.5)), 1e-12);
    const Mat2 d = Mat2::diagonal(Vec2{0.5, 2.0});
    std::vector<Mat2> js(5, d);
    std::vector<Vec2> fs(5, Vec2{0.0, 1.0});
    EXPECT_NEAR(orbit_log_average(js, fs), std::log(2.0), 1e-15);
    std::vector<Vec2> missing(4, Vec2{0.0, 1.0});
    EXPECT_THROW(orbit_log_average(js, missing), InvalidInput);
}

TEST(OrbitLogAverage, InvariantUnderCyclicRebasing) {
    const auto h = horseshoe();
    const auto orbits = find_periodic(h, 5);
    ASSERT_FALSE(orbits.empty());
    const auto& o = orbits.back();
    const double base = orbit_log_average(o, o.f_directions);
    for (int s = 1; s < o.period; ++s) {
        std::vector<Mat2> js(o.jacobians);
        std::vector<Vec2> fs(o.f_directions);
        std::rotate(js.begin(), js.begin() + s, js.end());
        std::rotate(fs.begin(), fs.begin() + s, fs.end());
        EXPECT_NEAR(orbit_log_average(js, fs), base, 1e-14);
    }
    EXPECT_NEAR(base, o.lambda_plus, 1e-8);
}

TEST(ExpansionReport, HorseshoeNoAlarm) {
    const auto h = horseshoe();
    std::vector<PeriodicOrbit> all;
    for (int n = 1; n <= 6; ++n) {
        auto o = find_periodic(h, n);
        all.insert(all.end(), o.begin(), o.end());
    }
    const auto r = uniform_expansion_report(all);
    EXPECT_FALSE(r.zero_exponent_alarm);
    EXPECT_GT(r.chi_min, 0.0);
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_NEAR(r.chi[i], all[i].lambda_plus, 1e-8);
    EXPECT_LT(r.lambda1, 1.0);
    EXPECT_LE(r.c, 1.0);
}

TEST(ExpansionReport, ParabolicWitnessAndSingleton) {
    PeriodicOrbit o;
    o.points = {Vec2{0.0, 0.0}};
    o.jacobians = {Mat2::diagonal(Vec2{1.0, 0.5})};
    analyze_cycle(o);
    EXPECT_EQ(o.classification, OrbitClass::neutral);
    const auto r = uniform_expansion_report({o});
    EXPECT_NEAR(r.chi_min, 0.0, 1e-15);
    EXPECT_TRUE(r.zero_exponent_alarm);

    const auto fp = find_fixed_points(shifted_square());
    const auto s = uniform_expansion_report({fp[1]});
    EXPECT_DOUBLE_EQ(s.chi_min, s.chi[0]);
    EXPECT_EQ(s.witness, 0u);
}
