#include <gtest/gtest.h>

#include <cmath>

#include "cuhyp/core/frame.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/core/poly.hpp"
#include "support/gen.hpp"

using namespace cuhyp;
using cuhyp::testing::Gen;

namespace {

// Largest singular value by power iteration on M*M.
template <std::size_t R, std::size_t C>
double power_iteration_norm(const Matrix<R, C>& m) {
    const auto mm = m.adjoint() * m;
    Vector<C> v;
    for (std::size_t i = 0; i < C; ++i) v[i] = Complex(1.0 + 0.1 * i, 0.3 * i);
    double s = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Vector<C> w = mm * v;
        const double n = norm(w);
        if (n == 0.0) return 0.0;
        v = w * (1.0 / n);
        if (std::abs(n - s) < 1e-15 * n) {
            s = n;
            break;
        }
        s = n;
    }
    return std::sqrt(s);
}

}  // namespace

TEST(OpNorm, Identity) { EXPECT_NEAR(op_norm(Mat2::identity()), 1.0, 1e-15); }

TEST(OpNorm, Diagonal) { EXPECT_NEAR(op_norm(Mat2::diagonal(Vec2{0.5, 2.0})), 2.0, 1e-15); }

TEST(OpNorm, HenonJacobianMatchesCharacteristicPolynomial) {
    const Mat2 m = Mat2::from_rows({{0.0, 1.0}, {-0.5, 4.0}});
    // M*M = [[0.25, -2], [-2, 17]]: s^2 - 17.25 s + 0.25 = 0.
    const double tr = 17.25, dt = 0.25;
    const double s = (tr + std::sqrt(tr * tr - 4.0 * dt)) / 2.0;
    EXPECT_NEAR(op_norm(m), std::sqrt(s), 1e-13);
    EXPECT_NEAR(op_norm(m), 4.151565370, 1e-8);
}

TEST(OpNorm, RejectsNonFinite) {
    Mat2 m = Mat2::identity();
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(op_norm(m), InvalidInput);
    m(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(op_norm(m), InvalidInput);
}

TEST(OpNorm, AgreesWithPowerIteration) {
    Gen g(11);
    for (int i = 0; i < 200; ++i) {
        const auto a = g.mat<2, 2>();
        EXPECT_NEAR(op_norm(a), power_iteration_norm(a), 1e-8 * op_norm(a));
        const auto b = g.mat<4, 4>();
        EXPECT_NEAR(op_norm(b), power_iteration_norm(b), 1e-8 * op_norm(b));
    }
}

TEST(OpNorm, UnitaryInvariance) {
    Gen g(12);
    for (int i = 0; i < 200; ++i) {
        const auto u = g.unitary<3>();
        const auto m = g.mat<3, 3>();
        EXPECT_NEAR(op_norm(u * m), op_norm(m), 1e-10);
        EXPECT_NEAR(op_norm(m * u), op_norm(m), 1e-10);
    }
}

TEST(OpNorm, SubMultiplicative) {
    Gen g(13);
    for (int i = 0; i < 200; ++i) {
        const auto a = g.mat<3, 3>();
        const auto b = g.mat<3, 3>();
        EXPECT_LE(op_norm(a * b), op_norm(a) * op_norm(b) * (1.0 + 1e-12));
    }
}

TEST(OpNorm, RectangularAndScaled) {
    Matrix<2, 3> m;
    m(0, 0) = 3.0;
    m(1, 2) = Complex(0.0, 4.0);
    EXPECT_NEAR(op_norm(m), 4.0, 1e-14);
    EXPECT_NEAR(op_norm(Mat2::identity() * 1e200), 1e200, 1e186);
    EXPECT_NEAR(op_norm(Mat2::identity() * 1e-200), 1e-200, 1e-214);
}

TEST(HermitianEigen, MatchesTwoByTwoClosedForm) {
    Gen g(14);
    for (int i = 0; i < 100; ++i) {
        const auto a = g.mat<2, 2>();
        const auto h = a.adjoint() * a;
        const double tr = h(0, 0).real() + h(1, 1).real();
        const double dt = (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * dt));
        const auto ev = hermitian_eigenvalues(h);
        EXPECT_NEAR(ev[1], (tr + disc) / 2.0, 1e-10 * (1.0 + tr));
        EXPECT_NEAR(ev[0] + ev[1], tr, 1e-10 * (1.0 + tr));
    }
}

TEST(Eigen2, HenonJacobian) {
    const Mat2 m = Mat2::from_rows({{0.0, 1.0}, {-0.5, 4.0}});
    const auto mu = eigenvalues(m);
    EXPECT_NEAR(mu[0].real(), 2.0 + std::sqrt(3.5), 1e-14);
    EXPECT_NEAR(mu[1].real(), 2.0 - std::sqrt(3.5), 1e-14);
    for (const auto& x : mu) {
        const Vec2 v = eigenvector(m, x);
        EXPECT_LT(norm(m * v - v * x), 1e-13);
    }
}

TEST(OrthonormalFrame, AxisAligned) {
    const auto f = orthonormal_frame(Vec2{1.0, 0.0});
    EXPECT_LT(frobenius_norm(f.q - Mat2::identity()), 1e-15);
    EXPECT_EQ(f.split, 1u);
}

TEST(OrthonormalFrame, SwapCase) {
    const auto f = orthonormal_frame(Vec2{0.0, 3.0});
    const Vec2 c0 = f.column(0), c1 = f.column(1);
    EXPECT_LT(norm(c0 - Vec2{0.0, 1.0}), 1e-15);
    // (-1, 0) up to a unimodular phase.
    EXPECT_NEAR(std::abs(c1[0]), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(c1[1]), 0.0, 1e-15);
}

TEST(OrthonormalFrame, DiagonalDirection) {
    const double s = 1.0 / std::sqrt(2.0);
    const auto f = orthonormal_frame(Vec2{s, s});
    EXPECT_LE(f.unitarity_defect(), 1e-12);
    EXPECT_NEAR(line_angle(f.column(0), Vec2{1.0, 1.0}), 0.0, 1e-15);
}

TEST(OrthonormalFrame, RandomDirectionsAreUnitary) {
    Gen g(15);
    for (int i = 0; i < 1000; ++i) {
        const auto v2 = g.vec<2>();
        const auto f2 = orthonormal_frame(v2);
        EXPECT_LE(f2.unitarity_defect(), 1e-12);
        EXPECT_LT(line_angle(f2.column(0), v2), 1e-7);
        const auto v4 = g.vec<4>();
        const auto f4 = orthonormal_frame(v4);
        EXPECT_LE(f4.unitarity_defect(), 1e-12);
        EXPECT_LT(norm(f4.column(0) - v4 * (1.0 / norm(v4))), 1e-14);
    }
}

TEST(OrthonormalFrame, RejectsZero) { EXPECT_THROW(orthonormal_frame(Vec2{0.0, 0.0}), InvalidInput); }

TEST(Polydisc, Membership) {
    const auto unit = Polydisc::centered({1.0, 1.0});
    EXPECT_TRUE(kobayashi_membership(unit, Vec2{0.0, 0.0}));
    EXPECT_FALSE(kobayashi_membership(unit, Vec2{1.0, 0.0}));
    const auto wide = Polydisc::centered({2.0, 1.0});
    EXPECT_TRUE(kobayashi_membership(wide, Vec2{1.5, 0.5}));
    const auto shifted = Polydisc({Complex(1.0, 1.0), 0.0}, {0.5, 1.0});
    EXPECT_TRUE(kobayashi_membership(shifted, Vec2{Complex(1.2, 0.9), 0.0}));
    EXPECT_FALSE(kobayashi_membership(shifted, Vec2{0.0, 0.0}));
}

TEST(Polydisc, DimensionMismatch) {
    const auto unit = Polydisc::centered({1.0, 1.0});
    EXPECT_THROW(kobayashi_membership(unit, Vector<3>{0.0, 0.0, 0.0}), InvalidInput);
    EXPECT_THROW(Polydisc::centered({1.0, -1.0}), InvalidInput);
}

TEST(LineAngle, PhaseInvariantAndBounded) {
    Gen g(16);
    for (int i = 0; i < 200; ++i) {
        const auto a = g.vec<2>();
        const auto b = g.vec<2>();
        const Complex ph = std::polar(1.0, g.uniform(0, 6.28));
        const double t = line_angle(a, b);
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, M_PI / 2 + 1e-15);
        EXPECT_NEAR(line_angle(a * ph, b), t, 1e-12);
    }
    EXPECT_NEAR(line_angle(Vec2{1.0, 0.0}, Vec2{0.0, 1.0}), M_PI / 2, 1e-15);
}

TEST(PolynomialRoots, QuadraticAndCubic) {
    // y^2 - 1.5 y - 1 = (y - 2)(y + 0.5)
    auto r = polynomial_roots(Polynomial({-1.0, -1.5, 1.0}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(std::abs(r[0] - Complex(-0.5)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(r[1] - Complex(2.0)), 0.0, 1e-14);
    // z^3 - 1
    r = polynomial_roots(Polynomial({-1.0, 0.0, 0.0, 1.0}));
    ASSERT_EQ(r.size(), 3u);
    for (const auto& z : r) EXPECT_NEAR(std::abs(z * z * z - 1.0), 0.0, 1e-13);
}

TEST(PolynomialRoots, RandomPolynomialsResidual) {
    Gen g(17);
    for (int i = 0; i < 100; ++i) {
        std::vector<Complex> c;
        const int d = g.integer(2, 8);
        for (int k = 0; k <= d; ++k) c.push_back(g.complex_normal());
        const Polynomial p(c);
        const auto roots = polynomial_roots(p);
        ASSERT_EQ(roots.size(), static_cast<std::size_t>(d));
        // Reconstruct the polynomial from its roots.
        std::vector<Complex> prod{1.0};
        for (const auto& z : roots) {
            std::vector<Complex> next(prod.size() + 1, 0.0);
            for (std::size_t k = 0; k < prod.size(); ++k) {
                next[k + 1] += prod[k];
                next[k] -= z * prod[k];
            }
            prod = next;
        }
        for (int k = 0; k <= d; ++k)
            EXPECT_NEAR(std::abs(prod[k] * c[d] - c[k]), 0.0, 1e-8 * (1.0 + std::abs(c[k])));
    }
}
