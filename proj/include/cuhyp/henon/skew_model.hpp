#pragma once

#include <cmath>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/henon/plane_map.hpp"

namespace cuhyp {

// f(x, y) = (a x, b y + q x^2). The origin is fixed with Df = diag(a, b);
// for |a| > 1 > |b| the x-axis direction is the centre-unstable one.
class PolynomialSkewMap {
public:
    PolynomialSkewMap(Complex a, Complex b, Complex q) : a_(a), b_(b), q_(q) {
        if (a_ == 0.0 || b_ == 0.0) throw InvalidInput("PolynomialSkewMap: a and b must be nonzero");
    }

    static PolynomialSkewMap linear() { return {2.0, 0.5, 0.0}; }
    static PolynomialSkewMap quadratic() { return {2.0, 0.5, 1.0}; }
    // Multiplier 1 along x: no expansion at the fixed point.
    static PolynomialSkewMap neutral() { return {1.0, 0.5, 0.0}; }

    Complex a() const { return a_; }
    Complex b() const { return b_; }
    Complex q() const { return q_; }

    Vec2 apply(const Vec2& z) const { return Vec2{a_ * z[0], b_ * z[1] + q_ * z[0] * z[0]}; }
    Vec2 apply_inverse(const Vec2& z) const {
        const Complex x = z[0] / a_;
        return Vec2{x, (z[1] - q_ * x * x) / b_};
    }
    Mat2 jacobian(const Vec2& z) const { return Mat2::from_rows({{a_, 0.0}, {2.0 * q_ * z[0], b_}}); }
    double jacobian_modulus() const { return std::abs(a_ * b_); }

private:
    Complex a_;
    Complex b_;
    Complex q_;
};

}  // namespace cuhyp
