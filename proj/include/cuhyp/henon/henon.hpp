#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"
#include "cuhyp/core/poly.hpp"
#include "cuhyp/henon/plane_map.hpp"

namespace cuhyp {

// (x, y) -> (y, p(y) - b x).
class ElementaryHenon {
public:
    ElementaryHenon(Polynomial p, Complex b) : p_(std::move(p)), b_(b) {
        p_.c.resize(static_cast<std::size_t>(std::max(p_.degree() + 1, 0)));
        if (p_.degree() < 2) throw InvalidInput("ElementaryHenon: deg p must be at least 2");
        if (b_ == 0.0) throw InvalidInput("ElementaryHenon: b must be nonzero");
        for (const auto& c : p_.c)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw InvalidInput("ElementaryHenon: non-finite coefficient");
        if (!std::isfinite(b_.real()) || !std::isfinite(b_.imag()))
            throw InvalidInput("ElementaryHenon: non-finite b");
    }

    const Polynomial& p() const { return p_; }
    Complex b() const { return b_; }
    int degree() const { return p_.degree(); }

    Vec2 apply(const Vec2& z) const { return Vec2{z[1], p_(z[1]) - b_ * z[0]}; }
    Vec2 apply_inverse(const Vec2& z) const { return Vec2{(p_(z[0]) - z[1]) / b_, z[0]}; }
    Mat2 jacobian(const Vec2& z) const {
        return Mat2::from_rows({{0.0, 1.0}, {-b_, p_.derivative(z[1])}});
    }

    // Positive root of |a_d| r^2 - (1 + |b| + sum_{0<i<d} |c_i|) r - |c_0|, floored at 1.
    // If |y| > R and |y| >= |x| then |p(y) - b x| > |y|, so the region is
    // forward invariant and |y| increases strictly along the orbit.
    double filtration_radius() const {
        const int d = degree();
        double c1 = 0.0;
        for (int i = 1; i < d; ++i) c1 += std::abs(p_.c[static_cast<std::size_t>(i)]);
        const double a = std::abs(p_.leading());
        const double bb = 1.0 + std::abs(b_) + c1;
        const double c0 = std::abs(p_.c[0]);
        const double root = (bb + std::sqrt(bb * bb + 4.0 * a * c0)) / (2.0 * a);
        return std::max(1.0, root);
    }

private:
    Polynomial p_;
    Complex b_;
};

// f = f_k o ... o f_1 for factors {f_1, ..., f_k}.
class GeneralizedHenon {
public:
    explicit GeneralizedHenon(std::vector<ElementaryHenon> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw InvalidInput("GeneralizedHenon: at least one factor required");
    }

    static GeneralizedHenon single(std::vector<Complex> p, Complex b) {
        return GeneralizedHenon({ElementaryHenon(Polynomial(std::move(p)), b)});
    }

    const std::vector<ElementaryHenon>& factors() const { return factors_; }

    int degree() const {
        int d = 1;
        for (const auto& f : factors_) d *= f.degree();
        return d;
    }

    double jacobian_modulus() const {
        double b = 1.0;
        for (const auto& f : factors_) b *= std::abs(f.b());
        return b;
    }

    bool dissipative() const { return jacobian_modulus() < 1.0; }

    Vec2 apply(Vec2 z) const {
        for (const auto& f : factors_) {
            z = f.apply(z);
            if (overflowed(z)) return z;
        }
        return z;
    }

    Vec2 apply_inverse(Vec2 z) const {
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
            z = it->apply_inverse(z);
            if (overflowed(z)) return z;
        }
        return z;
    }

    Mat2 jacobian(Vec2 z) const {
        Mat2 j = Mat2::identity();
        for (const auto& f : factors_) {
            j = f.jacobian(z) * j;
            z = f.apply(z);
        }
        return j;
    }

    double filtration_radius() const {
        double r = 1.0;
        for (const auto& f : factors_) r = std::max(r, f.filtration_radius());
        return r;
    }

    bool in_escape_region(const Vec2& z) const {
        if (overflowed(z)) return true;
        const double ay = std::abs(z[1]);
        return ay > filtration_radius() && ay >= std::abs(z[0]);
    }

private:
    std::vector<ElementaryHenon> factors_;
};

struct EscapeResult {
    bool escaped = false;
    int n = 0;  // first step in the escape region, when escaped
};

// The forward orbit enters {|y| > R, |y| >= |x|} at step n <= max_iter.
inline EscapeResult escapes_to_uplus(const GeneralizedHenon& h, Vec2 z, int max_iter) {
    if (max_iter < 1) throw InvalidInput("escapes_to_uplus: max_iter must be >= 1");
    const double r = h.filtration_radius();
    for (int n = 0; n <= max_iter; ++n) {
        if (overflowed(z)) return {true, n};
        const double ay = std::abs(z[1]);
        if (ay > r && ay >= std::abs(z[0])) return {true, n};
        z = h.apply(z);
    }
    return {false, max_iter};
}

}  // namespace cuhyp
