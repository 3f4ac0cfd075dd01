#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"

namespace cuhyp {

// Coefficients in ascending degree order.
struct Polynomial {
    std::vector<Complex> c;

    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coeffs) : c(std::move(coeffs)) {}

    int degree() const {
        for (std::size_t i = c.size(); i-- > 0;)
            if (c[i] != 0.0) return static_cast<int>(i);
        return -1;
    }

    Complex leading() const {
        const int d = degree();
        return d < 0 ? Complex(0.0) : c[static_cast<std::size_t>(d)];
    }

    Complex operator()(Complex z) const {
        Complex s = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) s = s * z + c[i];
        return s;
    }

    Complex derivative(Complex z) const {
        Complex s = 0.0;
        for (std::size_t i = c.size(); i-- > 1;) s = s * z + static_cast<double>(i) * c[i];
        return s;
    }

    // Value and derivative in one Horner pass.
    std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
        Complex p = 0.0;
        Complex dp = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) {
            dp = dp * z + p;
            p = p * z + c[i];
        }
        return {p, dp};
    }
};

namespace detail {

// Eigenvalues of an upper Hessenberg matrix (row-major, n x n) by shifted
// complex QR with Givens rotations and Wilkinson shifts.
inline std::vector<Complex> hessenberg_eigenvalues(std::vector<Complex> h, std::size_t n) {
    auto at = [&](std::size_t i, std::size_t j) -> Complex& { return h[i * n + j]; };
    std::vector<Complex> eig(n);
    std::vector<double> cs(n);
    std::vector<Complex> sn(n);
    const double eps = 2.220446049250313e-16;

    std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
    int iter = 0;
    while (hi >= 0) {
        if (hi == 0) {
            eig[0] = at(0, 0);
            break;
        }
        std::ptrdiff_t l = hi;
        while (l > 0) {
            const double s = std::abs(at(l, l)) + std::abs(at(l - 1, l - 1));
            if (std::abs(at(l, l - 1)) <= eps * (s == 0.0 ? 1.0 : s)) {
                at(l, l - 1) = 0.0;
                break;
            }
            --l;
        }
        if (l == hi) {
            eig[hi] = at(hi, hi);
            --hi;
            iter = 0;
            continue;
        }
        if (++iter > 500) throw InvalidInput("polynomial roots: QR iteration did not converge");

        Complex shift;
        if (iter % 11 == 10) {
            shift = at(hi, hi) + std::abs(at(hi, hi - 1)) * Complex(0.75, 0.4375);
        } else {
            const Complex a = at(hi - 1, hi - 1), b = at(hi - 1, hi), c = at(hi, hi - 1), d = at(hi, hi);
            const Complex tr = a + d, dt = a * d - b * c;
            const Complex disc = std::sqrt(tr * tr - 4.0 * dt);
            const Complex e1 = (tr + disc) / 2.0, e2 = (tr - disc) / 2.0;
            shift = std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
        }

        const auto lo = static_cast<std::size_t>(l);
        const auto up = static_cast<std::size_t>(hi);
        for (std::size_t i = lo; i <= up; ++i) at(i, i) -= shift;
        for (std::size_t k = lo; k < up; ++k) {
            const Complex a = at(k, k), b = at(k + 1, k);
            const double r = std::hypot(std::abs(a), std::abs(b));
            double c = 0.0;
            Complex s = 1.0;
            if (r != 0.0 && std::abs(a) != 0.0) {
                c = std::abs(a) / r;
                s = (a / std::abs(a)) * std::conj(b) / r;
            }
            cs[k] = c;
            sn[k] = s;
            for (std::size_t j = k; j <= up; ++j) {
                const Complex x = at(k, j), y = at(k + 1, j);
                at(k, j) = c * x + s * y;
                at(k + 1, j) = -std::conj(s) * x + c * y;
            }
        }
        for (std::size_t k = lo; k < up; ++k) {
            const double c = cs[k];
            const Complex s = sn[k];
            const std::size_t last = std::min(k + 2, up);
            for (std::size_t i = lo; i <= last; ++i) {
                const Complex x = at(i, k), y = at(i, k + 1);
                at(i, k) = x * c + y * std::conj(s);
                at(i, k + 1) = -x * s + y * c;
            }
        }
        for (std::size_t i = lo; i <= up; ++i) at(i, i) += shift;
    }
    return eig;
}

}  // namespace detail

// All complex roots, with multiplicity, as eigenvalues of the companion
// matrix followed by a few Newton polishing steps on the original polynomial.
inline std::vector<Complex> polynomial_roots(const Polynomial& p) {
    const int d = p.degree();
    if (d < 0) throw InvalidInput("polynomial_roots: zero polynomial");
    for (const auto& x : p.c)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw InvalidInput("polynomial_roots: non-finite coefficient");
    if (d == 0) return {};
    const auto n = static_cast<std::size_t>(d);
    const Complex lead = p.c[n];
    std::vector<Complex> comp(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) comp[j] = -p.c[n - 1 - j] / lead;
    for (std::size_t i = 1; i < n; ++i) comp[i * n + (i - 1)] = 1.0;
    auto roots = detail::hessenberg_eigenvalues(std::move(comp), n);

    for (auto& z : roots) {
        for (int k = 0; k < 4; ++k) {
            const auto [v, dv] = p.eval_with_derivative(z);
            if (dv == 0.0) break;
            const Complex next = z - v / dv;
            if (!(std::abs(p(next)) < std::abs(v))) break;
            z = next;
        }
    }
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

}  // namespace cuhyp
