#pragma once

// Small fixed-size complex linear algebra. Every dimension in this library is
// tiny (<= 8), so values live on the stack and all sizes are template
// parameters.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>

#include "cuhyp/core/errors.hpp"

namespace cuhyp {

using Complex = std::complex<double>;

template <std::size_t N>
struct Vector {
    std::array<Complex, N> c{};

    constexpr Vector() = default;
    constexpr Vector(std::initializer_list<Complex> init) {
        std::size_t i = 0;
        for (auto v : init) {
            if (i < N) c[i++] = v;
        }
    }

    static constexpr std::size_t size() { return N; }
    Complex& operator[](std::size_t i) { return c[i]; }
    const Complex& operator[](std::size_t i) const { return c[i]; }

    Vector& operator+=(const Vector& o) {
        for (std::size_t i = 0; i < N; ++i) c[i] += o.c[i];
        return *this;
    }
    Vector& operator-=(const Vector& o) {
        for (std::size_t i = 0; i < N; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vector& operator*=(Complex s) {
        for (auto& v : c) v *= s;
        return *this;
    }
    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator*(Vector a, Complex s) { return a *= s; }
    friend Vector operator*(Complex s, Vector a) { return a *= s; }
    friend Vector operator/(Vector a, Complex s) { return a *= (1.0 / s); }
    friend Vector operator-(Vector a) { return a *= -1.0; }
};

template <std::size_t R, std::size_t C>
struct Matrix {
    // Row-major storage.
    std::array<Complex, R * C> e{};

    static constexpr std::size_t rows() { return R; }
    static constexpr std::size_t cols() { return C; }

    Complex& operator()(std::size_t i, std::size_t j) { return e[i * C + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return e[i * C + j]; }

    static Matrix identity() requires(R == C) {
        Matrix m;
        for (std::size_t i = 0; i < R; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(const Vector<R>& d) requires(R == C) {
        Matrix m;
        for (std::size_t i = 0; i < R; ++i) m(i, i) = d[i];
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows_init) {
        Matrix m;
        std::size_t i = 0;
        for (const auto& row : rows_init) {
            std::size_t j = 0;
            for (auto v : row) {
                if (i < R && j < C) m(i, j) = v;
                ++j;
            }
            ++i;
        }
        return m;
    }

    static Matrix from_columns(const std::array<Vector<R>, C>& columns) {
        Matrix m;
        for (std::size_t j = 0; j < C; ++j)
            for (std::size_t i = 0; i < R; ++i) m(i, j) = columns[j][i];
        return m;
    }

    Vector<R> column(std::size_t j) const {
        Vector<R> v;
        for (std::size_t i = 0; i < R; ++i) v[i] = (*this)(i, j);
        return v;
    }

    Matrix<C, R> adjoint() const {
        Matrix<C, R> a;
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) a(j, i) = std::conj((*this)(i, j));
        return a;
    }

    Matrix& operator+=(const Matrix& o) {
        for (std::size_t k = 0; k < R * C; ++k) e[k] += o.e[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        for (std::size_t k = 0; k < R * C; ++k) e[k] -= o.e[k];
        return *this;
    }
    Matrix& operator*=(Complex s) {
        for (auto& v : e) v *= s;
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
};

template <std::size_t R, std::size_t K, std::size_t C>
Matrix<R, C> operator*(const Matrix<R, K>& a, const Matrix<K, C>& b) {
    Matrix<R, C> out;
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const Complex aik = a(i, k);
            for (std::size_t j = 0; j < C; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

template <std::size_t R, std::size_t C>
Vector<R> operator*(const Matrix<R, C>& a, const Vector<C>& v) {
    Vector<R> out;
    for (std::size_t i = 0; i < R; ++i) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < C; ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

using Vec2 = Vector<2>;
using Mat2 = Matrix<2, 2>;

// Hermitian inner product, conjugate-linear in the first slot.
template <std::size_t N>
Complex dot(const Vector<N>& a, const Vector<N>& b) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

template <std::size_t N>
double norm(const Vector<N>& v) {
    double scale = 0.0;
    for (const auto& x : v.c) scale = std::max(scale, std::abs(x));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (const auto& x : v.c) s += std::norm(x / scale);
    return scale * std::sqrt(s);
}

template <std::size_t N>
double max_abs(const Vector<N>& v) {
    double m = 0.0;
    for (const auto& x : v.c) m = std::max(m, std::abs(x));
    return m;
}

template <std::size_t N>
Vector<N> normalized(const Vector<N>& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("normalized: zero or non-finite vector");
    return v * (1.0 / n);
}

template <std::size_t N>
bool is_finite(const Vector<N>& v) {
    return std::all_of(v.c.begin(), v.c.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

template <std::size_t R, std::size_t C>
bool is_finite(const Matrix<R, C>& m) {
    return std::all_of(m.e.begin(), m.e.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

template <std::size_t R, std::size_t C>
double frobenius_norm(const Matrix<R, C>& m) {
    double s = 0.0;
    for (const auto& x : m.e) s += std::norm(x);
    return std::sqrt(s);
}

// Eigenvalues of a Hermitian matrix, ascending, by cyclic complex Jacobi
// rotations. Only the upper triangle's Hermitian part is trusted.
template <std::size_t N>
std::array<double, N> hermitian_eigenvalues(Matrix<N, N> a) {
    for (std::size_t i = 0; i < N; ++i) a(i, i) = a(i, i).real();
    double scale = frobenius_norm(a);
    std::array<double, N> out{};
    if (scale == 0.0) return out;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= 1e-17 * scale) break;

        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                const double apq = std::abs(a(p, q));
                if (apq <= 1e-300) continue;
                const Complex phase = a(p, q) / apq;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
                const Complex upp = c;
                const Complex upq = s;
                const Complex uqp = -s * std::conj(phase);
                const Complex uqq = c * std::conj(phase);
                for (std::size_t k = 0; k < N; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * upp + akq * uqp;
                    a(k, q) = akp * upq + akq * uqq;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    for (std::size_t i = 0; i < N; ++i) out[i] = a(i, i).real();
    std::sort(out.begin(), out.end());
    return out;
}

// Singular values, descending, as square roots of the eigenvalues of M*M.
template <std::size_t R, std::size_t C>
std::array<double, C> singular_values(const Matrix<R, C>& m) {
    if (!is_finite(m)) throw InvalidInput("singular_values: non-finite matrix entry");
    auto ev = hermitian_eigenvalues(m.adjoint() * m);
    std::array<double, C> out{};
    for (std::size_t i = 0; i < C; ++i) out[i] = std::sqrt(std::max(0.0, ev[C - 1 - i]));
    return out;
}

// Operator 2-norm: the largest singular value.
template <std::size_t R, std::size_t C>
double op_norm(const Matrix<R, C>& m) {
    if (!is_finite(m)) throw InvalidInput("op_norm: non-finite matrix entry");
    // Rescale first so M*M neither overflows nor underflows.
    double scale = 0.0;
    for (const auto& x : m.e) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    return scale * singular_values(m * (1.0 / scale))[0];
}

inline Complex det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline Mat2 inverse(const Mat2& m) {
    const Complex d = det(m);
    if (d == 0.0) throw InvalidInput("inverse: singular 2x2 matrix");
    return Mat2::from_rows({{m(1, 1) / d, -m(0, 1) / d}, {-m(1, 0) / d, m(0, 0) / d}});
}

inline Vec2 solve(const Mat2& m, const Vec2& rhs) { return inverse(m) * rhs; }

// Eigenvalues of a 2x2 matrix, larger modulus first. Uses the
// cancellation-free quadratic root pairing.
// The determinant can be passed in when it is known more accurately than
// the entries allow (e.g. a product of factor determinants).
inline std::array<Complex, 2> eigenvalues(const Mat2& m, Complex d) {
    const Complex tr = m(0, 0) + m(1, 1);
    const Complex disc = std::sqrt(tr * tr - 4.0 * d);
    Complex q = std::real(std::conj(tr) * disc) >= 0.0 ? -(tr + disc) / 2.0 : -(tr - disc) / 2.0;
    Complex r1;
    Complex r2;
    if (q == 0.0) {
        r1 = r2 = tr / 2.0;
    } else {
        r1 = -q;
        r2 = -d / q;
    }
    if (std::abs(r2) > std::abs(r1)) std::swap(r1, r2);
    return {r1, r2};
}

inline std::array<Complex, 2> eigenvalues(const Mat2& m) { return eigenvalues(m, det(m)); }

// Unit eigenvector for a known eigenvalue of a 2x2 matrix.
inline Vec2 eigenvector(const Mat2& m, Complex mu) {
    // Rows of (M - mu I) are orthogonal-complement witnesses; pick the larger one.
    const Vec2 a{m(0, 1), mu - m(0, 0)};
    const Vec2 b{mu - m(1, 1), m(1, 0)};
    const Vec2& v = norm(a) >= norm(b) ? a : b;
    if (norm(v) == 0.0) return Vec2{1.0, 0.0};
    return normalized(v);
}

// Hermitian principal angle between the complex lines spanned by a and b, in [0, pi/2].
template <std::size_t N>
double line_angle(const Vector<N>& a, const Vector<N>& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw InvalidInput("line_angle: zero vector");
    const double c = std::min(1.0, std::abs(dot(a, b)) / (na * nb));
    // acos loses accuracy near 0; use the sine of the angle there.
    const Vector<N> ua = a * (1.0 / na);
    const Vector<N> ub = b * (1.0 / nb);
    const Vector<N> perp = ub - ua * dot(ua, ub);
    const double s = std::min(1.0, norm(perp));
    return std::atan2(s, c);
}

}  // namespace cuhyp
