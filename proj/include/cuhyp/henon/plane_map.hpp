#pragma once

#include <cmath>
#include <concepts>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"

namespace cuhyp {

// Invertible holomorphic self-map of C^2 with an analytic Jacobian.
template <class M>
concept PlaneMap = requires(const M& m, const Vec2& z) {
    { m.apply(z) } -> std::same_as<Vec2>;
    { m.apply_inverse(z) } -> std::same_as<Vec2>;
    { m.jacobian(z) } -> std::same_as<Mat2>;
    { m.jacobian_modulus() } -> std::convertible_to<double>;
};

// Iterates past this magnitude are treated as escaped to infinity.
inline constexpr double kEscapeCap = 1e150;

inline bool overflowed(const Vec2& z) {
    return !is_finite(z) || max_abs(z) > kEscapeCap;
}

template <PlaneMap M>
Vec2 iterate(const M& f, Vec2 z, int n) {
    for (int i = 0; i < n; ++i) z = f.apply(z);
    for (int i = 0; i > n; --i) z = f.apply_inverse(z);
    return z;
}

// Derivative of f^{-1} at z.
template <PlaneMap M>
Mat2 inverse_jacobian(const M& f, const Vec2& z) {
    return inverse(f.jacobian(f.apply_inverse(z)));
}

// Points x_m = f^m(x0) for m in [m_minus, m_plus] with Df at each point.
struct OrbitSegment {
    int m_minus = 0;
    int m_plus = 0;
    std::vector<Vec2> points;
    std::vector<Mat2> jacobians;

    const Vec2& at(int m) const { return points[static_cast<std::size_t>(m - m_minus)]; }
    const Mat2& jacobian_at(int m) const { return jacobians[static_cast<std::size_t>(m - m_minus)]; }
    std::size_t size() const { return points.size(); }
};

template <PlaneMap M>
OrbitSegment make_orbit_segment(const M& f, const Vec2& x0, int m_minus, int m_plus) {
    if (m_minus > 0 || m_plus < 0) throw InvalidInput("make_orbit_segment: window must contain 0");
    OrbitSegment seg;
    seg.m_minus = m_minus;
    seg.m_plus = m_plus;
    seg.points.resize(static_cast<std::size_t>(m_plus - m_minus + 1));
    seg.points[static_cast<std::size_t>(-m_minus)] = x0;
    for (int m = -1; m >= m_minus; --m)
        seg.points[static_cast<std::size_t>(m - m_minus)] = f.apply_inverse(seg.at(m + 1));
    for (int m = 1; m <= m_plus; ++m)
        seg.points[static_cast<std::size_t>(m - m_minus)] = f.apply(seg.at(m - 1));
    for (const auto& p : seg.points)
        if (overflowed(p)) throw InvalidInput("make_orbit_segment: orbit leaves every bounded region");
    seg.jacobians.reserve(seg.points.size());
    for (const auto& p : seg.points) seg.jacobians.push_back(f.jacobian(p));
    return seg;
}

// Largest relative defect |f(x_m) - x_{m+1}| and ||det Df| - b| along a segment.
template <PlaneMap M>
std::pair<double, double> verify_orbit_segment(const M& f, const OrbitSegment& seg) {
    double step = 0.0;
    double detdef = 0.0;
    const double b = f.jacobian_modulus();
    for (int m = seg.m_minus; m < seg.m_plus; ++m) {
        const Vec2 next = seg.at(m + 1);
        step = std::max(step, norm(f.apply(seg.at(m)) - next) / std::max(1.0, norm(next)));
    }
    for (const auto& j : seg.jacobians) detdef = std::max(detdef, std::abs(std::abs(det(j)) - b));
    return {step, detdef};
}

}  // namespace cuhyp
