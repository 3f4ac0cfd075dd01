#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"

namespace cuhyp {

// Square unitary matrix whose first `split` columns span the marked subspace.
template <std::size_t N>
struct UnitaryFrame {
    Matrix<N, N> q = Matrix<N, N>::identity();
    std::size_t split = 1;

    Vector<N> column(std::size_t j) const { return q.column(j); }
    Vector<N> to_frame(const Vector<N>& v) const { return q.adjoint() * v; }
    Vector<N> from_frame(const Vector<N>& h) const { return q * h; }

    // Frobenius norm of Q*Q - I.
    double unitarity_defect() const {
        return frobenius_norm(q.adjoint() * q - Matrix<N, N>::identity());
    }
};

// Unitary completion of a single direction. Column 0 is direction/|direction|;
// the rest come from Gram-Schmidt (with one re-orthogonalisation pass) over
// the standard basis, taking at each stage the candidate with the largest
// residual.
template <std::size_t N>
UnitaryFrame<N> orthonormal_frame(const Vector<N>& direction) {
    if (!is_finite(direction)) throw InvalidInput("orthonormal_frame: non-finite direction");
    if (norm(direction) == 0.0) throw InvalidInput("orthonormal_frame: zero direction");

    std::array<Vector<N>, N> cols{};
    cols[0] = normalized(direction);
    std::array<bool, N> used{};

    for (std::size_t k = 1; k < N; ++k) {
        double best = -1.0;
        std::size_t best_i = 0;
        Vector<N> best_v;
        for (std::size_t i = 0; i < N; ++i) {
            if (used[i]) continue;
            Vector<N> v;
            v[i] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t j = 0; j < k; ++j) v -= cols[j] * dot(cols[j], v);
            const double n = norm(v);
            if (n > best) {
                best = n;
                best_i = i;
                best_v = v;
            }
        }
        used[best_i] = true;
        cols[k] = best_v * (1.0 / best);
    }

    UnitaryFrame<N> f;
    f.q = Matrix<N, N>::from_columns(cols);
    f.split = 1;
    return f;
}

// Open polydisc: product of discs |z_i - c_i| < r_i.
struct Polydisc {
    std::vector<Complex> center;
    std::vector<double> radii;

    Polydisc() = default;
    Polydisc(std::vector<Complex> c, std::vector<double> r) : center(std::move(c)), radii(std::move(r)) {
        if (center.size() != radii.size()) throw InvalidInput("Polydisc: center/radii dimension mismatch");
        for (double x : radii)
            if (!(x > 0.0) || !std::isfinite(x)) throw InvalidInput("Polydisc: radii must be positive and finite");
    }

    static Polydisc centered(std::vector<double> r) {
        std::vector<Complex> c(r.size(), 0.0);
        return Polydisc(std::move(c), std::move(r));
    }

    std::size_t dim() const { return radii.size(); }
};

inline bool kobayashi_membership(const Polydisc& d, std::span<const Complex> z) {
    if (z.size() != d.dim()) throw InvalidInput("kobayashi_membership: dimension mismatch");
    for (std::size_t i = 0; i < z.size(); ++i)
        if (!(std::abs(z[i] - d.center[i]) < d.radii[i])) return false;
    return true;
}

template <std::size_t N>
bool kobayashi_membership(const Polydisc& d, const Vector<N>& z) {
    return kobayashi_membership(d, std::span<const Complex>(z.c.data(), N));
}

}  // namespace cuhyp
