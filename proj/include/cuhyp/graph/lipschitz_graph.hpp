#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cuhyp/core/errors.hpp"
#include "cuhyp/core/linalg.hpp"

namespace cuhyp {

// phi(z) = sum_{j=1..D} a_j z^j on the disc |z| < radius.
struct LipschitzGraph {
    std::vector<Complex> a{0.0};  // a[0] is kept at 0
    double radius = 1.0;
    double gamma_hat = 0.0;  // max |phi'| on the boundary circle

    // Diagnostics from the step that produced this graph.
    double inversion_residual = 0.0;
    double tail = 0.0;
    bool degree_warning = false;

    int degree() const { return static_cast<int>(a.size()) - 1; }

    Complex operator()(Complex z) const {
        Complex s = 0.0;
        for (std::size_t i = a.size(); i-- > 0;) s = s * z + a[i];
        return s;
    }

    Complex derivative(Complex z) const {
        Complex s = 0.0;
        for (std::size_t i = a.size(); i-- > 1;) s = s * z + static_cast<double>(i) * a[i];
        return s;
    }

    static LipschitzGraph from_coefficients(std::vector<Complex> c, double radius) {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("LipschitzGraph: radius must be positive");
        if (c.empty()) c.push_back(0.0);
        for (const auto& v : c)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw InvalidInput("LipschitzGraph: non-finite coefficient");
        LipschitzGraph g;
        g.a = std::move(c);
        g.a[0] = 0.0;
        g.radius = radius;
        g.gamma_hat = g.boundary_lipschitz();
        return g;
    }

    static LipschitzGraph zero(int degree, double radius) {
        return from_coefficients(std::vector<Complex>(static_cast<std::size_t>(std::max(degree, 1)) + 1, 0.0), radius);
    }

    // max |phi'| over 256 points of |z| = radius; by the maximum principle
    // this bounds |phi'| on the disc up to sampling.
    double boundary_lipschitz(int samples = 256) const {
        double m = 0.0;
        for (int k = 0; k < samples; ++k) {
            const Complex z = std::polar(radius, 2.0 * M_PI * k / samples);
            m = std::max(m, std::abs(derivative(z)));
        }
        return m;
    }
};

}  // namespace cuhyp
