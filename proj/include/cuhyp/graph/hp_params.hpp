#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cuhyp/core/errors.hpp"

namespace cuhyp {

// Hadamard-Perron parameters: cocycle bounds |B_m| <= lambda, |A_m^{-1}| <=
// 1/mu, cone slope gamma, nonlinearity size delta and localization radius R.
struct HPParams {
    double lambda = 0.0;
    double mu = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    double radius = 0.0;

    double lambda_prime() const { return (1.0 + gamma) * (lambda + delta * (1.0 + gamma)); }
    double mu_prime() const { return mu / (1.0 + gamma) - delta; }
    double lambda0_claim1() const { return lambda + 2.0 * delta; }
    double mu0_prop() const { return mu - delta * (1.0 + gamma); }

    static double gamma_bound(double lambda, double mu) {
        return std::min(1.0, std::sqrt(mu / lambda) - 1.0);
    }

    static double delta_bound(double lambda, double mu, double gamma) {
        const double g1 = 1.0 + gamma;
        const double a = (mu - lambda) / (gamma + 2.0 + 1.0 / gamma);
        const double b = (mu - g1 * g1 * lambda) / (g1 * (gamma * gamma + 2.0 * gamma + 2.0));
        return std::min(a, b);
    }

    // Empty when admissible, otherwise the first violated condition.
    std::string violation() const {
        if (!(lambda >= 0.0) || !(mu > 0.0)) return "need lambda >= 0 and mu > 0";
        if (!(radius > 0.0)) return "need R > 0";
        if (!(delta >= 0.0)) return "need delta >= 0";
        if (lambda == 0.0) {
            if (!(gamma > 0.0 && gamma < 1.0)) return "gamma outside (0, 1)";
        } else if (!(gamma > 0.0 && gamma < gamma_bound(lambda, mu))) {
            return "gamma outside (0, min(1, sqrt(mu/lambda) - 1))";
        }
        if (!(delta < delta_bound(lambda, mu, gamma))) return "delta above the admissible bound";
        if (!(lambda_prime() < mu_prime())) return "lambda' >= mu'";
        return {};
    }

    bool admissible() const { return violation().empty(); }

    // Half the largest admissible cone slope.
    static double default_gamma(double lambda, double mu) {
        if (lambda == 0.0) return 0.5;
        return 0.5 * gamma_bound(lambda, mu);
    }
};

inline void require_admissible(const HPParams& p) {
    const auto v = p.violation();
    if (!v.empty()) throw ParamsViolated("HPParams: " + v);
}

}  // namespace cuhyp
