#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace ehsc::quadrature {

template <int N> struct GaussLegendreRule {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};
};

// Roots of P_N by Newton iteration from the Chebyshev-like initial guess.
template <int N> GaussLegendreRule<N> make_gauss_legendre() {
    GaussLegendreRule<N> rule;
    for (int i = 0; i < (N + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= N; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = N * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[N - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[N - 1 - i] = w;
    }
    return rule;
}

inline const GaussLegendreRule<64>& gauss_legendre_64() {
    static const GaussLegendreRule<64> rule = make_gauss_legendre<64>();
    return rule;
}

/// Integral of f over [lo, hi] by 64-point Gauss-Legendre.
template <class F> double integrate(F&& f, double lo, double hi) {
    const auto& rule = gauss_legendre_64();
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

} // namespace ehsc::quadrature
