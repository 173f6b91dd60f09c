// Quadrature rules used by the single-spin integrals: Gauss-Legendre on
// [-1, 1] (polar angle on the 2-sphere) and the periodic trapezoid rule on
// the circle, which is spectrally accurate for smooth periodic integrands.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lsicert {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// Nodes are roots of the Legendre polynomial P_k, found by Newton iteration
// from the Chebyshev-like initial guess; weights w_i = 2 / ((1-x^2) P_k'^2).
inline QuadratureRule gauss_legendre(int k) {
    if (k < 1) throw std::invalid_argument("gauss_legendre: order < 1");
    QuadratureRule rule;
    rule.nodes.resize(k);
    rule.weights.resize(k);
    const int half = (k + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // recurrence for P_k(x) and derivative
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = k * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[k - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[k - 1 - i] = w;
    }
    if (k % 2 == 1) rule.nodes[half - 1] = 0.0;
    return rule;
}

// Equispaced nodes on [0, 2*pi), uniform weights 2*pi/k.
inline QuadratureRule periodic_trapezoid(int k) {
    if (k < 1) throw std::invalid_argument("periodic_trapezoid: order < 1");
    QuadratureRule rule;
    rule.nodes.resize(k);
    rule.weights.assign(k, 2.0 * std::numbers::pi / k);
    for (int i = 0; i < k; ++i)
        rule.nodes[i] = 2.0 * std::numbers::pi * i / k;
    return rule;
}

}  // namespace lsicert
