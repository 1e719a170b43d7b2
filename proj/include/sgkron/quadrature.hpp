#pragma once

#include <sgkron/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace sgkron {

/// Nodes and weights of a Gauss rule normalized to a probability measure.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Classical three-term recurrences, independent of the orthonormal coefficients used elsewhere.
inline std::pair<double, double> legendre_and_derivative(int n, double x)
{
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int j = 1; j < n; ++j) {
        const double p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

inline std::pair<double, double> hermite_prob_and_derivative(int n, double x)
{
    double h0 = 1.0;
    double h1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int j = 1; j < n; ++j) {
        const double h2 = x * h1 - j * h0;
        h0 = h1;
        h1 = h2;
    }
    return {h1, n * h0};
}

} // namespace detail

/// n-point Gauss-Legendre rule for the uniform density on [-1, 1].
inline GaussRule gauss_legendre(int n)
{
    detail::require(n >= 1 && n <= 200, "gauss_legendre: n must lie in [1, 200]");
    GaussRule rule{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = detail::legendre_and_derivative(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [p, dp] = detail::legendre_and_derivative(n, x);
        (void)p;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        // weight for dx on [-1,1] is 2/((1-x^2) P'^2); halve for the probability density
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// n-point Gauss-Hermite rule for the standard normal density.
inline GaussRule gauss_hermite(int n)
{
    detail::require(n >= 1 && n <= 100, "gauss_hermite: n must lie in [1, 100]");
    GaussRule rule{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
    // Newton with Maehly deflation, sweeping the real roots from the right; each start lies
    // to the right of the next root, so the iteration is monotone.
    std::vector<double> found;
    const double log_nfact = std::lgamma(n + 1.0);
    double x = std::sqrt(4.0 * n + 2.0) + 1.0;
    for (int i = 0; i < n; ++i) {
        for (int it = 0; it < 500; ++it) {
            const auto [h, dh] = detail::hermite_prob_and_derivative(n, x);
            double corr = 0.0;
            for (double r : found) corr += 1.0 / (x - r);
            const double dx = h / (dh - h * corr);
            x -= dx;
            if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        found.push_back(x);
        x -= 1e-6;
    }
    for (int i = 0; i < n; ++i) {
        const double x = found[static_cast<std::size_t>(i)];
        const auto [h, dh] = detail::hermite_prob_and_derivative(n - 1, x);
        (void)dh;
        // w = n! / (n^2 He_{n-1}(x)^2) for the standard normal density
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = std::exp(log_nfact - 2.0 * std::log(static_cast<double>(n)) - 2.0 * std::log(std::abs(h)));
    }
    return rule;
}

/// Orthonormal Legendre polynomial from the classical recurrence: sqrt(2n+1) P_n(y).
inline double legendre_orthonormal_classical(int n, double y)
{
    return std::sqrt(2.0 * n + 1.0) * detail::legendre_and_derivative(n, y).first;
}

/// Orthonormal Hermite polynomial from the classical recurrence: He_n(y) / sqrt(n!).
inline double hermite_orthonormal_classical(int n, double y)
{
    return detail::hermite_prob_and_derivative(n, y).first / std::sqrt(std::tgamma(n + 1.0));
}

} // namespace sgkron
