#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "wavecompact/errors.hpp"

namespace wavecompact
{

struct GaussRule
{
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

namespace detail
{

inline GaussRule compute_gauss_legendre(int n)
{
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        // Newton iteration from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1)
            {
                p1 = x;
                p0 = 1;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
        }
        const double w = 2.0 / ((1 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

inline constexpr int max_gauss_points = 64;

}  // namespace detail

//! n-point Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 2n - 1.
inline const GaussRule& gauss_legendre(int n)
{
    detail::require(n >= 1 && n <= detail::max_gauss_points, "gauss_legendre: 1 <= n <= 64");
    static const std::array<GaussRule, detail::max_gauss_points> rules = [] {
        std::array<GaussRule, detail::max_gauss_points> r;
        for (int k = 1; k <= detail::max_gauss_points; ++k) r[k - 1] = detail::compute_gauss_legendre(k);
        return r;
    }();
    return rules[static_cast<std::size_t>(n - 1)];
}

//! Gauss points needed to integrate a polynomial of the given degree exactly.
inline int gauss_points_for_degree(int degree, int minimum = 8)
{
    return std::max(minimum, std::min(detail::max_gauss_points, degree / 2 + 1));
}

template<class F>
double integrate_gauss(F&& f, double a, double b, int n)
{
    const GaussRule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
    {
        s += rule.weights[j] * f(mid + half * rule.nodes[j]);
    }
    return s * half;
}

namespace detail
{

template<class F>
bool adaptive_step(F& f, double a, double b, double whole, int n, int depth, double tol, double& out)
{
    const double m = 0.5 * (a + b);
    const double left = integrate_gauss(f, a, m, n);
    const double right = integrate_gauss(f, m, b, n);
    const double refined = left + right;
    if (std::abs(refined - whole) <= tol)
    {
        out = refined;
        return true;
    }
    if (depth == 0) return false;
    double l = 0, r = 0;
    if (!adaptive_step(f, a, m, left, n, depth - 1, 0.5 * tol, l)) return false;
    if (!adaptive_step(f, m, b, right, n, depth - 1, 0.5 * tol, r)) return false;
    out = l + r;
    return true;
}

}  // namespace detail

/*!
 * Adaptive bisection on top of an n-point Gauss rule. Throws
 * NumericIntegrationError tagged with \p cell when the estimate does not
 * settle within the depth budget.
 */
template<class F>
double integrate_adaptive(F&& f, double a, double b, int n, int cell, double scale = 1.0)
{
    if (a == b) return 0.0;
    const double whole = integrate_gauss(f, a, b, n);
    const double tol = 1e-13 * (b - a) * std::max(1.0, scale);
    double out = 0;
    if (!detail::adaptive_step(f, a, b, whole, n, 40, tol, out))
    {
        throw NumericIntegrationError("adaptive quadrature did not converge", cell);
    }
    return out;
}

}  // namespace wavecompact
