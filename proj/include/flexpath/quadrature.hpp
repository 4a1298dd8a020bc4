#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace flexpath {

struct QuadratureRule {
    std::vector<double> points;  // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 2n - 1.
inline QuadratureRule gauss_legendre(int n)
{
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p_cur = 1.0;
            double p_prev = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p_old = p_prev;
                p_prev = p_cur;
                p_cur = ((2.0 * k - 1.0) * x * p_prev - (k - 1.0) * p_old) / k;
            }
            dp = n * (x * p_cur - p_prev) / (x * x - 1.0);
            const double dx = p_cur / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = -x;
        rule.points[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Golden-section search for the maximum of a unimodal f on [a, b].
/// Returns the abscissa of the best point visited.
inline double golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                      double tolerance)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (std::abs(b - a) > tolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

} // namespace flexpath
