#pragma once

// Scalar special-function helpers shared across the toolkit: log-gamma
// ratios and the regularized incomplete beta function with its inverse.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bergman {

// Gamma(a)/Gamma(b) through log-gamma, avoiding overflow for the
// parameter ranges used here (alpha <= 50, dimension <= 4).
inline double gamma_ratio(double a, double b) {
    return std::exp(std::lgamma(a) - std::lgamma(b));
}

inline double log_factorial(int n) {
    return std::lgamma(static_cast<double>(n) + 1.0);
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-15;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a,b).
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("reg_inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(-log_beta(a, b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * detail::beta_cf(a, b, x) / a;
    return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Inverse of I_x(a,b) in x for p in [0,1]; Newton with bisection safeguard.
inline double reg_inc_beta_inv(double a, double b, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    double x = a / (a + b);
    const double lb = log_beta(a, b);
    for (int it = 0; it < 100; ++it) {
        const double f = reg_inc_beta(a, b, x) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double logpdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb;
        double step = f / std::exp(logpdf);
        double xn = x - step;
        if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) < 1e-16 * (1.0 + std::fabs(x))) { x = xn; break; }
        x = xn;
    }
    return x;
}

} // namespace bergman
