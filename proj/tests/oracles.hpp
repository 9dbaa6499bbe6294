#pragma once

// Test-side oracles, kept independent of the library's integration paths:
// a composite Simpson integrator, digamma, a quadrature-based regularized
// incomplete beta, and the closed forms used to freeze expected values.

#include <cmath>
#include <stdexcept>

namespace oracle {

// Composite Simpson on [a,b]; n is rounded up to an even panel count.
template <class F>
double simpson(const F& f, double a, double b, int n = 20000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double digamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x, inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
    return result;
}

// Regularized incomplete beta by direct quadrature (a >= 1 assumed, so the
// integrand is bounded on [0, x] for x < 1).
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a >= 1.0)) throw std::invalid_argument("oracle::reg_inc_beta needs a >= 1");
    auto f = [&](double t) {
        if (t <= 0.0) return a == 1.0 ? std::pow(1.0 - t, b - 1.0) : 0.0;
        return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0);
    };
    const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return simpson(f, 0.0, x, 40000) * std::exp(-lb);
}

// ---------------------------------------------------------------------------
// Closed forms for the ground state u(z) = (1-|z|^2)^alpha.

inline double ground_mu(double t, int n, double alpha) {
    return std::pow(std::pow(t, -1.0 / alpha) - 1.0, n);
}

inline double ground_u_star(double s, int n, double alpha) {
    return std::pow(1.0 + std::pow(s, 1.0 / n), -alpha);
}

// invariant measure of the Euclidean ball of radius r
inline double ball_measure_euclid(double r, int n) {
    return std::pow(r * r / (1.0 - r * r), n);
}

inline double c_alpha(int n, double alpha) {
    return std::exp(std::lgamma(alpha) - std::lgamma(n + 1.0) - std::lgamma(alpha - n));
}

// Sharp constant for the power probe: N Beta(p alpha - N, N) = 1/c_{p alpha}.
inline double sharp_constant_power(double p, int n, double alpha) {
    return 1.0 / c_alpha(n, p * alpha);
}

// Sharp constant for the s*ln(s) probe:
//   N alpha int_0^1 x^{alpha-N-1} (1-x)^{N-1} ln x dx
//     = (alpha / c_alpha) (psi(alpha-N) - psi(alpha)).
inline double sharp_constant_xlogx(int n, double alpha) {
    return alpha / c_alpha(n, alpha) * (digamma(alpha - n) - digamma(alpha));
}

} // namespace oracle
