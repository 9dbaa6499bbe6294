#pragma once

// Points of the complex hyperbolic unit ball B_N, the Hermitian inner
// product, Mobius automorphisms, and the correspondence between
// invariant measure, hyperbolic radius and Euclidean radius of balls:
//
//   m(ball of hyperbolic radius rho) = sinh(rho)^{2N},  r_euclid = tanh(rho).

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bergman {

using complexd = std::complex<double>;

class Point {
public:
    // Strictly interior points only: |z|^2 <= 1 - 1e-14.
    explicit Point(std::vector<complexd> coords) : coords_(std::move(coords)) {
        if (coords_.empty()) throw std::invalid_argument("Point: dimension must be >= 1");
        norm_sq_ = 0.0;
        for (const auto& c : coords_) norm_sq_ += std::norm(c);
        if (!(norm_sq_ <= 1.0 - 1e-14))
            throw std::invalid_argument("Point: |z|^2 must be <= 1 - 1e-14");
    }

    static Point origin(int n) {
        return Point(std::vector<complexd>(static_cast<std::size_t>(n), complexd(0.0, 0.0)));
    }

    int dim() const { return static_cast<int>(coords_.size()); }
    const complexd& operator[](std::size_t k) const { return coords_[k]; }
    const std::vector<complexd>& coords() const { return coords_; }
    double norm_sq() const { return norm_sq_; }

private:
    std::vector<complexd> coords_;
    double norm_sq_ = 0.0;
};

inline Point make_point(std::initializer_list<complexd> coords) {
    return Point(std::vector<complexd>(coords));
}

inline complexd hermitian_inner(const Point& z, const Point& w) {
    if (z.dim() != w.dim()) throw std::invalid_argument("hermitian_inner: dimension mismatch");
    complexd s(0.0, 0.0);
    for (int k = 0; k < z.dim(); ++k) s += z[static_cast<std::size_t>(k)] * std::conj(w[static_cast<std::size_t>(k)]);
    return s;
}

// Mobius automorphism of B_N exchanging z0 and the origin. For z0 = 0 it
// is the identity (the continuous limit, up to an irrelevant unitary).
inline Point mobius(const Point& z0, const Point& z) {
    if (z0.dim() != z.dim()) throw std::invalid_argument("mobius: dimension mismatch");
    const double n0 = z0.norm_sq();
    if (n0 == 0.0) return z;

    const complexd a = hermitian_inner(z, z0);
    const double s = std::sqrt(1.0 - n0);
    const complexd denom = complexd(1.0, 0.0) - a;
    const complexd proj_coef = a / n0;

    const std::size_t n = static_cast<std::size_t>(z.dim());
    std::vector<complexd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const complexd pk = proj_coef * z0[k]; // projection of z onto span(z0)
        out[k] = (z0[k] - pk - s * (z[k] - pk)) / denom;
    }

    // The image is interior by construction; rescale only if rounding at
    // extreme radii pushed the coordinates past the constructor band.
    double ns = 0.0;
    for (const auto& c : out) ns += std::norm(c);
    if (ns > 1.0 - 1e-14) {
        const double scale = std::sqrt((1.0 - 1e-13) / ns);
        for (auto& c : out) c *= scale;
    }
    return Point(std::move(out));
}

// Density of the invariant measure dm against normalized volume dv.
inline double invariant_density(const Point& z) {
    const int n1 = z.dim() + 1;
    return std::exp(-static_cast<double>(n1) * std::log1p(-z.norm_sq()));
}

inline double ball_measure_from_radius(double rho, int n) {
    if (rho < 0.0) throw std::invalid_argument("ball_measure_from_radius: rho must be >= 0");
    if (n < 1) throw std::invalid_argument("ball_measure_from_radius: dimension must be >= 1");
    return std::pow(std::sinh(rho), 2.0 * n);
}

struct RadiusPair {
    double hyperbolic; // rho
    double euclidean;  // r = tanh(rho)
};

inline RadiusPair radius_from_measure(double s, int n) {
    if (s < 0.0) throw std::invalid_argument("radius_from_measure: measure must be >= 0");
    if (n < 1) throw std::invalid_argument("radius_from_measure: dimension must be >= 1");
    const double x = std::pow(s, 0.5 / n); // sinh(rho)
    return {std::asinh(x), x / std::sqrt(1.0 + x * x)};
}

// A geodesic ball, determined by its center and invariant measure. The
// Euclidean radius refers to the centered preimage under the Mobius map.
struct BallSpec {
    Point center;
    double measure;
    double hyperbolic_radius;
    double euclidean_radius;

    static BallSpec from_measure(Point center, double s) {
        const auto r = radius_from_measure(s, center.dim());
        return {std::move(center), s, r.hyperbolic, r.euclidean};
    }

    static BallSpec from_hyperbolic_radius(Point center, double rho) {
        const double s = ball_measure_from_radius(rho, center.dim());
        const auto r = radius_from_measure(s, center.dim());
        return {std::move(center), s, r.hyperbolic, r.euclidean};
    }

    bool contains(const Point& z) const {
        if (center.norm_sq() == 0.0)
            return z.norm_sq() < euclidean_radius * euclidean_radius;
        return mobius(center, z).norm_sq() < euclidean_radius * euclidean_radius;
    }
};

} // namespace bergman
