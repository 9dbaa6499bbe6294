#pragma once

// Counter-based random streams. Every Monte Carlo sample owns an
// independent stream keyed by (seed, sample index), so estimates do not
// depend on how samples are scheduled across workers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace bergman {

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t index) {
        state_ = avalanche(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
        state_ = avalanche(state_ + index);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return avalanche(state_);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1); never returns an endpoint.
    double next_open() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    // Standard normal via Box-Muller; the second value is cached.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 boosted through
    // Gamma(shape+1) * U^{1/shape}.
    double next_gamma(double shape) {
        if (shape < 1.0) {
            const double g = next_gamma(shape + 1.0);
            return g * std::pow(next_open(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double next_beta(double a, double b) {
        const double x = next_gamma(a);
        const double y = next_gamma(b);
        return x / (x + y);
    }

    // Uniform direction on the unit sphere of C^n.
    std::vector<std::complex<double>> next_complex_direction(int n) {
        std::vector<std::complex<double>> dir(static_cast<std::size_t>(n));
        double nrm = 0.0;
        do {
            nrm = 0.0;
            for (auto& c : dir) {
                c = {next_normal(), next_normal()};
                nrm += std::norm(c);
            }
        } while (nrm <= 0.0);
        const double inv = 1.0 / std::sqrt(nrm);
        for (auto& c : dir) c *= inv;
        return dir;
    }

private:
    static std::uint64_t avalanche(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace bergman
