#pragma once

// Seeded generators for test functions: random unit-norm polynomials,
// random interior points, and random mixed states.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "bergman/rng.hpp"
#include "bergman/space.hpp"

namespace bergman {

inline Point random_interior_point(int n, std::uint64_t seed, double max_radius = 0.7) {
    CounterRng rng(seed, 0x9017u);
    auto dir = rng.next_complex_direction(n);
    const double r = max_radius * std::pow(rng.next_open(), 1.0 / (2.0 * n));
    for (auto& c : dir) c *= r;
    return Point(std::move(dir));
}

// Dense complex-Gaussian coefficients on the full basis up to `degree`,
// normalized to unit Bergman norm.
inline PolyFunction random_unit_poly(const SpaceParams& params, int degree, std::uint64_t seed) {
    CounterRng rng(seed, 0x4B1Du);
    PolyFunction::CoeffMap coeffs;
    for (const auto& m : multi_indices_up_to(params.n, degree))
        coeffs.emplace(m, complexd(rng.next_normal(), rng.next_normal()));
    PolyFunction f(params, std::move(coeffs));
    return f.scaled(complexd(1.0 / std::sqrt(f.norm_sq()), 0.0));
}

inline MixedState random_mixed_state(const SpaceParams& params, int degree, int rank,
                                     std::uint64_t seed) {
    std::vector<PolyFunction> states;
    states.reserve(static_cast<std::size_t>(rank));
    for (int i = 0; i < rank; ++i)
        states.push_back(random_unit_poly(params, degree, seed + 101u * static_cast<std::uint64_t>(i) + 1u));
    CounterRng rng(seed, 0x3A7Fu);
    std::vector<double> weights(static_cast<std::size_t>(rank));
    for (auto& w : weights) w = 0.05 + rng.next_open();
    return MixedState(std::move(weights), std::move(states));
}

} // namespace bergman
