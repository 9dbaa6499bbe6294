#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bergman/extremize.hpp"
#include "bergman/generators.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

const SpaceParams kP12 = SpaceParams::make(1, 2.0);

McConfig cfg_of(std::uint64_t seed, std::size_t n = 20000) {
    McConfig cfg;
    cfg.n_samples = n;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("coherence diagnostic") {
    // coherent state: maximum 1 at the center, full overlap
    const Point z0 = make_point({complexd(0.35, -0.2)});
    const CoherentState cs(kP12, z0, 0.4);
    const auto d = coherence_diagnostic(cs);
    CHECK(d.sup_u >= 1.0 - 1e-9);
    CHECK(d.sup_u <= 1.0 + 1e-12);
    CHECK(d.overlap >= 1.0 - 1e-6);
    CHECK(std::fabs(d.g_prime_proxy) <= 1e-9);
    CHECK(std::abs(d.z0_fit[0] - z0[0]) < 1e-4);

    // the constant 1 is the coherent state at the origin
    const auto ground = PolyFunction::constant(kP12, 1.0);
    const auto d2 = coherence_diagnostic(ground);
    CHECK(d2.sup_u >= 1.0 - 1e-9);
    CHECK(d2.overlap >= 1.0 - 1e-6);
    CHECK(d2.z0_fit.norm_sq() < 1e-6);

    // z/sqrt(0.5): sup u = 8/27 (1D calculus), overlap strictly below 1
    const PolyFunction f(kP12, {{make_multi_index({1}), complexd(std::sqrt(2.0), 0.0)}});
    const auto d3 = coherence_diagnostic(f);
    CHECK(d3.sup_u == doctest::Approx(8.0 / 27.0).epsilon(1e-6));
    CHECK(d3.overlap == doctest::Approx(8.0 / 27.0).epsilon(1e-5));
    CHECK(d3.overlap < 1.0);
    CHECK(d3.g_prime_proxy < -0.5);
}

TEST_CASE("polish maximum climbs to the interior maximum") {
    const CoherentState cs(kP12, make_point({complexd(-0.4, 0.25)}));
    const auto [z, u] = polish_maximum(cs, Point::origin(1));
    CHECK(u >= 1.0 - 1e-9);
    CHECK(std::abs(z[0] - cs.center()[0]) < 1e-4);

    // the zero function stays put
    const auto [z2, u2] = polish_maximum(PolyFunction::zero(kP12), make_point({0.3}));
    CHECK(u2 == 0.0);
    CHECK(std::abs(z2[0] - 0.3) < 1e-12);
}

TEST_CASE("saa problem construction") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 6, cfg_of(1, 4000));
    CHECK(prob.basis.size() == 7);
    CHECK(prob.gram[0] == doctest::Approx(1.0));
    CHECK(prob.gram[1] == doctest::Approx(0.5));
    CHECK(prob.design.size() == prob.plan.size() * prob.basis.size());

    // the unit-sphere normalization uses the exact Gram
    std::vector<complexd> c(7, complexd(0.4, -0.3));
    prob.normalize(c);
    CHECK(prob.constraint_norm_sq(c) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(SaaProblem::build(kP12, ConvexProbe::power(2.0), -1, cfg_of(1, 4000)),
                    std::invalid_argument);
}

TEST_CASE("analytic gradient matches finite differences for every probe") {
    for (const auto& probe :
         {ConvexProbe::power(2.0), ConvexProbe::power(1.5), ConvexProbe::hinge(0.3),
          ConvexProbe::xlogx()}) {
        const auto prob = SaaProblem::build(kP12, probe, 4, cfg_of(2, 2000));
        std::vector<complexd> c(prob.basis.size());
        CounterRng rng(5, 0);
        for (auto& v : c) v = complexd(rng.next_normal(), rng.next_normal());
        prob.normalize(c);
        const auto [f0, grad] = prob.objective_and_gradient(c);
        CHECK(std::isfinite(f0));
        const double h = 1e-5;
        for (std::size_t m = 0; m < c.size(); ++m) {
            for (int part = 0; part < 2; ++part) {
                auto cp = c, cm = c;
                const complexd d = part == 0 ? complexd(h, 0.0) : complexd(0.0, h);
                cp[m] += d;
                cm[m] -= d;
                const double fd = (prob.objective(cp) - prob.objective(cm)) / (2.0 * h);
                const double an = part == 0 ? grad[m].real() : grad[m].imag();
                CHECK(std::fabs(fd - an) <= 1e-5 * (1.0 + std::fabs(an)));
            }
        }
    }
}

TEST_CASE("phase quotient: objective invariant under coefficient rotation") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 4, cfg_of(3, 2000));
    std::vector<complexd> c(prob.basis.size());
    CounterRng rng(6, 0);
    for (auto& v : c) v = complexd(rng.next_normal(), rng.next_normal());
    prob.normalize(c);
    // multiplication by i is exact in floating point
    std::vector<complexd> ci(c.size());
    for (std::size_t m = 0; m < c.size(); ++m) ci[m] = complexd(-c[m].imag(), c[m].real());
    CHECK(prob.objective(c) == prob.objective(ci));
}

TEST_CASE("affine probe: the functional is constant and the search stops at once") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(1.0), 4, cfg_of(4, 20000));
    const auto report = saa_maximize(prob, 2, 11);
    for (const auto& st : report.restarts) {
        CHECK(st.first_order_stop);
        CHECK(st.iterations == 0);
    }
    // value = 1/c_alpha up to sample-average noise
    CHECK(report.fresh.mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(report.bound == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degree zero: the only feasible point is the coherent state at 0") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 0, cfg_of(5, 20000));
    const auto report = saa_maximize(prob, 2, 12);
    CHECK(report.basis.size() == 1);
    CHECK(std::fabs(std::norm(report.coefficients[0]) - 1.0) < 1e-12);
    // objective equals the sharp constant up to SAA noise
    CHECK(std::fabs(report.saa_value - report.bound) <= 4.0 * report.fresh.std_error + 5e-3);
    CHECK(report.diagnostic.overlap >= 1.0 - 1e-6);
}

TEST_CASE("monotone ascent and certified bound") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 6, cfg_of(6, 20000));
    const auto report = saa_maximize(prob, 2, 13, /*record_traces=*/true);

    CHECK(report.gradient_gate_passed);
    for (const auto& trace : report.traces) {
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
    }
    // the sharp constant certifies every restart's value up to its noise
    CHECK(report.fresh.mean - 3.0 * report.fresh.std_error <= report.bound);
    for (const auto& st : report.restarts)
        CHECK(st.fresh_value - 3.0 * st.fresh_std_error <= report.bound + 1e-12);
    // restarts = requested + warm start
    CHECK(report.restarts.size() == 3);
    CHECK(report.restarts.back().warm_start);
}

TEST_CASE("power-2 search at degree 6 finds the coherent family") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 6, cfg_of(7, 50000));
    const auto report = saa_maximize(prob, 3, 14);
    CHECK(std::fabs(report.fresh.mean - 1.0 / 3.0) <= 2e-3);
    CHECK(report.diagnostic.overlap >= 0.98);
    CHECK(report.gradient_gate_passed);
    CHECK(report.gap > -3.0 * report.fresh.std_error); // never exceeds the bound
}

TEST_CASE("deterministic reruns") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 4, cfg_of(8, 5000));
    const auto a = saa_maximize(prob, 2, 21);
    const auto b = saa_maximize(prob, 2, 21);
    CHECK(a.fresh.mean == b.fresh.mean);
    CHECK(a.saa_value == b.saa_value);
    for (std::size_t m = 0; m < a.coefficients.size(); ++m)
        CHECK(a.coefficients[m] == b.coefficients[m]);
}

TEST_CASE("objective and gradient are bitwise independent of the worker count") {
    const auto prob = SaaProblem::build(kP12, ConvexProbe::power(2.0), 5, cfg_of(9, 30000));
    std::vector<complexd> c(prob.basis.size());
    CounterRng rng(31, 0);
    for (auto& v : c) v = complexd(rng.next_normal(), rng.next_normal());
    prob.normalize(c);

    setenv("BERGMAN_THREADS", "1", 1);
    const auto [f1, g1] = prob.objective_and_gradient(c);
    setenv("BERGMAN_THREADS", "4", 1);
    const auto [f4, g4] = prob.objective_and_gradient(c);
    unsetenv("BERGMAN_THREADS");

    CHECK(f1 == f4);
    for (std::size_t m = 0; m < g1.size(); ++m) CHECK(g1[m] == g4[m]);
}
