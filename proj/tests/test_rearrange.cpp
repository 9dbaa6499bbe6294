#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bergman/generators.hpp"
#include "bergman/rearrange.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

McConfig big_cfg(std::uint64_t seed) {
    McConfig cfg;
    cfg.n_samples = 200000;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("distribution function of the ground state") {
    const auto p12 = SpaceParams::make(1, 2.0);
    const auto ground12 = PolyFunction::constant(p12, 1.0);
    const LevelProfile prof12(ground12, SamplePlan::build(p12, big_cfg(41)));

    // closed form: mu(t) = (t^{-1/alpha} - 1)^N; equals 1 at t = 0.25
    const Estimate m = prof12.mu(0.25);
    CHECK(oracle::ground_mu(0.25, 1, 2.0) == doctest::Approx(1.0));
    CHECK(std::fabs(m.mean - 1.0) <= 3.0 * m.std_error);

    const auto p23 = SpaceParams::make(2, 3.0);
    const auto ground23 = PolyFunction::constant(p23, 1.0);
    const LevelProfile prof23(ground23, SamplePlan::build(p23, big_cfg(42)));
    const Estimate m2 = prof23.mu(0.125);
    CHECK(oracle::ground_mu(0.125, 2, 3.0) == doctest::Approx(1.0));
    CHECK(std::fabs(m2.mean - 1.0) <= 3.0 * m2.std_error);

    // a second closed-form level
    const Estimate m3 = prof12.mu(0.5);
    CHECK(std::fabs(m3.mean - oracle::ground_mu(0.5, 1, 2.0)) <= 3.0 * m3.std_error);

    CHECK_THROWS_AS(prof12.mu(0.0), std::invalid_argument);
    CHECK_THROWS_AS(prof12.mu(-0.1), std::invalid_argument);
}

TEST_CASE("empty superlevel set above the maximum") {
    const auto p = SpaceParams::make(1, 2.0);
    const PolyFunction z(p, {{make_multi_index({1}), complexd(std::sqrt(2.0), 0.0)}});
    // sup u = 8/27 < 0.5
    const LevelProfile prof(z, SamplePlan::build(p, big_cfg(5)));
    const Estimate m = prof.mu(0.5);
    CHECK(m.mean == 0.0);
    CHECK(m.std_error == 0.0);
    CHECK(prof.sup_sampled() <= 8.0 / 27.0 + 1e-12);
}

TEST_CASE("decreasing rearrangement") {
    const auto p12 = SpaceParams::make(1, 2.0);
    const auto ground = PolyFunction::constant(p12, 1.0);
    const LevelProfile prof(ground, SamplePlan::build(p12, big_cfg(43)));

    // u*(s) = (1 + s^{1/N})^{-alpha}: 0.25 at s = 1
    CHECK(oracle::ground_u_star(1.0, 1, 2.0) == doctest::Approx(0.25));
    CHECK(prof.u_star(1.0) == doctest::Approx(0.25).epsilon(0.02));

    // u*(0) is the sampled supremum; 1 for coherent states
    const CoherentState cs(p12, make_point({complexd(0.35, 0.2)}));
    const LevelProfile prof_cs(cs, SamplePlan::build(p12, big_cfg(44)));
    CHECK(prof_cs.u_star(0.0) == prof_cs.sup_sampled());
    CHECK(prof_cs.u_star(0.0) >= 1.0 - 1e-3);

    const auto p23 = SpaceParams::make(2, 3.0);
    const auto ground23 = PolyFunction::constant(p23, 1.0);
    const LevelProfile prof23(ground23, SamplePlan::build(p23, big_cfg(45)));
    CHECK(oracle::ground_u_star(1.0, 2, 3.0) == doctest::Approx(0.125));
    CHECK(prof23.u_star(1.0) == doctest::Approx(0.125).epsilon(0.02));

    CHECK_THROWS_AS(prof.u_star(-1.0), std::invalid_argument);
}

TEST_CASE("superlevel integral") {
    const auto p = SpaceParams::make(1, 2.0);
    const auto ground = PolyFunction::constant(p, 1.0);
    const LevelProfile prof(ground, SamplePlan::build(p, big_cfg(46)));

    const Estimate zero = prof.superlevel_integral(0.0);
    CHECK(zero.mean == 0.0);

    // I(s) = J(s) = s/(1+s) for the extremizer at (1,2)
    const Estimate at1 = prof.superlevel_integral(1.0);
    CHECK(std::fabs(at1.mean - 0.5) <= 3.0 * at1.std_error);

    // total-mass identity: c_alpha lim I = ||f||^2 (= 1 here, c = 1)
    const Estimate tail = prof.superlevel_integral(1e4);
    CHECK(std::fabs(tail.mean - 1.0) <= std::max(3.0 * tail.std_error, 2e-3));

    // beyond the tabulated mass the level pins at the floor with a warning
    const auto truncated = prof.u_star_checked(1e12);
    CHECK(truncated.truncated);
    CHECK(truncated.value == LevelProfile::kLevelFloor);
}

TEST_CASE("inversion consistency") {
    const auto p = SpaceParams::make(1, 2.0);
    const PolyFunction f = random_unit_poly(p, 4, 7);
    const LevelProfile prof(f, SamplePlan::build(p, big_cfg(47)));
    for (double s : {0.1, 1.0, 10.0}) {
        const double t = prof.u_star(s);
        const Estimate m = prof.mu(t);
        CHECK(std::fabs(m.mean - s) <= std::max(3.0 * m.std_error, 0.05 * s));
    }
}

TEST_CASE("derivative of the superlevel integral is the rearrangement") {
    McConfig cfg = big_cfg(48);
    for (const auto& [n, alpha] : std::vector<std::pair<int, double>>{{1, 2.0}, {2, 3.0}}) {
        const auto p = SpaceParams::make(n, alpha);
        for (std::uint64_t s_idx = 0; s_idx < 2; ++s_idx) {
            const PolyFunction f = random_unit_poly(p, 4, 300 + s_idx);
            const LevelProfile prof(f, SamplePlan::build(p, cfg));
            for (double s : {0.5, 1.0, 2.0}) {
                const double h = 0.2 * s;
                const Estimate ip = prof.superlevel_integral(s + h);
                const Estimate im = prof.superlevel_integral(s - h);
                const double fd = (ip.mean - im.mean) / (2.0 * h);
                const double us = prof.u_star(s);
                const double sigma_fd =
                    std::sqrt(ip.std_error * ip.std_error + im.std_error * im.std_error) /
                    (2.0 * h);
                // curvature allowance from the second difference
                const double u2 = (prof.u_star(s + h) - 2.0 * us + prof.u_star(s - h)) / (h * h);
                const double tol = 3.0 * sigma_fd + h * h / 6.0 * std::fabs(u2) + 0.02 * us;
                CHECK(std::fabs(fd - us) <= tol);
            }
        }
    }
}

TEST_CASE("exact monotonicity of the empirical profile") {
    const auto p = SpaceParams::make(2, 3.0);
    const PolyFunction f = random_unit_poly(p, 5, 9);
    McConfig cfg;
    cfg.n_samples = 20000;
    cfg.seed = 49;
    const LevelProfile prof(f, SamplePlan::build(p, cfg));

    const double sup = prof.sup_sampled();
    double prev_mu = std::numeric_limits<double>::infinity();
    double prev_us = std::numeric_limits<double>::infinity();
    double prev_i = -1.0;
    for (int k = 1; k <= 30; ++k) {
        const double t = sup * k / 31.0;
        const double m = prof.mu(t).mean;
        CHECK(m <= prev_mu);
        prev_mu = m;
        const double s = 0.01 * std::pow(1.6, k);
        const double us = prof.u_star(s);
        CHECK(us <= prev_us);
        prev_us = us;
        const double i = prof.superlevel_integral(s).mean;
        CHECK(i >= prev_i);
        prev_i = i;
    }

    // table rows are monotone after regularization
    std::vector<double> levels;
    for (int k = 1; k <= 20; ++k) levels.push_back(sup * k / 21.0);
    const auto rows = prof.table(levels);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].t <= rows[i - 1].t);
        CHECK(rows[i].mu >= rows[i - 1].mu);
    }
}

TEST_CASE("extremizer identity: superlevel integral equals the ball integral") {
    const auto p = SpaceParams::make(1, 2.0);
    for (std::uint64_t trial = 0; trial < 2; ++trial) {
        const CoherentState cs(p, random_interior_point(1, 500 + trial, 0.6));
        const LevelProfile prof(cs, SamplePlan::build(p, big_cfg(50 + trial)));
        for (double s : {0.5, 1.0, 2.0}) {
            const Estimate i = prof.superlevel_integral(s);
            const double j = faber_krahn_bound(s, p);
            CHECK(std::fabs(i.mean - j) <= 3.0 * i.std_error);
        }
    }
}

TEST_CASE("level monotonicity diagnostic") {
    // ground states: g identically 1
    for (const auto& [n, alpha] : std::vector<std::pair<int, double>>{{1, 2.0}, {2, 3.0}}) {
        const auto p = SpaceParams::make(n, alpha);
        const auto ground = PolyFunction::constant(p, 1.0);
        std::vector<double> grid;
        for (int i = 0; i < 20; ++i) grid.push_back(0.9 * std::pow(0.02 / 0.9, i / 19.0));
        const auto rows = level_monotonicity_diagnostic(ground, grid, big_cfg(60));
        for (const auto& row : rows)
            CHECK(std::fabs(row.g - 1.0) <= std::max(3.0 * row.sigma, 1e-3));
    }

    // random polynomial: g is nonincreasing in t (rows are sorted by
    // descending t, so g must be nondecreasing along the rows)
    const auto p = SpaceParams::make(1, 2.0);
    const PolyFunction f = random_unit_poly(p, 4, 71);
    const LevelProfile prof(f, SamplePlan::build(p, big_cfg(61)));
    std::vector<double> grid;
    const double sup = prof.sup_sampled();
    for (int i = 0; i < 20; ++i) grid.push_back(0.9 * sup * std::pow(0.05, i / 19.0));
    const auto rows = level_monotonicity_diagnostic(f, grid, big_cfg(61));
    CHECK(rows.size() == 20);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        CHECK(rows[i].t > rows[i + 1].t);
        CHECK(rows[i].g <= rows[i + 1].g + 3.0 * (rows[i].sigma + rows[i + 1].sigma) + 1e-9);
    }

    CHECK_THROWS_AS(level_monotonicity_diagnostic(f, std::vector<double>{1.5}, big_cfg(1)),
                    std::invalid_argument);
}

TEST_CASE("csv export") {
    const auto p = SpaceParams::make(1, 2.0);
    const auto ground = PolyFunction::constant(p, 1.0);
    McConfig cfg;
    cfg.n_samples = 5000;
    cfg.seed = 8;
    const LevelProfile prof(ground, SamplePlan::build(p, cfg));
    std::ostringstream os;
    const std::vector<double> levels{0.1, 0.25, 0.5, 0.75};
    prof.write_csv(os, levels);
    const std::string text = os.str();
    CHECK(text.rfind("t,mu,stderr\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("free function wrappers") {
    const auto p = SpaceParams::make(1, 2.0);
    const auto ground = PolyFunction::constant(p, 1.0);
    McConfig cfg;
    cfg.n_samples = 50000;
    cfg.seed = 52;
    const Estimate m = mu(ground, 0.25, cfg);
    CHECK(std::fabs(m.mean - 1.0) <= 3.0 * m.std_error);
    CHECK(u_star(ground, 1.0, cfg) == doctest::Approx(0.25).epsilon(0.05));
    const Estimate i = superlevel_integral(ground, 1.0, cfg);
    CHECK(std::fabs(i.mean - 0.5) <= 3.0 * i.std_error);
}
