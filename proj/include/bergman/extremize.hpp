#pragma once

// Sample-average maximization of the convex functional
//
//   F(c) = (1/n) sum_j w_j Phi(u_{f_c}(z_j)),   f_c = sum_m c_m z^m,
//
// over the unit sphere c* G c = 1 of a truncated coefficient space
// (G is the exact diagonal Gram of the monomial basis). The sample set is
// frozen for the whole run, so the surrogate is deterministic and can be
// line-searched; projected gradient ascent with retraction to the sphere.
//
// Also the coherence diagnostic: polished maximum of u_f, the fitted
// center, and the overlap with the coherent state at that center. The
// proxy sup u_f - 1 vanishes exactly on the coherent family.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bergman/quadrature.hpp"
#include "bergman/rng.hpp"
#include "bergman/space.hpp"

namespace bergman {

// Local ascent polish of the Husimi function from a starting point.
template <class F>
std::pair<Point, double> polish_maximum(const F& f, Point start, int max_iter = 400) {
    auto clamp_ball = [](std::vector<complexd> c) {
        double ns = 0.0;
        for (const auto& v : c) ns += std::norm(v);
        if (ns > 1.0 - 1e-12) {
            const double sc = std::sqrt((1.0 - 1e-10) / ns);
            for (auto& v : c) v *= sc;
        }
        return Point(std::move(c));
    };

    Point z = std::move(start);
    double u = husimi(f, z);
    double step = 0.05;
    for (int it = 0; it < max_iter; ++it) {
        const auto [uz, grad] = husimi_with_gradient(f, z);
        u = uz;
        double gn = 0.0;
        for (double g : grad) gn += g * g;
        gn = std::sqrt(gn);
        if (gn <= 1e-13 * (1.0 + u)) break;
        bool accepted = false;
        for (int h = 0; h < 60; ++h) {
            std::vector<complexd> trial = z.coords();
            for (int k = 0; k < z.dim(); ++k)
                trial[static_cast<std::size_t>(k)] +=
                    complexd(step * grad[static_cast<std::size_t>(2 * k)],
                             step * grad[static_cast<std::size_t>(2 * k + 1)]);
            Point zt = clamp_ball(std::move(trial));
            const double ut = husimi(f, zt);
            if (ut > u) {
                z = std::move(zt);
                u = ut;
                step *= 1.8;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return {z, u};
}

struct CoherenceInfo {
    double sup_u = 0.0;      // polished maximum of u_f
    Point z0_fit;            // location of the maximum
    double overlap = 0.0;    // |<phi_{z0_fit}, f>|^2, in [0, 1] for unit f
    double g_prime_proxy = 0.0; // sup_u - ||f||^2; zero exactly on the coherent family
};

namespace detail {

inline double coherent_overlap(const PolyFunction& f, const Point& z0) {
    const int deg = std::min(f.degree() + 10, PolyFunction::kDegreeCap);
    const PolyFunction expansion = expand_coherent(CoherentState(f.params(), z0), deg);
    return std::norm(inner_product(expansion, f));
}

inline double state_overlap(const PolyFunction& f, const Point& z0) { return coherent_overlap(f, z0); }
inline double state_overlap(const CoherentState& cs, const Point& z0) {
    // |<phi_{z0}, phi_w>|^2 = (1 - |Y_w(z0)|^2)^alpha = u_{phi_w}(z0)
    return husimi(cs, z0);
}
inline double state_overlap(const MixedState& ms, const Point& z0) {
    double s = 0.0;
    for (std::size_t i = 0; i < ms.rank(); ++i)
        s += ms.weights()[i] * coherent_overlap(ms.states()[i], z0);
    return s;
}

} // namespace detail

template <class F>
CoherenceInfo coherence_diagnostic(const F& f, const SamplePlan& plan) {
    const std::size_t n = plan.size();
    std::size_t best = 0;
    double best_u = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = husimi(f, plan.points[i]);
        if (u > best_u) {
            best_u = u;
            best = i;
        }
    }
    auto [z0, sup_u] = polish_maximum(f, plan.points[best]);
    CoherenceInfo info{sup_u, std::move(z0), 0.0, sup_u - norm_sq(f)};
    info.overlap = std::clamp(detail::state_overlap(f, info.z0_fit), 0.0, 1.0);
    return info;
}

template <class F>
CoherenceInfo coherence_diagnostic(const F& f) {
    McConfig cfg;
    cfg.n_samples = 4000;
    cfg.seed = 0xD1A6ull;
    return coherence_diagnostic(f, SamplePlan::build(space_of(f), cfg));
}

// ---------------------------------------------------------------------------

struct SaaProblem {
    SpaceParams params;
    ConvexProbe probe;
    int degree;
    SamplePlan plan;
    std::vector<MultiIndex> basis;
    std::vector<double> gram;      // exact diagonal Gram: ||z^m||^2
    std::vector<double> tau;       // (1-|z_j|^2)^alpha per sample
    std::vector<complexd> design;  // row-major [sample][basis] monomial values

    static SaaProblem build(const SpaceParams& params, const ConvexProbe& probe, int degree,
                            const McConfig& cfg) {
        if (degree < 0) throw std::invalid_argument("SaaProblem: degree must be >= 0");
        SaaProblem p{params, probe, degree, SamplePlan::build(params, cfg), {}, {}, {}, {}};
        p.basis = multi_indices_up_to(params.n, degree);
        p.gram.reserve(p.basis.size());
        for (const auto& m : p.basis) p.gram.push_back(monomial_norm_sq(m, params));
        const std::size_t n = p.plan.size();
        const std::size_t mdim = p.basis.size();
        p.tau.resize(n);
        p.design.resize(n * mdim);
        parallel_for(n, [&](std::size_t j) {
            const Point& z = p.plan.points[j];
            p.tau[j] = std::exp(params.alpha * std::log1p(-z.norm_sq()));
            // coordinate powers up to `degree`
            std::vector<std::vector<complexd>> pows(static_cast<std::size_t>(params.n));
            for (int k = 0; k < params.n; ++k) {
                auto& pk = pows[static_cast<std::size_t>(k)];
                pk.resize(static_cast<std::size_t>(degree) + 1);
                pk[0] = complexd(1.0, 0.0);
                for (int e = 1; e <= degree; ++e)
                    pk[static_cast<std::size_t>(e)] = pk[static_cast<std::size_t>(e - 1)] * z[static_cast<std::size_t>(k)];
            }
            for (std::size_t m = 0; m < mdim; ++m) {
                complexd mono(1.0, 0.0);
                for (int k = 0; k < params.n; ++k)
                    mono *= pows[static_cast<std::size_t>(k)]
                                [static_cast<std::size_t>(p.basis[m].exponents[static_cast<std::size_t>(k)])];
                p.design[j * mdim + m] = mono;
            }
        });
        return p;
    }

    double constraint_norm_sq(std::span<const complexd> c) const {
        double s = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m) s += std::norm(c[m]) * gram[m];
        return s;
    }

    void normalize(std::vector<complexd>& c) const {
        const double ns = constraint_norm_sq(c);
        if (!(ns > 0.0)) throw std::invalid_argument("SaaProblem: zero coefficient vector");
        const double inv = 1.0 / std::sqrt(ns);
        for (auto& v : c) v *= inv;
    }

    double objective(std::span<const complexd> c) const {
        const std::size_t n = plan.size();
        const std::size_t mdim = basis.size();
        std::vector<double> y(n);
        parallel_for(n, [&](std::size_t j) {
            complexd a(0.0, 0.0);
            for (std::size_t m = 0; m < mdim; ++m) a += design[j * mdim + m] * c[m];
            y[j] = probe(std::norm(a) * tau[j]) * plan.weights[j];
        });
        return pairwise_sum(y) / static_cast<double>(n);
    }

    // Objective and ambient complex gradient G_m = 2/n sum_j w_j Phi'(u_j) tau_j conj(A_jm) a_j;
    // the real gradient in (Re c, Im c) coordinates is (Re G, Im G). The
    // gradient is accumulated over fixed sample blocks and combined in
    // block order, so it does not depend on the worker count.
    std::pair<double, std::vector<complexd>> objective_and_gradient(std::span<const complexd> c) const {
        const std::size_t n = plan.size();
        const std::size_t mdim = basis.size();
        constexpr std::size_t kBlock = 8192;
        const std::size_t blocks = (n + kBlock - 1) / kBlock;
        std::vector<double> y(n);
        std::vector<complexd> block_grad(blocks * mdim, complexd(0.0, 0.0));
        parallel_for(blocks, [&](std::size_t b) {
            complexd* g = block_grad.data() + b * mdim;
            const std::size_t end = std::min(n, (b + 1) * kBlock);
            for (std::size_t j = b * kBlock; j < end; ++j) {
                const complexd* row = design.data() + j * mdim;
                complexd a(0.0, 0.0);
                for (std::size_t m = 0; m < mdim; ++m) a += row[m] * c[m];
                const double u = std::norm(a) * tau[j];
                y[j] = probe(u) * plan.weights[j];
                if (u < 1e-300) continue; // Phi'(0) may be -inf (xlogx); zero contribution
                const double coef = 2.0 * plan.weights[j] * probe.derivative(u) * tau[j] /
                                    static_cast<double>(n);
                const complexd qa = coef * a;
                for (std::size_t m = 0; m < mdim; ++m) g[m] += std::conj(row[m]) * qa;
            }
        });
        std::vector<complexd> grad(mdim, complexd(0.0, 0.0));
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t m = 0; m < mdim; ++m) grad[m] += block_grad[b * mdim + m];
        return {pairwise_sum(y) / static_cast<double>(n), std::move(grad)};
    }

    // Fresh-sample estimate of the functional at fixed coefficients.
    Estimate evaluate_on(std::span<const complexd> c, const SamplePlan& fresh) const {
        const std::size_t n = fresh.size();
        std::vector<double> y(n);
        parallel_for(n, [&](std::size_t j) {
            const Point& z = fresh.points[j];
            std::vector<std::vector<complexd>> pows(static_cast<std::size_t>(params.n));
            for (int k = 0; k < params.n; ++k) {
                auto& pk = pows[static_cast<std::size_t>(k)];
                pk.resize(static_cast<std::size_t>(degree) + 1);
                pk[0] = complexd(1.0, 0.0);
                for (int e = 1; e <= degree; ++e)
                    pk[static_cast<std::size_t>(e)] = pk[static_cast<std::size_t>(e - 1)] * z[static_cast<std::size_t>(k)];
            }
            complexd a(0.0, 0.0);
            for (std::size_t m = 0; m < basis.size(); ++m) {
                complexd mono(1.0, 0.0);
                for (int k = 0; k < params.n; ++k)
                    mono *= pows[static_cast<std::size_t>(k)]
                                [static_cast<std::size_t>(basis[m].exponents[static_cast<std::size_t>(k)])];
                a += mono * c[m];
            }
            const double u = std::norm(a) * std::exp(params.alpha * std::log1p(-z.norm_sq()));
            y[j] = probe(u) * fresh.weights[j];
        });
        return estimate_from_values(y);
    }

    PolyFunction to_poly(std::span<const complexd> c) const {
        PolyFunction::CoeffMap coeffs;
        for (std::size_t m = 0; m < basis.size(); ++m)
            if (c[m] != complexd(0.0, 0.0)) coeffs.emplace(basis[m], c[m]);
        return PolyFunction(params, std::move(coeffs));
    }
};

struct RestartStat {
    int index = 0;
    bool warm_start = false;
    int iterations = 0;
    int accepted_steps = 0;
    bool line_search_failed = false;
    bool gate_passed = false;
    bool first_order_stop = false;
    double saa_value = 0.0;
    double fresh_value = 0.0;
    double fresh_std_error = 0.0;
};

struct ExtremalReport {
    std::vector<MultiIndex> basis;
    std::vector<complexd> coefficients;
    double saa_value = 0.0;
    Estimate fresh;
    double bound = 0.0; // sharp constant for the probe
    double gap = 0.0;   // bound - fresh.mean
    CoherenceInfo diagnostic{0.0, Point::origin(1), 0.0, 0.0};
    std::vector<RestartStat> restarts;
    bool gradient_gate_passed = false;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> traces; // per-restart objective traces (optional)
};

namespace detail {

// Central finite differences of the SAA objective against the analytic
// gradient; a hard gate before any ascent is trusted.
inline bool gradient_gate(const SaaProblem& problem, std::span<const complexd> c0,
                          std::uint64_t seed) {
    const std::size_t mdim = problem.basis.size();
    const double h = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<complexd> c(c0.begin(), c0.end());
        if (trial > 0) {
            CounterRng rng(seed, 7000 + static_cast<std::uint64_t>(trial));
            for (auto& v : c) v += 0.25 * complexd(rng.next_normal(), rng.next_normal());
            problem.normalize(c);
        }
        const auto [f0, grad] = problem.objective_and_gradient(c);
        (void)f0;
        double num = 0.0, den = 0.0;
        for (std::size_t m = 0; m < mdim; ++m) {
            for (int part = 0; part < 2; ++part) {
                std::vector<complexd> cp(c), cm(c);
                const complexd delta = part == 0 ? complexd(h, 0.0) : complexd(0.0, h);
                cp[m] += delta;
                cm[m] -= delta;
                const double fd = (problem.objective(cp) - problem.objective(cm)) / (2.0 * h);
                const double an = part == 0 ? grad[m].real() : grad[m].imag();
                num += (fd - an) * (fd - an);
                den += an * an;
            }
        }
        if (std::sqrt(num) > 1e-5 * (1.0 + std::sqrt(den))) return false;
    }
    return true;
}

} // namespace detail

inline ExtremalReport saa_maximize(const SaaProblem& problem, int restarts, std::uint64_t seed,
                                   bool record_traces = false) {
    if (restarts < 1) throw std::invalid_argument("saa_maximize: need at least one restart");
    const std::size_t mdim = problem.basis.size();
    const double bound = sharp_wehrl_constant(problem.probe, problem.params);

    const McConfig fresh_cfg{problem.plan.cfg.n_samples * 4,
                             problem.plan.cfg.seed ^ 0x5113C1B727220A95ull,
                             problem.plan.cfg.radial_strata};
    const SamplePlan fresh = SamplePlan::build(problem.params, fresh_cfg);

    ExtremalReport report;
    report.basis = problem.basis;
    report.bound = bound;
    report.seed = seed;
    report.gradient_gate_passed = true;

    std::vector<std::vector<complexd>> endpoints;
    const int total_runs = restarts + 1; // one extra warm start at a coherent truncation
    for (int r = 0; r < total_runs; ++r) {
        RestartStat stat;
        stat.index = r;
        stat.warm_start = (r == total_runs - 1);
        std::vector<complexd> c(mdim);
        if (stat.warm_start) {
            CounterRng rng(seed, 9000);
            std::vector<complexd> z0(static_cast<std::size_t>(problem.params.n));
            for (auto& v : z0) v = 0.4 * rng.next_open() *
                                   std::exp(complexd(0.0, 6.283185307179586 * rng.next_double()));
            const PolyFunction warm =
                expand_coherent(CoherentState(problem.params, Point(std::move(z0))), problem.degree);
            for (std::size_t m = 0; m < mdim; ++m) {
                auto it = warm.coeffs().find(problem.basis[m]);
                c[m] = it == warm.coeffs().end() ? complexd(0.0, 0.0) : it->second;
            }
        } else {
            CounterRng rng(seed, static_cast<std::uint64_t>(r));
            for (auto& v : c) v = complexd(rng.next_normal(), rng.next_normal());
        }
        problem.normalize(c);

        stat.gate_passed = detail::gradient_gate(problem, c, seed + static_cast<std::uint64_t>(r));
        if (!stat.gate_passed) report.gradient_gate_passed = false;

        std::vector<double> trace;
        if (problem.probe.is_affine()) {
            // The functional is exactly constant on the norm sphere for an
            // affine probe, so the start point is already first-order optimal.
            stat.saa_value = problem.objective(c);
            stat.first_order_stop = true;
            if (record_traces) trace.push_back(stat.saa_value);
        } else {
            auto [f, grad] = problem.objective_and_gradient(c);
            if (record_traces) trace.push_back(f);
            double step = 1.0;
            std::vector<complexd> prev_c, prev_tangent;
            for (int iter = 0; iter < 2000; ++iter) {
                stat.iterations = iter + 1;
                // tangent projection against the constraint normal G c
                std::vector<complexd> normal(mdim);
                double nn = 0.0;
                double ng = 0.0;
                for (std::size_t m = 0; m < mdim; ++m) {
                    normal[m] = problem.gram[m] * c[m];
                    nn += std::norm(normal[m]);
                    ng += normal[m].real() * grad[m].real() + normal[m].imag() * grad[m].imag();
                }
                std::vector<complexd> tangent(mdim);
                double tg = 0.0;
                for (std::size_t m = 0; m < mdim; ++m) {
                    tangent[m] = grad[m] - (ng / nn) * normal[m];
                    tg += std::norm(tangent[m]);
                }
                if (std::sqrt(tg) <= 1e-8 * (1.0 + std::fabs(f))) {
                    stat.first_order_stop = true;
                    break;
                }
                if (!prev_c.empty()) {
                    // Barzilai-Borwein initial step from the last accepted move
                    double num = 0.0, den = 0.0;
                    for (std::size_t m = 0; m < mdim; ++m) {
                        const complexd dc = c[m] - prev_c[m];
                        const complexd dg = tangent[m] - prev_tangent[m];
                        num += std::norm(dc);
                        den += dc.real() * dg.real() + dc.imag() * dg.imag();
                    }
                    if (std::fabs(den) > 1e-300 && num > 0.0)
                        step = std::min(std::max(num / std::fabs(den), 1e-12), 1e6);
                }
                prev_c = c;
                prev_tangent = tangent;
                bool accepted = false;
                for (int hh = 0; hh < 50; ++hh) {
                    std::vector<complexd> trial(mdim);
                    for (std::size_t m = 0; m < mdim; ++m) trial[m] = c[m] + step * tangent[m];
                    problem.normalize(trial);
                    const auto [ft, gt] = problem.objective_and_gradient(trial);
                    if (ft >= f + 1e-4 * step * tg) {
                        c = std::move(trial);
                        f = ft;
                        grad = gt;
                        accepted = true;
                        ++stat.accepted_steps;
                        if (record_traces) trace.push_back(f);
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) {
                    stat.line_search_failed = true;
                    break;
                }
            }
            stat.saa_value = f;
        }
        const Estimate fresh_eval = problem.evaluate_on(c, fresh);
        stat.fresh_value = fresh_eval.mean;
        stat.fresh_std_error = fresh_eval.std_error;
        endpoints.push_back(std::move(c));
        report.restarts.push_back(stat);
        if (record_traces) report.traces.push_back(std::move(trace));
    }

    // Highest fresh-sample value wins; ties (< 1e-12) go to the lowest index.
    std::size_t best = 0;
    for (std::size_t r = 1; r < endpoints.size(); ++r)
        if (report.restarts[r].fresh_value > report.restarts[best].fresh_value + 1e-12) best = r;

    report.coefficients = endpoints[best];
    report.saa_value = report.restarts[best].saa_value;
    report.fresh = problem.evaluate_on(report.coefficients, fresh);
    report.gap = report.bound - report.fresh.mean;
    report.diagnostic = coherence_diagnostic(problem.to_poly(report.coefficients), problem.plan);
    return report;
}

} // namespace bergman
