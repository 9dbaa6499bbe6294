#pragma once

// Integration against the invariant measure dm = dv / (1-|z|^2)^{N+1}.
//
// Monte Carlo side: importance sampling with |z|^2 ~ Beta(N, alpha-N) and
// a uniform direction on the unit sphere of C^N. The proposal density
// against dv is c_alpha (1-|z|^2)^{alpha-N-1} dv, hence
//
//   int_{B_N} F dm = E[ F(z) (1-|z|^2)^{-alpha} / c_alpha ],
//
// which makes F = Phi(u_f) bounded-variance integrands. Sampling is
// counter-based per index and the reduction is a fixed pairwise tree, so
// estimates are bitwise reproducible under any parallel schedule.
//
// Deterministic side: adaptive Gauss-Legendre for radial integrals
//
//   2N int_0^1 g(r) r^{2N-1} (1-r^2)^{-N-1} dr,
//
// after t = r^2 and, when alpha - N < 1, the boundary-absorbing
// substitution t = 1 - (1-t')^{1/(alpha-N)} that flattens the endpoint
// weight (1-t)^{alpha-N-1}. Also evaluates the two closed-form sharp
// constants: the coherent-state value of the convex functional and the
// ball integral J(s) with its derivatives
//
//   J'(s) = (1 + s^{1/N})^{-alpha},
//   J''(s) = -alpha s J'(s) / (N s^{(2N-1)/N} + N s^2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/parallel.hpp"
#include "bergman/rng.hpp"
#include "bergman/space.hpp"
#include "bergman/special.hpp"

namespace bergman {

struct McConfig {
    std::size_t n_samples = 200000;
    std::uint64_t seed = 1;
    int radial_strata = 0; // 0 = none

    McConfig with_seed(std::uint64_t s) const {
        McConfig c = *this;
        c.seed = s;
        return c;
    }
    McConfig scaled(std::size_t factor) const {
        McConfig c = *this;
        c.n_samples *= factor;
        return c;
    }
    void validate() const {
        if (n_samples < 100)
            throw std::invalid_argument("McConfig: need n_samples >= 100 for a standard error");
        if (radial_strata < 0) throw std::invalid_argument("McConfig: negative strata count");
    }
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

struct IntegrationError : std::runtime_error {
    explicit IntegrationError(std::string msg, std::vector<complexd> at = {})
        : std::runtime_error(std::move(msg)), offending_point(std::move(at)) {}
    std::vector<complexd> offending_point;
};

// Fixed-order pairwise tree sum keyed by index.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

// A frozen set of sample points and importance weights
// w_i = (1-|z_i|^2)^{-alpha} / c_alpha. Reused by every integrand that
// shares (params, cfg); also the sample-average backbone of the
// extremal search.
struct SamplePlan {
    SpaceParams params;
    McConfig cfg;
    std::vector<Point> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }

    static SamplePlan build(const SpaceParams& params, const McConfig& cfg) {
        cfg.validate();
        SamplePlan plan;
        plan.params = params;
        plan.cfg = cfg;
        std::size_t n = cfg.n_samples;
        const int strata = cfg.radial_strata;
        if (strata > 1) n = ((n + strata - 1) / strata) * strata; // equal allocation
        plan.points.assign(n, Point::origin(params.n));
        plan.weights.assign(n, 0.0);
        const double a = static_cast<double>(params.n);
        const double b = params.alpha - params.n;
        parallel_for(n, [&](std::size_t i) {
            CounterRng rng(cfg.seed, i);
            double t;
            if (strata > 1) {
                const std::size_t per = n / strata;
                const double p = (static_cast<double>(i / per) + rng.next_double()) / strata;
                t = reg_inc_beta_inv(a, b, p);
            } else {
                t = rng.next_beta(a, b);
            }
            t = std::min(std::max(t, 0.0), 1.0 - 1e-12);
            auto dir = rng.next_complex_direction(params.n);
            const double r = std::sqrt(t);
            for (auto& c : dir) c *= r;
            plan.points[i] = Point(std::move(dir));
            plan.weights[i] = std::exp(-params.alpha * std::log1p(-t)) / params.c_alpha;
        });
        return plan;
    }
};

// Mean and standard error of a buffer of per-sample values.
inline Estimate estimate_from_values(std::span<const double> y) {
    const std::size_t n = y.size();
    Estimate e;
    e.n = n;
    if (n == 0) return e;
    e.mean = pairwise_sum(y) / static_cast<double>(n);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = y[i] - e.mean;
        dev[i] = d * d;
    }
    if (n > 1) {
        const double var = pairwise_sum(dev) / static_cast<double>(n - 1);
        e.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return e;
}

template <class F>
Estimate mc_integrate_invariant(const F& integrand, const SamplePlan& plan) {
    const std::size_t n = plan.size();
    std::vector<double> y(n);
    parallel_for(n, [&](std::size_t i) { y[i] = integrand(plan.points[i]) * plan.weights[i]; });
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(y[i]))
            throw IntegrationError("mc_integrate_invariant: non-finite sample value at index " +
                                       std::to_string(i),
                                   plan.points[i].coords());
    return estimate_from_values(y);
}

template <class F>
Estimate mc_integrate_invariant(const F& integrand, const SpaceParams& params, const McConfig& cfg) {
    return mc_integrate_invariant(integrand, SamplePlan::build(params, cfg));
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [-1, 1], cached by order.

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (order + 0.5));
        double p1 = 0.0, pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= order; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
            }
            pp = order * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

namespace detail {

template <class F>
double gauss_panel(const F& f, double a, double b, const GaussRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

// Adaptive composite Gauss-Legendre over [0,1]: worst panel (by the
// coarse-vs-halved error estimate) is split first, which resolves
// integrable endpoint singularities without over-refining smooth regions.
// Optional interior breakpoints seed the initial grid; `nodes` sets its
// resolution. Deterministic: ties in the panel priority break on the
// interval start.
template <class F>
double adaptive_unit_integral(const F& f, int nodes, std::vector<double> breaks,
                              double rel_tol = 1e-12) {
    const GaussRule& rule = gauss_legendre(16);
    constexpr double kWidthFloor = 1e-13; // keeps nodes representable away from endpoints

    struct Panel {
        double a, b;
        double value; // halved composite value
        double err;   // |halved - coarse|
    };
    auto make_panel = [&](double a, double b, double coarse) {
        const double mid = 0.5 * (a + b);
        const double left = gauss_panel(f, a, mid, rule);
        const double right = gauss_panel(f, mid, b, rule);
        Panel p{a, b, left + right, std::fabs(left + right - coarse)};
        if (!std::isfinite(p.value))
            throw IntegrationError("adaptive quadrature: non-finite integrand value");
        return p;
    };
    auto worse = [](const Panel& x, const Panel& y) {
        if (x.err != y.err) return x.err < y.err;
        return x.a > y.a;
    };

    breaks.push_back(0.0);
    breaks.push_back(1.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<Panel> active; // refinement heap
    std::vector<Panel> done;   // panels at the width floor
    double value_total = 0.0, err_total = 0.0;
    auto push_active = [&](Panel p) {
        value_total += p.value;
        err_total += p.err;
        active.push_back(p);
        std::push_heap(active.begin(), active.end(), worse);
    };

    const int per_piece =
        std::max(1, nodes / 16 / std::max<int>(1, static_cast<int>(breaks.size()) - 1));
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = breaks[k], hi = breaks[k + 1];
        for (int j = 0; j < per_piece; ++j) {
            const double a = lo + (hi - lo) * j / per_piece;
            const double b = lo + (hi - lo) * (j + 1) / per_piece;
            push_active(make_panel(a, b, gauss_panel(f, a, b, rule)));
        }
    }

    for (int split = 0; split < 20000 && !active.empty(); ++split) {
        if (std::fabs(value_total) > 1e250)
            throw IntegrationError("adaptive quadrature: integral grows without bound");
        const double eps_total = rel_tol * std::max(std::fabs(value_total), 1e-6);
        if (err_total <= eps_total) break;
        std::pop_heap(active.begin(), active.end(), worse);
        const Panel top = active.back();
        active.pop_back();
        if (top.b - top.a <= kWidthFloor) {
            done.push_back(top); // keeps its value and error; cannot refine further
            continue;
        }
        value_total -= top.value;
        err_total -= top.err;
        const double mid = 0.5 * (top.a + top.b);
        push_active(make_panel(top.a, mid, gauss_panel(f, top.a, mid, rule)));
        push_active(make_panel(mid, top.b, gauss_panel(f, mid, top.b, rule)));
    }

    // Deterministic final reduction over all panels in interval order.
    std::vector<Panel> all(active);
    all.insert(all.end(), done.begin(), done.end());
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double value = 0.0, err = 0.0;
    for (const auto& p : all) {
        value += p.value;
        err += p.err;
    }
    if (!std::isfinite(value))
        throw IntegrationError("adaptive quadrature: non-finite value");
    if (err > 1e-4 * (std::fabs(value) + 1e-6))
        throw IntegrationError("adaptive quadrature: did not converge under node refinement");
    return value;
}

// h is the t-space radial integrand; applies the boundary-absorbing
// substitution when alpha - N < 1. Breakpoints are given in t.
template <class H>
double radial_engine(const H& h, const SpaceParams& params, int nodes, std::vector<double> t_breaks) {
    const double excess = params.alpha - params.n;
    if (excess < 1.0) {
        const double gamma = 1.0 / excess;
        auto transformed = [&](double x) {
            const double one_minus_t = std::pow(1.0 - x, gamma);
            const double t = 1.0 - one_minus_t;
            return h(t) * gamma * std::pow(1.0 - x, gamma - 1.0);
        };
        for (auto& tb : t_breaks) tb = 1.0 - std::pow(1.0 - tb, excess);
        return adaptive_unit_integral(transformed, nodes, std::move(t_breaks));
    }
    return adaptive_unit_integral(h, nodes, std::move(t_breaks));
}

} // namespace detail

// Deterministic value of 2N int_0^1 g(r) r^{2N-1} (1-r^2)^{-N-1} dr.
template <class G>
double radial_integrate(const G& g, const SpaceParams& params, int nodes = 256) {
    const double n = static_cast<double>(params.n);
    auto h = [&](double t) {
        return n * g(std::sqrt(t)) * std::pow(t, n - 1.0) *
               std::exp(-(n + 1.0) * std::log1p(-t));
    };
    return detail::radial_engine(h, params, nodes, {});
}

// Value of the convex functional at a coherent state,
//   int_{B_N} Phi((1-|z|^2)^alpha) dm
//     = (N/alpha) int_0^1 Phi(s) s^{-N/alpha-1} (1-s^{1/alpha})^{N-1} ds,
// the sharp upper bound over unit-norm functions.
inline double sharp_wehrl_constant(const ConvexProbe& probe, const SpaceParams& params,
                                   int nodes = 256) {
    const double n = static_cast<double>(params.n);
    const double alpha = params.alpha;
    auto h = [&](double t) {
        const double u = std::exp(alpha * std::log1p(-t));
        return n * probe(u) * std::pow(t, n - 1.0) * std::exp(-(n + 1.0) * std::log1p(-t));
    };
    std::vector<double> breaks;
    if (probe.kind() == ConvexProbe::Kind::hinge)
        breaks.push_back(1.0 - std::pow(probe.param(), 1.0 / alpha)); // Phi kink
    return detail::radial_engine(h, params, nodes, std::move(breaks));
}

// ---------------------------------------------------------------------------
// The ball integral J(s) = int_{B_s} (1-|z|^2)^alpha dm = int_0^s (1+sigma^{1/N})^{-alpha} dsigma
// and its closed-form derivatives.

inline double faber_krahn_bound_prime(double s, const SpaceParams& params) {
    if (s < 0.0) throw std::invalid_argument("faber_krahn_bound_prime: s must be >= 0");
    return std::exp(-params.alpha * std::log1p(std::pow(s, 1.0 / params.n)));
}

inline double faber_krahn_bound_second(double s, const SpaceParams& params) {
    if (s < 0.0) throw std::invalid_argument("faber_krahn_bound_second: s must be >= 0");
    const double n = static_cast<double>(params.n);
    const double jp = faber_krahn_bound_prime(s, params);
    return -params.alpha * s * jp /
           (n * std::pow(s, (2.0 * n - 1.0) / n) + n * s * s);
}

inline double faber_krahn_bound(double s, const SpaceParams& params, int nodes = 256) {
    if (s < 0.0) throw std::invalid_argument("faber_krahn_bound: s must be >= 0");
    if (s == 0.0) return 0.0;
    const double alpha = params.alpha;
    if (params.n == 1)
        return -std::expm1((1.0 - alpha) * std::log1p(s)) / (alpha - 1.0);
    // substitute sigma = x^N: N int_0^{s^{1/N}} x^{N-1} (1+x)^{-alpha} dx
    const double n = static_cast<double>(params.n);
    const double top = std::pow(s, 1.0 / n);
    auto f = [&](double y) {
        const double x = y * top;
        return n * top * std::pow(x, n - 1.0) * std::exp(-alpha * std::log1p(x));
    };
    std::vector<double> breaks;
    if (top > 1.0) breaks.push_back(1.0 / top);
    return detail::adaptive_unit_integral(f, nodes, std::move(breaks));
}

} // namespace bergman
