#pragma once

// Distribution function mu_f(t) = m({u_f > t}), decreasing rearrangement
// u*(s) = sup{t : mu_f(t) > s}, and the superlevel-set integral
// I_f(s) = int_{u_f > u*(s)} u_f dm.
//
// All three are read off one shared, frozen sample set: the Husimi values
// are weighted by the importance weights and sorted once, so mu is exactly
// nonincreasing, u* is its exact empirical inverse, and I is nondecreasing
// by construction. Also provides the level monotonicity diagnostic
// g(t) = t^{1/alpha} (mu^{1/N}(t) + 1), which is constant (= 1) for
// coherent states and nonincreasing in general.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "bergman/quadrature.hpp"
#include "bergman/space.hpp"

namespace bergman {

struct LevelRow {
    double t;
    double mu;
    double std_error;
};

struct UStarResult {
    double value;
    bool truncated; // s exceeded the tabulated mass; value pinned at t_min
};

class LevelProfile {
public:
    static constexpr double kLevelFloor = 1e-8;

    template <class F>
    LevelProfile(const F& f, const SamplePlan& plan) {
        const std::size_t n = plan.size();
        n_ = n;
        struct Entry {
            double u, w;
        };
        std::vector<Entry> entries(n);
        parallel_for(n, [&](std::size_t i) {
            entries[i].u = husimi(f, plan.points[i]);
            entries[i].w = plan.weights[i];
        });
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(entries[i].u))
                throw IntegrationError("LevelProfile: non-finite Husimi value",
                                       plan.points[i].coords());
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.u > b.u; });
        u_.resize(n);
        cum_w_.resize(n);
        cum_w2_.resize(n);
        cum_wu_.resize(n);
        cum_wu2_.resize(n);
        double w = 0.0, w2 = 0.0, wu = 0.0, wu2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            u_[i] = entries[i].u;
            const double wi = entries[i].w;
            const double wui = wi * entries[i].u;
            w += wi;
            w2 += wi * wi;
            wu += wui;
            wu2 += wui * wui;
            cum_w_[i] = w;
            cum_w2_[i] = w2;
            cum_wu_[i] = wu;
            cum_wu2_[i] = wu2;
        }
    }

    std::size_t sample_count() const { return n_; }
    double sup_sampled() const { return u_.empty() ? 0.0 : u_.front(); }
    double total_mass() const { return cum_w_.empty() ? 0.0 : cum_w_.back() / static_cast<double>(n_); }

    // MC estimate of m({u_f > t}); t > 0.
    Estimate mu(double t) const {
        if (!(t > 0.0)) throw std::invalid_argument("mu: level must be positive");
        const std::size_t k = count_above(t);
        return prefix_estimate(k, cum_w_, cum_w2_);
    }

    // Largest level with mu above s (exact inverse of the empirical mu).
    UStarResult u_star_checked(double s) const {
        if (s < 0.0) throw std::invalid_argument("u_star: s must be >= 0");
        const double target = s * static_cast<double>(n_);
        // smallest k with cumulative weight > target
        std::size_t lo = 0, hi = u_.size();
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (cum_w_[mid] > target) hi = mid;
            else lo = mid + 1;
        }
        if (lo == u_.size()) return {kLevelFloor, true};
        return {std::max(u_[lo], kLevelFloor), u_[lo] < kLevelFloor};
    }

    double u_star(double s) const { return u_star_checked(s).value; }

    // MC estimate of int u_f 1{u_f > u*(s)} dm; I(0) = 0.
    Estimate superlevel_integral(double s) const {
        const double t = u_star(s);
        const std::size_t k = count_above(t);
        return prefix_estimate(k, cum_wu_, cum_wu2_);
    }

    // Monotone-regularized level table (running maxima from high t down).
    std::vector<LevelRow> table(std::span<const double> levels) const {
        std::vector<double> sorted(levels.begin(), levels.end());
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        std::vector<LevelRow> rows;
        rows.reserve(sorted.size());
        double running = 0.0;
        for (double t : sorted) {
            const Estimate e = mu(t);
            running = std::max(running, e.mean);
            rows.push_back({t, running, e.std_error});
        }
        return rows;
    }

    void write_csv(std::ostream& os, std::span<const double> levels) const {
        os << "t,mu,stderr\n";
        char buf[128];
        for (const auto& row : table(levels)) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.t, row.mu, row.std_error);
            os << buf;
        }
    }

private:
    std::size_t count_above(double t) const {
        // u_ sorted descending; count entries strictly greater than t
        std::size_t lo = 0, hi = u_.size();
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (u_[mid] > t) lo = mid + 1;
            else hi = mid;
        }
        return lo;
    }

    Estimate prefix_estimate(std::size_t k, const std::vector<double>& cum,
                             const std::vector<double>& cum_sq) const {
        Estimate e;
        e.n = n_;
        if (n_ == 0) return e;
        const double sum = k == 0 ? 0.0 : cum[k - 1];
        const double sum_sq = k == 0 ? 0.0 : cum_sq[k - 1];
        const double n = static_cast<double>(n_);
        e.mean = sum / n;
        if (n_ > 1) {
            const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
            e.std_error = std::sqrt(var / n);
        }
        return e;
    }

    std::size_t n_ = 0;
    std::vector<double> u_;      // descending Husimi values
    std::vector<double> cum_w_;  // prefix sums of weights
    std::vector<double> cum_w2_;
    std::vector<double> cum_wu_; // prefix sums of weight * u
    std::vector<double> cum_wu2_;
};

template <class F>
Estimate mu(const F& f, double t, const McConfig& cfg) {
    return LevelProfile(f, SamplePlan::build(space_of(f), cfg)).mu(t);
}

template <class F>
double u_star(const F& f, double s, const McConfig& cfg) {
    return LevelProfile(f, SamplePlan::build(space_of(f), cfg)).u_star(s);
}

template <class F>
Estimate superlevel_integral(const F& f, double s, const McConfig& cfg) {
    return LevelProfile(f, SamplePlan::build(space_of(f), cfg)).superlevel_integral(s);
}

struct DiagnosticRow {
    double t;
    double g;
    double sigma; // 1-sigma band propagated from the mu estimate
};

// g(t) = t^{1/alpha} (mu^{1/N}(t) + 1) on a decreasing level grid. For
// unit-norm f it is nonincreasing; for coherent states it is identically 1.
template <class F>
std::vector<DiagnosticRow> level_monotonicity_diagnostic(const F& f,
                                                         std::span<const double> t_grid,
                                                         const McConfig& cfg) {
    const SpaceParams& p = space_of(f);
    const LevelProfile profile(f, SamplePlan::build(p, cfg));
    const double inv_alpha = 1.0 / p.alpha;
    const double inv_n = 1.0 / static_cast<double>(p.n);
    std::vector<double> sorted(t_grid.begin(), t_grid.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::vector<DiagnosticRow> rows;
    rows.reserve(sorted.size());
    for (double t : sorted) {
        if (!(t > 0.0 && t < 1.0))
            throw std::invalid_argument("level_monotonicity_diagnostic: levels must lie in (0,1)");
        const Estimate m = profile.mu(t);
        const double tp = std::pow(t, inv_alpha);
        const double g = tp * (std::pow(m.mean, inv_n) + 1.0);
        const double hi = tp * (std::pow(m.mean + m.std_error, inv_n) + 1.0);
        const double lo = tp * (std::pow(std::max(0.0, m.mean - m.std_error), inv_n) + 1.0);
        rows.push_back({t, g, 0.5 * (hi - lo)});
    }
    return rows;
}

} // namespace bergman
