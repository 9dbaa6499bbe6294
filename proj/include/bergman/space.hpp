#pragma once

// Weighted Bergman spaces A_alpha on B_N (alpha > N): parameters and the
// normalizing constant c_alpha = Gamma(alpha) / (N! Gamma(alpha - N)),
// exact monomial calculus
//
//   ||z^m||^2 = m! Gamma(alpha) / Gamma(alpha + |m|),
//
// polynomial test functions, coherent states
//
//   phi_{z0}(z) = ((1 - |z0|^2) / (1 - <z,z0>)^2)^{alpha/2},
//
// mixtures (density operators), convex probes, and the Husimi function
// u_f(z) = |f(z)|^2 (1 - |z|^2)^alpha = |<phi_z, f>|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/special.hpp"

namespace bergman {

struct SpaceParams {
    int n = 1;
    double alpha = 2.0;
    std::optional<int> wehrl_k; // set when alpha = (N+1)k is meant
    double c_alpha = 1.0;

    static SpaceParams make(int n, double alpha) {
        if (n < 1) throw std::invalid_argument("SpaceParams: dimension must be >= 1");
        if (!(alpha > static_cast<double>(n)))
            throw std::invalid_argument("SpaceParams: alpha must be strictly greater than N");
        SpaceParams p;
        p.n = n;
        p.alpha = alpha;
        p.c_alpha = std::exp(std::lgamma(alpha) - log_factorial(n) - std::lgamma(alpha - n));
        return p;
    }

    static SpaceParams discrete_series(int n, int k) {
        if (k < 1) throw std::invalid_argument("SpaceParams: k must be a positive integer");
        SpaceParams p = make(n, static_cast<double>((n + 1) * k));
        p.wehrl_k = k;
        return p;
    }

    bool same_space(const SpaceParams& o) const { return n == o.n && alpha == o.alpha; }
};

inline double normalizing_constant(const SpaceParams& p) { return p.c_alpha; }

struct MultiIndex {
    std::vector<int> exponents;

    int degree() const {
        int d = 0;
        for (int e : exponents) d += e;
        return d;
    }
    int dim() const { return static_cast<int>(exponents.size()); }
    auto operator<=>(const MultiIndex&) const = default;
};

inline MultiIndex make_multi_index(std::vector<int> exponents) {
    for (int e : exponents)
        if (e < 0) throw std::invalid_argument("MultiIndex: exponents must be nonnegative");
    return MultiIndex{std::move(exponents)};
}

// All multi-indices of dimension n with degree <= d, ordered by degree
// then lexicographically.
inline std::vector<MultiIndex> multi_indices_up_to(int n, int d) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n - 1) {
            cur[static_cast<std::size_t>(pos)] = remaining;
            out.push_back(MultiIndex{cur});
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            cur[static_cast<std::size_t>(pos)] = e;
            self(self, pos + 1, remaining - e);
        }
    };
    for (int deg = 0; deg <= d; ++deg) rec(rec, 0, deg);
    return out;
}

inline double monomial_norm_sq(const MultiIndex& m, const SpaceParams& p) {
    if (m.dim() != p.n) throw std::invalid_argument("monomial_norm_sq: dimension mismatch");
    double lg = std::lgamma(p.alpha) - std::lgamma(p.alpha + m.degree());
    for (int e : m.exponents) lg += log_factorial(e);
    return std::exp(lg);
}

class PolyFunction {
public:
    static constexpr int kDegreeCap = 24;

    using CoeffMap = std::map<MultiIndex, complexd>;

    PolyFunction(SpaceParams params, CoeffMap coeffs, int degree_cap = kDegreeCap)
        : params_(params), coeffs_(std::move(coeffs)) {
        degree_ = 0;
        for (auto it = coeffs_.begin(); it != coeffs_.end();) {
            if (it->first.dim() != params_.n)
                throw std::invalid_argument("PolyFunction: multi-index dimension mismatch");
            for (int e : it->first.exponents)
                if (e < 0) throw std::invalid_argument("PolyFunction: negative exponent");
            if (it->first.degree() > degree_cap)
                throw std::invalid_argument("PolyFunction: degree exceeds cap");
            if (it->second == complexd(0.0, 0.0)) {
                it = coeffs_.erase(it);
            } else {
                degree_ = std::max(degree_, it->first.degree());
                ++it;
            }
        }
    }

    static PolyFunction zero(const SpaceParams& params) { return PolyFunction(params, {}); }

    static PolyFunction constant(const SpaceParams& params, complexd value) {
        CoeffMap m;
        if (value != complexd(0.0, 0.0))
            m.emplace(MultiIndex{std::vector<int>(static_cast<std::size_t>(params.n), 0)}, value);
        return PolyFunction(params, std::move(m));
    }

    const SpaceParams& params() const { return params_; }
    const CoeffMap& coeffs() const { return coeffs_; }
    int degree() const { return degree_; }
    bool is_zero() const { return coeffs_.empty(); }

    complexd eval(const Point& z) const {
        if (z.dim() != params_.n) throw std::invalid_argument("PolyFunction::eval: dimension mismatch");
        const auto pows = coordinate_powers(z);
        complexd acc(0.0, 0.0);
        for (const auto& [m, c] : coeffs_) {
            complexd mono(1.0, 0.0);
            for (int k = 0; k < params_.n; ++k)
                mono *= pows[static_cast<std::size_t>(k)][static_cast<std::size_t>(m.exponents[static_cast<std::size_t>(k)])];
            acc += c * mono;
        }
        return acc;
    }

    // Value and holomorphic gradient (df/dz_k) at z.
    std::pair<complexd, std::vector<complexd>> eval_gradient(const Point& z) const {
        const auto pows = coordinate_powers(z);
        complexd value(0.0, 0.0);
        std::vector<complexd> grad(static_cast<std::size_t>(params_.n), complexd(0.0, 0.0));
        for (const auto& [m, c] : coeffs_) {
            complexd mono(1.0, 0.0);
            for (int k = 0; k < params_.n; ++k)
                mono *= pows[static_cast<std::size_t>(k)][static_cast<std::size_t>(m.exponents[static_cast<std::size_t>(k)])];
            value += c * mono;
            for (int k = 0; k < params_.n; ++k) {
                const int e = m.exponents[static_cast<std::size_t>(k)];
                if (e == 0) continue;
                complexd dm(static_cast<double>(e), 0.0);
                for (int j = 0; j < params_.n; ++j) {
                    const int ej = m.exponents[static_cast<std::size_t>(j)] - (j == k ? 1 : 0);
                    dm *= pows[static_cast<std::size_t>(j)][static_cast<std::size_t>(ej)];
                }
                grad[static_cast<std::size_t>(k)] += c * dm;
            }
        }
        return {value, std::move(grad)};
    }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& [m, c] : coeffs_) s += std::norm(c) * monomial_norm_sq(m, params_);
        return s;
    }

    PolyFunction scaled(complexd factor) const {
        CoeffMap m = coeffs_;
        for (auto& [k, v] : m) v *= factor;
        return PolyFunction(params_, std::move(m));
    }

    PolyFunction minus(const PolyFunction& o) const {
        CoeffMap m = coeffs_;
        for (const auto& [k, v] : o.coeffs_) {
            auto it = m.find(k);
            if (it == m.end()) m.emplace(k, -v);
            else it->second -= v;
        }
        return PolyFunction(params_, std::move(m));
    }

private:
    std::vector<std::vector<complexd>> coordinate_powers(const Point& z) const {
        std::vector<std::vector<complexd>> pows(static_cast<std::size_t>(params_.n));
        for (int k = 0; k < params_.n; ++k) {
            auto& pk = pows[static_cast<std::size_t>(k)];
            pk.resize(static_cast<std::size_t>(degree_) + 1);
            pk[0] = complexd(1.0, 0.0);
            for (int e = 1; e <= degree_; ++e) pk[static_cast<std::size_t>(e)] = pk[static_cast<std::size_t>(e - 1)] * z[static_cast<std::size_t>(k)];
        }
        return pows;
    }

    SpaceParams params_;
    CoeffMap coeffs_;
    int degree_ = 0;
};

inline complexd inner_product(const PolyFunction& f, const PolyFunction& g) {
    if (!f.params().same_space(g.params()))
        throw std::invalid_argument("inner_product: space parameters mismatch");
    // Conjugate-linear in the first argument.
    complexd s(0.0, 0.0);
    for (const auto& [m, c] : f.coeffs()) {
        auto it = g.coeffs().find(m);
        if (it == g.coeffs().end()) continue;
        s += std::conj(c) * it->second * monomial_norm_sq(m, f.params());
    }
    return s;
}

// Reproducing kernel K_w(z) = (1 - <z,w>)^{-alpha}, principal branch.
// Re(1 - <z,w>) > 0 on B_N x B_N, so the branch is single valued.
inline complexd kernel_eval(const Point& w, const Point& z, const SpaceParams& p) {
    const complexd q = complexd(1.0, 0.0) - hermitian_inner(z, w);
    return std::exp(-p.alpha * std::log(q));
}

class CoherentState {
public:
    CoherentState(SpaceParams params, Point center, double theta = 0.0)
        : params_(params), center_(std::move(center)), theta_(theta) {
        if (center_.dim() != params_.n)
            throw std::invalid_argument("CoherentState: dimension mismatch");
    }

    const SpaceParams& params() const { return params_; }
    const Point& center() const { return center_; }
    double theta() const { return theta_; }

    // e^{i theta} ((1-|z0|^2)/(1-<z,z0>)^2)^{alpha/2}, principal branch.
    complexd eval(const Point& z) const {
        const complexd q = complexd(1.0, 0.0) - hermitian_inner(z, center_);
        const complexd expo = 0.5 * params_.alpha * (std::log1p(-center_.norm_sq()) - 2.0 * std::log(q))
                              + complexd(0.0, theta_);
        return std::exp(expo);
    }

    std::pair<complexd, std::vector<complexd>> eval_gradient(const Point& z) const {
        const complexd v = eval(z);
        const complexd q = complexd(1.0, 0.0) - hermitian_inner(z, center_);
        std::vector<complexd> grad(static_cast<std::size_t>(params_.n));
        for (int k = 0; k < params_.n; ++k)
            grad[static_cast<std::size_t>(k)] = v * params_.alpha * std::conj(center_[static_cast<std::size_t>(k)]) / q;
        return {v, std::move(grad)};
    }

    double norm_sq() const { return 1.0; } // exact, for every admissible alpha

private:
    SpaceParams params_;
    Point center_;
    double theta_;
};

// Truncated monomial expansion of a coherent state about the origin:
// phi_{z0}(z) = (1-|z0|^2)^{alpha/2} sum_m Gamma(alpha+|m|)/(Gamma(alpha) m!) conj(z0)^m z^m.
inline PolyFunction expand_coherent(const CoherentState& cs, int degree) {
    if (degree < 0) throw std::invalid_argument("expand_coherent: degree must be >= 0");
    const auto& p = cs.params();
    const auto& z0 = cs.center();
    const complexd front = std::exp(complexd(0.5 * p.alpha * std::log1p(-z0.norm_sq()), cs.theta()));
    PolyFunction::CoeffMap coeffs;
    for (const auto& m : multi_indices_up_to(p.n, degree)) {
        double lg = std::lgamma(p.alpha + m.degree()) - std::lgamma(p.alpha);
        complexd c(1.0, 0.0);
        for (int k = 0; k < p.n; ++k) {
            lg -= log_factorial(m.exponents[static_cast<std::size_t>(k)]);
            for (int e = 0; e < m.exponents[static_cast<std::size_t>(k)]; ++e)
                c *= std::conj(z0[static_cast<std::size_t>(k)]);
        }
        c *= front * std::exp(lg);
        if (c != complexd(0.0, 0.0)) coeffs.emplace(m, c);
    }
    return PolyFunction(p, std::move(coeffs), std::max(degree, PolyFunction::kDegreeCap));
}

struct RankDeficiencyError : std::invalid_argument {
    explicit RankDeficiencyError(std::size_t idx)
        : std::invalid_argument("gram_schmidt: vector " + std::to_string(idx) + " is linearly dependent"),
          index(idx) {}
    std::size_t index;
};

// Orthonormalizes a linearly independent family with exact inner
// products. The residual-norm pivot test equals the ratio of successive
// Gram determinants, so it implements the determinant > 1e-12 gate.
inline std::vector<PolyFunction> gram_schmidt(const std::vector<PolyFunction>& fs) {
    std::vector<PolyFunction> out;
    out.reserve(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        PolyFunction v = fs[i];
        const double original = v.norm_sq();
        if (!(original > 0.0)) throw RankDeficiencyError(i);
        for (int pass = 0; pass < 2; ++pass) // two projection passes
            for (const auto& q : out)
                v = v.minus(q.scaled(inner_product(q, v)));
        const double resid = v.norm_sq();
        if (!(resid > 1e-12 * original)) throw RankDeficiencyError(i);
        out.push_back(v.scaled(complexd(1.0 / std::sqrt(resid), 0.0)));
    }
    return out;
}

class MixedState {
public:
    // Re-normalizes the weights and re-orthonormalizes the family; the
    // resulting Gram matrix is the identity to 1e-10. Inputs already
    // within tolerance are kept bit-identical, so serialized states
    // survive a round trip unchanged.
    MixedState(std::vector<double> weights, std::vector<PolyFunction> states) {
        if (weights.size() != states.size() || weights.empty())
            throw std::invalid_argument("MixedState: need matching nonempty weights and states");
        for (std::size_t i = 1; i < states.size(); ++i)
            if (!states[i].params().same_space(states[0].params()))
                throw std::invalid_argument("MixedState: space parameters mismatch");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw std::invalid_argument("MixedState: weights must be positive");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            for (double& w : weights) w /= sum;

        double gram_deviation = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double expect = (i == j) ? 1.0 : 0.0;
                gram_deviation = std::max(
                    gram_deviation,
                    std::abs(inner_product(states[i], states[j]) - complexd(expect, 0.0)));
            }
        states_ = gram_deviation <= 1e-14 ? std::move(states) : gram_schmidt(states);
        weights_ = std::move(weights);
        for (std::size_t i = 0; i < states_.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const complexd g = inner_product(states_[i], states_[j]);
                const double expect = (i == j) ? 1.0 : 0.0;
                if (std::abs(g - complexd(expect, 0.0)) > 1e-10)
                    throw std::runtime_error("MixedState: orthonormalization failed");
            }
    }

    const SpaceParams& params() const { return states_.front().params(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<PolyFunction>& states() const { return states_; }
    std::size_t rank() const { return states_.size(); }

private:
    std::vector<double> weights_;
    std::vector<PolyFunction> states_;
};

// ---------------------------------------------------------------------------
// Husimi functions.

inline double husimi(const PolyFunction& f, const Point& z) {
    return std::norm(f.eval(z)) * std::exp(f.params().alpha * std::log1p(-z.norm_sq()));
}

inline double husimi(const CoherentState& cs, const Point& z) {
    // u(z) = ((1-|z0|^2)(1-|z|^2) / |1-<z,z0>|^2)^alpha; the ratio is
    // computed so that it is exactly 1 at z = z0, and the phase never
    // enters. It also equals 1 - |mobius(z0, z)|^2 raised to alpha.
    const complexd a = hermitian_inner(z, cs.center());
    const double ratio = (1.0 - cs.center().norm_sq()) * (1.0 - z.norm_sq()) /
                         std::norm(complexd(1.0, 0.0) - a);
    return std::exp(cs.params().alpha * std::log(ratio));
}

inline double husimi(const MixedState& ms, const Point& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < ms.rank(); ++i) s += ms.weights()[i] * husimi(ms.states()[i], z);
    return s;
}

inline double norm_sq(const PolyFunction& f) { return f.norm_sq(); }
inline double norm_sq(const CoherentState& cs) { return cs.norm_sq(); }
inline double norm_sq(const MixedState&) { return 1.0; } // trace-normalized

inline const SpaceParams& space_of(const PolyFunction& f) { return f.params(); }
inline const SpaceParams& space_of(const CoherentState& cs) { return cs.params(); }
inline const SpaceParams& space_of(const MixedState& ms) { return ms.params(); }

namespace detail {

template <class Pure>
inline void accumulate_husimi_gradient(const Pure& f, const Point& z, double weight,
                                       double& u, std::vector<double>& grad) {
    const auto [v, g] = f.eval_gradient(z);
    const double tau = std::exp(space_of(f).alpha * std::log1p(-z.norm_sq()));
    const double alpha = space_of(f).alpha;
    const double vv = std::norm(v);
    u += weight * vv * tau;
    const double boundary = -alpha * vv * tau / (1.0 - z.norm_sq());
    for (int k = 0; k < z.dim(); ++k) {
        const complexd cg = std::conj(v) * g[static_cast<std::size_t>(k)];
        grad[static_cast<std::size_t>(2 * k)] +=
            weight * (tau * 2.0 * cg.real() + boundary * 2.0 * z[static_cast<std::size_t>(k)].real());
        grad[static_cast<std::size_t>(2 * k + 1)] +=
            weight * (-tau * 2.0 * cg.imag() + boundary * 2.0 * z[static_cast<std::size_t>(k)].imag());
    }
}

} // namespace detail

// Husimi value and its real gradient in the 2N coordinates (x1,y1,...).
template <class F>
inline std::pair<double, std::vector<double>> husimi_with_gradient(const F& f, const Point& z) {
    double u = 0.0;
    std::vector<double> grad(static_cast<std::size_t>(2 * z.dim()), 0.0);
    if constexpr (std::is_same_v<F, MixedState>) {
        for (std::size_t i = 0; i < f.rank(); ++i)
            detail::accumulate_husimi_gradient(f.states()[i], z, f.weights()[i], u, grad);
    } else {
        detail::accumulate_husimi_gradient(f, z, 1.0, u, grad);
    }
    return {u, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Convex probes Phi: [0,1] -> R with Phi(0) = 0, from a closed catalog.

class ConvexProbe {
public:
    enum class Kind { power, hinge, xlogx };

    static ConvexProbe power(double p) {
        if (!(p >= 1.0)) throw std::invalid_argument("ConvexProbe: power exponent must be >= 1");
        return ConvexProbe(Kind::power, p);
    }
    static ConvexProbe hinge(double threshold) {
        if (!(threshold > 0.0 && threshold < 1.0))
            throw std::invalid_argument("ConvexProbe: hinge threshold must be in (0,1)");
        return ConvexProbe(Kind::hinge, threshold);
    }
    static ConvexProbe xlogx() { return ConvexProbe(Kind::xlogx, 0.0); }

    // "power:2", "power:1.5", "hinge:0.3", "xlogx"
    static ConvexProbe parse(std::string_view spec) {
        if (spec == "xlogx") return xlogx();
        const auto colon = spec.find(':');
        if (colon != std::string_view::npos) {
            const std::string_view head = spec.substr(0, colon);
            const std::string tail(spec.substr(colon + 1));
            try {
                if (head == "power") return power(std::stod(tail));
                if (head == "hinge") return hinge(std::stod(tail));
            } catch (const std::invalid_argument&) {
            } catch (const std::out_of_range&) {
            }
        }
        throw std::invalid_argument("ConvexProbe: unknown probe spec '" + std::string(spec) + "'");
    }

    double operator()(double s) const {
        switch (kind_) {
        case Kind::power: return s <= 0.0 ? 0.0 : std::pow(s, param_);
        case Kind::hinge: return s > param_ ? s - param_ : 0.0;
        case Kind::xlogx: return s > 0.0 ? s * std::log(s) : 0.0;
        }
        return 0.0;
    }

    // Right derivative on [0,1); -inf for xlogx at 0.
    double derivative(double s) const {
        switch (kind_) {
        case Kind::power:
            if (param_ == 1.0) return 1.0;
            return s <= 0.0 ? 0.0 : param_ * std::pow(s, param_ - 1.0);
        case Kind::hinge: return s >= param_ ? 1.0 : 0.0;
        case Kind::xlogx:
            return s > 0.0 ? std::log(s) + 1.0 : -std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    double param() const { return param_; }
    bool is_affine() const { return kind_ == Kind::power && param_ == 1.0; }

    std::string name() const {
        switch (kind_) {
        case Kind::power: return "power:" + format_param();
        case Kind::hinge: return "hinge:" + format_param();
        case Kind::xlogx: return "xlogx";
        }
        return "";
    }

    bool midpoint_convex_on_grid(int points = 101, double tol = 1e-12) const {
        for (int i = 0; i + 2 < points; ++i) {
            const double a = static_cast<double>(i) / (points - 1);
            const double b = static_cast<double>(i + 2) / (points - 1);
            if ((*this)(0.5 * (a + b)) > 0.5 * ((*this)(a) + (*this)(b)) + tol) return false;
        }
        return std::abs((*this)(0.0)) <= tol;
    }

private:
    ConvexProbe(Kind k, double p) : kind_(k), param_(p) {}

    std::string format_param() const {
        std::string s = std::to_string(param_);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    Kind kind_;
    double param_;
};

} // namespace bergman
