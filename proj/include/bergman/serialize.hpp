#pragma once

// JSON serialization of the toolkit's value types. Complex numbers are
// [re, im] pairs and multi-indices are integer arrays; round trips are
// bit-faithful for finite doubles (shortest round-trip formatting).

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bergman/bounds.hpp"
#include "bergman/extremize.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/space.hpp"

namespace bergman {

using json = nlohmann::json;

inline json to_json(const complexd& c) { return json::array({c.real(), c.imag()}); }

inline complexd complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const SpaceParams& p) {
    json j{{"n", p.n}, {"alpha", p.alpha}};
    if (p.wehrl_k) j["k"] = *p.wehrl_k;
    return j;
}

inline SpaceParams space_params_from_json(const json& j) {
    if (j.contains("k") && !j["k"].is_null()) {
        SpaceParams p = SpaceParams::discrete_series(j.at("n").get<int>(), j["k"].get<int>());
        if (j.contains("alpha") && std::fabs(j["alpha"].get<double>() - p.alpha) > 1e-12)
            throw std::invalid_argument("inconsistent alpha and k");
        return p;
    }
    return SpaceParams::make(j.at("n").get<int>(), j.at("alpha").get<double>());
}

inline json to_json(const Point& z) {
    json coords = json::array();
    for (const auto& c : z.coords()) coords.push_back(to_json(c));
    return coords;
}

inline Point point_from_json(const json& j) {
    std::vector<complexd> coords;
    for (const auto& c : j) coords.push_back(complex_from_json(c));
    return Point(std::move(coords));
}

inline json to_json(const PolyFunction& f) {
    json coeffs = json::array();
    for (const auto& [m, c] : f.coeffs())
        coeffs.push_back(json{{"m", m.exponents}, {"c", to_json(c)}});
    return json{{"params", to_json(f.params())}, {"kind", "poly"}, {"coeffs", coeffs}};
}

inline json to_json(const CoherentState& cs) {
    return json{{"params", to_json(cs.params())},
                {"kind", "coherent"},
                {"center", to_json(cs.center())},
                {"theta", cs.theta()}};
}

inline json to_json(const MixedState& ms) {
    json states = json::array();
    for (const auto& s : ms.states()) states.push_back(to_json(s));
    return json{{"params", to_json(ms.params())},
                {"kind", "mixed"},
                {"weights", ms.weights()},
                {"states", states}};
}

inline json to_json(const StateVariant& f) {
    return std::visit([](const auto& g) { return to_json(g); }, f);
}

inline StateVariant state_from_json(const json& j) {
    const SpaceParams params = space_params_from_json(j.at("params"));
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "poly") {
        PolyFunction::CoeffMap coeffs;
        for (const auto& e : j.at("coeffs"))
            coeffs.emplace(make_multi_index(e.at("m").get<std::vector<int>>()),
                           complex_from_json(e.at("c")));
        return PolyFunction(params, std::move(coeffs));
    }
    if (kind == "coherent")
        return CoherentState(params, point_from_json(j.at("center")),
                             j.value("theta", 0.0));
    if (kind == "mixed") {
        std::vector<PolyFunction> states;
        for (const auto& e : j.at("states")) {
            PolyFunction::CoeffMap coeffs;
            for (const auto& ce : e.at("coeffs"))
                coeffs.emplace(make_multi_index(ce.at("m").get<std::vector<int>>()),
                               complex_from_json(ce.at("c")));
            states.emplace_back(space_params_from_json(e.at("params")), std::move(coeffs));
        }
        return MixedState(j.at("weights").get<std::vector<double>>(), std::move(states));
    }
    throw std::invalid_argument("unknown state kind '" + kind + "'");
}

inline json to_json(const Estimate& e) {
    return json{{"mean", e.mean}, {"stderr", e.std_error}, {"n", e.n}};
}

inline Estimate estimate_from_json(const json& j) {
    return Estimate{j.at("mean").get<double>(), j.at("stderr").get<double>(),
                    j.at("n").get<std::size_t>()};
}

inline json to_json(const CoherenceInfo& d) {
    return json{{"sup_u", d.sup_u},
                {"z0_fit", to_json(d.z0_fit)},
                {"overlap", d.overlap},
                {"g_prime_proxy", d.g_prime_proxy}};
}

inline json to_json(const CheckReport& r) {
    json j{{"check", r.check},       {"params", to_json(r.params)}, {"probe", r.probe},
           {"lhs", to_json(r.lhs)},  {"rhs", r.rhs},                {"margin", r.margin},
           {"sigmas", r.sigmas},     {"verdict", to_string(r.verdict)},
           {"seed", r.seed},         {"reruns", r.reruns},          {"renormalized", r.renormalized}};
    if (r.coherence) j["coherence"] = to_json(*r.coherence);
    return j;
}

inline json to_json(const ExtremalReport& r) {
    json basis = json::array();
    for (const auto& m : r.basis) basis.push_back(m.exponents);
    json coeffs = json::array();
    for (const auto& c : r.coefficients) coeffs.push_back(to_json(c));
    json restarts = json::array();
    for (const auto& s : r.restarts)
        restarts.push_back(json{{"index", s.index},
                                {"warm_start", s.warm_start},
                                {"iterations", s.iterations},
                                {"accepted_steps", s.accepted_steps},
                                {"line_search_failed", s.line_search_failed},
                                {"gate_passed", s.gate_passed},
                                {"first_order_stop", s.first_order_stop},
                                {"saa_value", s.saa_value},
                                {"fresh_value", s.fresh_value},
                                {"fresh_stderr", s.fresh_std_error}});
    json j{{"basis", basis},
           {"coefficients", coeffs},
           {"saa_value", r.saa_value},
           {"fresh", to_json(r.fresh)},
           {"bound", r.bound},
           {"gap", r.gap},
           {"diagnostic", to_json(r.diagnostic)},
           {"restarts", restarts},
           {"gradient_gate_passed", r.gradient_gate_passed},
           {"seed", r.seed}};
    if (!r.traces.empty()) j["traces"] = r.traces;
    return j;
}

// Atomic file write: temp file in the target directory, then rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

} // namespace bergman
