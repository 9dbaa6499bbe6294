#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bergman/generators.hpp"
#include "bergman/serialize.hpp"

using namespace bergman;

TEST_CASE("space params round trip") {
    const auto p = SpaceParams::make(2, 3.5);
    const auto back = space_params_from_json(to_json(p));
    CHECK(back.n == 2);
    CHECK(back.alpha == 3.5);

    const auto ds = SpaceParams::discrete_series(2, 4);
    const json j = to_json(ds);
    CHECK(j.at("k").get<int>() == 4);
    const auto ds_back = space_params_from_json(j);
    CHECK(ds_back.alpha == 12.0);
    CHECK(ds_back.wehrl_k.value() == 4);

    json bad = j;
    bad["alpha"] = 11.0; // inconsistent with k
    CHECK_THROWS_AS(space_params_from_json(bad), std::invalid_argument);
}

TEST_CASE("polynomial round trip is bit-faithful") {
    const auto p = SpaceParams::make(2, 3.0);
    PolyFunction::CoeffMap coeffs;
    coeffs.emplace(make_multi_index({0, 0}), complexd(0.1, -1e-300));
    coeffs.emplace(make_multi_index({3, 2}), complexd(-3.141592653589793, 2.718281828459045e-7));
    coeffs.emplace(make_multi_index({0, 5}), complexd(5e300 * 1e-305, 1.0 / 3.0));
    const PolyFunction f(p, coeffs);

    const std::string text = to_json(f).dump();
    const auto back = std::get<PolyFunction>(state_from_json(json::parse(text)));
    REQUIRE(back.coeffs().size() == f.coeffs().size());
    for (const auto& [m, c] : f.coeffs()) {
        const auto it = back.coeffs().find(m);
        REQUIRE(it != back.coeffs().end());
        CHECK(it->second.real() == c.real());
        CHECK(it->second.imag() == c.imag());
    }
}

TEST_CASE("coherent and mixed state round trips") {
    const auto p = SpaceParams::make(1, 2.0);
    const CoherentState cs(p, make_point({complexd(0.123456789012345, -0.3)}), 0.7071067811865476);
    const auto cs_back = std::get<CoherentState>(state_from_json(json::parse(to_json(cs).dump())));
    CHECK(cs_back.center()[0] == cs.center()[0]);
    CHECK(cs_back.theta() == cs.theta());

    const MixedState ms = random_mixed_state(p, 3, 2, 5);
    const auto ms_back = std::get<MixedState>(state_from_json(json::parse(to_json(ms).dump())));
    CHECK(ms_back.rank() == 2);
    CHECK(ms_back.weights()[0] == ms.weights()[0]);
    const Point at = make_point({complexd(0.2, 0.4)});
    CHECK(husimi(ms_back, at) == husimi(ms, at));

    CHECK_THROWS_AS(state_from_json(json{{"params", to_json(p)}, {"kind", "spline"}}),
                    std::invalid_argument);
}

TEST_CASE("estimate schema") {
    const Estimate e{0.5, 0.001, 20000};
    const json j = to_json(e);
    CHECK(j.at("mean") == 0.5);
    CHECK(j.at("stderr") == 0.001);
    CHECK(j.at("n") == 20000);
    const Estimate back = estimate_from_json(j);
    CHECK(back.mean == e.mean);
    CHECK(back.std_error == e.std_error);
}

TEST_CASE("check report schema") {
    CheckReport r;
    r.check = "wehrl";
    r.params = SpaceParams::make(1, 2.0);
    r.probe = "power:2";
    r.lhs = Estimate{0.333, 0.002, 10000};
    r.rhs = 1.0 / 3.0;
    r.margin = r.rhs - r.lhs.mean;
    r.sigmas = r.margin / r.lhs.std_error;
    r.verdict = Verdict::equality_band;
    r.seed = 42;
    const json j = to_json(r);
    for (const char* key :
         {"check", "params", "probe", "lhs", "rhs", "margin", "sigmas", "verdict", "seed"})
        CHECK(j.contains(key));
    CHECK(j.at("verdict") == "equality-band");
    CHECK(j.at("lhs").contains("stderr"));
}

TEST_CASE("extremal report schema") {
    const auto p = SpaceParams::make(1, 2.0);
    McConfig cfg;
    cfg.n_samples = 2000;
    cfg.seed = 3;
    const auto prob = SaaProblem::build(p, ConvexProbe::power(2.0), 2, cfg);
    const auto report = saa_maximize(prob, 1, 9, true);
    const json j = to_json(report);
    for (const char* key : {"basis", "coefficients", "saa_value", "fresh", "bound", "gap",
                            "diagnostic", "restarts", "gradient_gate_passed", "seed", "traces"})
        CHECK(j.contains(key));
    CHECK(j.at("coefficients").size() == 3);
    CHECK(j.at("restarts").size() == 2);
}

TEST_CASE("verdict strings") {
    CHECK(to_string(Verdict::holds) == "holds");
    CHECK(to_string(Verdict::equality_band) == "equality-band");
    CHECK(to_string(Verdict::violated) == "violated-beyond-3sigma");
}

TEST_CASE("atomic file write") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bergman_serialize_test";
    fs::remove_all(dir);
    const fs::path file = dir / "report.json";
    write_file_atomic(file, "{\"a\":1}");
    std::ifstream in(file);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "{\"a\":1}");
    // overwrite
    write_file_atomic(file, "{\"a\":2}");
    std::ifstream in2(file);
    std::string content2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
    CHECK(content2 == "{\"a\":2}");
    CHECK(!fs::exists(dir / "report.json.tmp"));
    fs::remove_all(dir);
}
