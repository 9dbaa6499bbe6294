// Command-line front end: statistical verification runs, extremal
// searches over truncated coefficient spaces, and closed-form tables.
//
// Exit codes: 0 success (no check violated), 2 usage error, 3 integration
// failure, 1 any other failure.

#include <chrono>
#include <clocale>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bergman/bergman.hpp"

namespace {

using namespace bergman;

complexd parse_complex(std::string s) {
    // forms: "0.5", "-0.3i", "0.1+0.2i", "i", "-i"
    if (s.empty()) throw std::invalid_argument("empty complex literal");
    auto parse_part = [](const std::string& t) -> double {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument("bad number '" + t + "'");
        return v;
    };
    if (s.back() == 'i' || s.back() == 'I') {
        s.pop_back();
        // split off a real part if present: find last +/- not at position 0 and not after e/E
        for (std::size_t i = s.size(); i-- > 1;) {
            if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
                return {parse_part(s.substr(0, i)), parse_part(s.substr(i))};
            }
        }
        return {0.0, parse_part(s)};
    }
    return {parse_part(s), 0.0};
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim)) out.push_back(item);
    return out;
}

Point parse_center(const std::string& spec, int n) {
    std::vector<complexd> coords;
    for (const auto& part : split(spec, ',')) coords.push_back(parse_complex(part));
    if (static_cast<int>(coords.size()) != n)
        throw std::invalid_argument("center has " + std::to_string(coords.size()) +
                                    " components, expected " + std::to_string(n));
    return Point(std::move(coords));
}

struct RunConfig {
    int n = 1;
    double alpha = 2.0;
    std::optional<int> k;
    std::string probe = "power:2";
    std::string fn = "coherent:0";
    std::string set = "ball:1";
    std::uint64_t seed = 1;
    std::size_t samples = 200000;
    int strata = 0;
    int nodes = 256;
    int degree = 6;
    int restarts = 5;
    std::string out;
    std::string format = "json";
    bool trace = false;

    SpaceParams space() const {
        return k ? SpaceParams::discrete_series(n, *k) : SpaceParams::make(n, alpha);
    }
    McConfig mc() const { return McConfig{samples, seed, strata}; }

    json to_json_config() const {
        json j{{"n", n},         {"alpha", space().alpha}, {"probe", probe},
               {"fn", fn},       {"set", set},             {"seed", seed},
               {"samples", samples}, {"strata", strata},   {"nodes", nodes},
               {"degree", degree},
               {"restarts", restarts}, {"format", format}};
        if (k) j["k"] = *k;
        return j;
    }
};

std::string regime_label(const SpaceParams& p) {
    const double k = p.alpha / (p.n + 1);
    return (std::fabs(k - std::round(k)) < 1e-12 && k >= 1.0) ? "discrete-series" : "exploratory";
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

StateVariant parse_pure_fn(const RunConfig& cfg, const SpaceParams& p) {
    const auto parts = split(cfg.fn, ':');
    if (parts.empty()) throw std::invalid_argument("empty --fn");
    if (parts[0] == "coherent") {
        if (parts.size() != 2) throw std::invalid_argument("usage: coherent:<z0 components>");
        return CoherentState(p, parse_center(parts[1], p.n));
    }
    if (parts[0] == "random") {
        if (parts.size() != 3) throw std::invalid_argument("usage: random:<degree>:<seed>");
        return random_unit_poly(p, std::stoi(parts[1]), std::stoull(parts[2]));
    }
    if (parts[0] == "poly") {
        if (parts.size() != 2) throw std::invalid_argument("usage: poly:<path to JSON>");
        std::ifstream in(parts[1]);
        if (!in) throw std::invalid_argument("cannot open " + parts[1]);
        json j = json::parse(in);
        StateVariant f = state_from_json(j);
        if (!space_of(f).same_space(p))
            throw std::invalid_argument("function space parameters do not match run parameters");
        return f;
    }
    throw std::invalid_argument("unknown --fn spec '" + cfg.fn + "'");
}

MixedState parse_mixed_fn(const RunConfig& cfg, const SpaceParams& p) {
    const auto parts = split(cfg.fn, ':');
    if (!parts.empty() && parts[0] == "mixed" && parts.size() == 2) {
        std::ifstream in(parts[1]);
        if (!in) throw std::invalid_argument("cannot open " + parts[1]);
        StateVariant f = state_from_json(json::parse(in));
        if (auto* ms = std::get_if<MixedState>(&f)) {
            if (!ms->params().same_space(p))
                throw std::invalid_argument("state space parameters do not match run parameters");
            return *ms;
        }
        throw std::invalid_argument("file does not contain a mixed state");
    }
    if (!parts.empty() && parts[0] == "random" && parts.size() == 3)
        return random_mixed_state(p, std::stoi(parts[1]), 3, std::stoull(parts[2]));
    if (!parts.empty() && parts[0] == "coherent" && parts.size() == 2) {
        // rank-1 projector onto the coherent state, via its truncation
        const PolyFunction trunc = expand_coherent(
            CoherentState(p, parse_center(parts[1], p.n)), PolyFunction::kDegreeCap);
        return MixedState({1.0}, {trunc});
    }
    throw std::invalid_argument("mixture --fn must be mixed:<path>, random:<deg>:<seed>, or coherent:<z0>");
}

SetSpec parse_set(const RunConfig& cfg, const SpaceParams& p, const StateVariant& fn) {
    const auto at = cfg.set.find('@');
    const std::string head = at == std::string::npos ? cfg.set : cfg.set.substr(0, at);
    const auto parts = split(head, ':');
    if (parts.empty()) throw std::invalid_argument("empty --set");
    if (parts[0] == "ball") {
        if (parts.size() != 2) throw std::invalid_argument("usage: ball:<measure>[@<center>]");
        Point center = at == std::string::npos ? Point::origin(p.n)
                                               : parse_center(cfg.set.substr(at + 1), p.n);
        return SetSpec::geodesic_ball(std::move(center), std::stod(parts[1]));
    }
    if (parts[0] == "annulus") {
        if (parts.size() != 3) throw std::invalid_argument("usage: annulus:<r1>:<r2>");
        return SetSpec::annulus(std::stod(parts[1]), std::stod(parts[2]));
    }
    if (parts[0] == "superlevel") {
        if (parts.size() != 2) throw std::invalid_argument("usage: superlevel:<level>");
        return SetSpec::superlevel(fn, std::stod(parts[1]));
    }
    throw std::invalid_argument("unknown --set spec '" + cfg.set + "'");
}

std::string reports_to_csv(const std::vector<CheckReport>& reports) {
    std::string out = "check,probe,lhs_mean,lhs_stderr,rhs,margin,sigmas,verdict,seed\n";
    char buf[512];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%llu\n",
                      r.check.c_str(), r.probe.c_str(), r.lhs.mean, r.lhs.std_error, r.rhs,
                      r.margin, r.sigmas, to_string(r.verdict).c_str(),
                      static_cast<unsigned long long>(r.seed));
        out += buf;
    }
    return out;
}

void emit(const RunConfig& cfg, const std::string& payload) {
    if (cfg.out.empty()) {
        std::cout << payload;
        if (payload.empty() || payload.back() != '\n') std::cout << '\n';
    } else {
        write_file_atomic(cfg.out, payload);
    }
}

int run_verify(const std::string& subject, const RunConfig& cfg) {
    const SpaceParams p = cfg.space();
    const McConfig mc = cfg.mc();
    std::vector<CheckReport> reports;

    if (subject == "wehrl") {
        const ConvexProbe probe = ConvexProbe::parse(cfg.probe);
        const StateVariant f = parse_pure_fn(cfg, p);
        if (auto* poly = std::get_if<PolyFunction>(&f))
            reports.push_back(check_wehrl(*poly, probe, mc));
        else if (auto* cs = std::get_if<CoherentState>(&f))
            reports.push_back(check_wehrl(*cs, probe, mc));
        else
            throw std::invalid_argument("verify wehrl expects a pure state; use verify mixture");
    } else if (subject == "mixture") {
        const ConvexProbe probe = ConvexProbe::parse(cfg.probe);
        const MixtureCheck mix = check_mixture_detail(parse_mixed_fn(cfg, p), probe, mc);
        reports.push_back(mix.main);
        reports.push_back(mix.convexity);
    } else if (subject == "faber-krahn") {
        const StateVariant f = parse_pure_fn(cfg, p);
        const SetSpec set = parse_set(cfg, p, f);
        if (auto* poly = std::get_if<PolyFunction>(&f))
            reports.push_back(check_faber_krahn(*poly, set, mc));
        else if (auto* cs = std::get_if<CoherentState>(&f))
            reports.push_back(check_faber_krahn(*cs, set, mc));
        else
            throw std::invalid_argument("verify faber-krahn expects a pure state");
    } else if (subject == "pointwise") {
        const StateVariant f = parse_pure_fn(cfg, p);
        std::visit([&](const auto& g) { reports.push_back(check_pointwise(g, 4, mc)); }, f);
    } else if (subject == "identities") {
        McConfig id_mc = mc;
        id_mc.n_samples = std::min<std::size_t>(mc.n_samples, 50000);
        reports = identity_suite(p, id_mc);
    } else {
        throw std::invalid_argument("unknown verify subject '" + subject + "'");
    }

    bool violated = false;
    for (const auto& r : reports) violated = violated || r.verdict == Verdict::violated;

    if (cfg.format == "csv") {
        emit(cfg, reports_to_csv(reports));
    } else {
        json jreports = json::array();
        for (const auto& r : reports) jreports.push_back(to_json(r));
        json envelope{{"config", cfg.to_json_config()},
                      {"subject", subject},
                      {"regime", regime_label(p)},
                      {"timestamp", timestamp_utc()},
                      {"reports", jreports}};
        emit(cfg, envelope.dump(2));
    }
    return violated ? 1 : 0;
}

int run_extremize(const RunConfig& cfg) {
    const SpaceParams p = cfg.space();
    const ConvexProbe probe = ConvexProbe::parse(cfg.probe);
    const SaaProblem problem = SaaProblem::build(p, probe, cfg.degree, cfg.mc());
    const ExtremalReport report = saa_maximize(problem, cfg.restarts, cfg.seed, cfg.trace);

    json envelope{{"config", cfg.to_json_config()},
                  {"regime", regime_label(p)},
                  {"timestamp", timestamp_utc()},
                  {"report", to_json(report)}};
    emit(cfg, envelope.dump(2));

    const bool bound_ok =
        report.fresh.mean - 3.0 * report.fresh.std_error <= report.bound + 1e-9;
    return (report.gradient_gate_passed && bound_ok) ? 0 : 1;
}

int run_table(const std::string& what, const RunConfig& cfg, const std::vector<double>& s_grid,
              const std::vector<double>& alphas) {
    std::vector<std::pair<double, double>> rows;
    auto space_for = [&](double alpha) {
        RunConfig c = cfg;
        c.alpha = alpha;
        c.k.reset();
        return c.space();
    };
    const std::vector<double> alpha_grid = alphas.empty() ? std::vector<double>{cfg.space().alpha}
                                                          : alphas;
    if (what == "rhs") {
        const ConvexProbe probe = ConvexProbe::parse(cfg.probe);
        for (double a : alpha_grid)
            rows.emplace_back(a, sharp_wehrl_constant(probe, space_for(a), cfg.nodes));
    } else if (what == "j") {
        const SpaceParams p = cfg.space();
        const std::vector<double> grid = s_grid.empty() ? std::vector<double>{0.5, 1.0, 2.0} : s_grid;
        for (double s : grid) rows.emplace_back(s, faber_krahn_bound(s, p, cfg.nodes));
    } else if (what == "entropy-bound") {
        for (double a : alpha_grid)
            rows.emplace_back(a, entropy_lower_bound(space_for(a), cfg.nodes));
    } else {
        throw std::invalid_argument("unknown table '" + what + "'");
    }

    std::string payload;
    if (cfg.format == "json") {
        json jrows = json::array();
        for (const auto& [param, value] : rows) jrows.push_back(json{{"parameter", param}, {"value", value}});
        payload = json{{"table", what}, {"rows", jrows}}.dump(2);
    } else {
        payload = "parameter,value\n";
        char buf[128];
        for (const auto& [param, value] : rows) {
            std::snprintf(buf, sizeof buf, "%.12g,%.9f\n", param, value);
            payload += buf;
        }
    }
    emit(cfg, payload);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C");
    CLI::App app{"numerical toolkit for weighted Bergman spaces on the complex hyperbolic ball"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string subject, what;
    std::vector<double> s_grid, alphas;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--n", cfg.n, "complex dimension N");
        cmd->add_option("--alpha", cfg.alpha, "weight alpha (> N)");
        cmd->add_option("--k", cfg.k, "discrete-series index: alpha = (N+1)k");
        cmd->add_option("--seed", cfg.seed, "random seed");
        cmd->add_option("--samples", cfg.samples, "Monte Carlo sample count");
        cmd->add_option("--strata", cfg.strata, "radial strata count (0 = none)");
        cmd->add_option("--nodes", cfg.nodes, "deterministic quadrature resolution");
        cmd->add_option("--out", cfg.out, "output file (written atomically)");
        cmd->add_option("--format", cfg.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* verify = app.add_subcommand("verify", "run a verification check");
    verify->add_option("subject", subject, "wehrl | mixture | faber-krahn | pointwise | identities")
        ->required();
    add_common(verify);
    verify->add_option("--probe", cfg.probe, "convex probe: power:<p> | hinge:<t> | xlogx");
    verify->add_option("--fn", cfg.fn, "coherent:<z0> | poly:<path> | random:<deg>:<seed> | mixed:<path>");
    verify->add_option("--set", cfg.set, "ball:<s>[@<center>] | annulus:<r1>:<r2> | superlevel:<t>");

    CLI::App* extremize = app.add_subcommand("extremize", "search for functional maximizers");
    add_common(extremize);
    extremize->add_option("--probe", cfg.probe, "convex probe");
    extremize->add_option("--degree", cfg.degree, "coefficient degree cap");
    extremize->add_option("--restarts", cfg.restarts, "random restarts");
    extremize->add_flag("--trace", cfg.trace, "record iteration traces");

    CLI::App* table = app.add_subcommand("table", "print closed-form tables");
    table->add_option("what", what, "rhs | j | entropy-bound")->required();
    add_common(table);
    table->add_option("--probe", cfg.probe, "convex probe (for rhs)");
    table->add_option("--s", s_grid, "measure values for the j table")->delimiter(',');
    table->add_option("--alphas", alphas, "alpha grid for rhs / entropy-bound")->delimiter(',');
    table->get_option("--format")->default_str("csv"); // tables default to csv

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* active = verify->parsed() ? verify : extremize->parsed() ? extremize : table;
        if (cfg.k && active->count("--alpha") &&
            cfg.alpha != static_cast<double>((cfg.n + 1) * *cfg.k))
            throw std::invalid_argument("--alpha and --k disagree; pass one or the other");
        if (verify->parsed()) return run_verify(subject, cfg);
        if (extremize->parsed()) return run_extremize(cfg);
        if (table->parsed()) {
            if (!table->get_option("--format")->count()) cfg.format = "csv";
            return run_table(what, cfg, s_grid, alphas);
        }
        return 2;
    } catch (const bergman::IntegrationError& e) {
        std::cerr << "integration failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
