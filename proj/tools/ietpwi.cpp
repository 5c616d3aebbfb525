#include "ietpwi/breaking.hpp"
#include "ietpwi/errors.hpp"
#include "ietpwi/iet_core.hpp"
#include "ietpwi/pwi.hpp"
#include "ietpwi/rauzy.hpp"
#include "ietpwi/spectral.hpp"
#include "ietpwi/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ietpwi;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string perm = "4 3 2 1";
    std::vector<double> lambda;
    bool random_lambda = false;
    std::uint64_t seed = 1;
    bool json_only = false;

    int steps = 10;          // Rauzy steps (induct) or Zorich steps (zorich, lyapunov)
    int batches = 20;
    int levels = 25;         // N for curves
    int limit_level = 60;    // level of the limit-curve proxy
    int theta_levels = 1200; // horizon for the rotation sequence
    int qe_levels = 12;
    int frame_steps = 600;   // Zorich steps for the stable frame
    double delta = 0.0;      // 0 selects the halving policy from 0.5
    std::vector<double> theta;
    std::string theta_mode = "sample";  // sample | explicit | uniform
    int cut_depth = 2;
    double tol_nontrivial = 1e-3;
    double x = 0.1;
    int orbit_steps = 20;
    std::string out;
    std::string svg, csv;
    std::vector<int> at;
};

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
    f << text;
}

Iet make_iet(const RunConfig& cfg) {
    const Permutation p = Permutation::parse_monodromy(cfg.perm);
    std::vector<double> lambda = cfg.lambda;
    if (cfg.random_lambda || lambda.empty()) {
        std::mt19937_64 rng(cfg.seed);
        std::exponential_distribution<double> e(1.0);
        lambda.clear();
        double s = 0.0;
        for (int i = 0; i < p.d(); ++i) s += lambda.emplace_back(e(rng));
        for (double& v : lambda) v /= s;
    }
    if (static_cast<int>(lambda.size()) != p.d()) throw Error(ErrorKind::InvalidInput, "lambda has the wrong size");
    return Iet(p, lambda);
}

struct ThetaChoice {
    Lift v;
    double delta = 0.0;
    json info;
};

ThetaChoice choose_theta(const RunConfig& cfg, const Iet& iet, const InductionTrace& trace) {
    ThetaChoice c;
    if (cfg.theta_mode == "explicit") {
        if (static_cast<int>(cfg.theta.size()) != iet.d()) throw Error(ErrorKind::InvalidInput, "theta has the wrong size");
        c.v = to_lift(cfg.theta);
        c.info = {{"mode", "explicit"}};
        return c;
    }
    if (cfg.theta_mode == "uniform") {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-kPi, kPi);
        std::vector<double> t;
        for (int i = 0; i < iet.d(); ++i) t.push_back(u(rng));
        c.v = to_lift(t);
        c.info = {{"mode", "uniform"}};
        return c;
    }
    const StableFrame frame = stable_subspace(iet, cfg.frame_steps);
    double delta = cfg.delta > 0 ? cfg.delta : 0.5;
    for (;;) {
        const ThetaSample s = sample_theta(frame, iet, delta, cfg.seed);
        c.v = s.v;
        c.delta = delta;
        c.info = {{"mode", "sample"}, {"delta", delta}, {"norm", s.norm}, {"attempts", s.attempts},
                  {"gap_ratio", frame.gap_ratio}, {"angle_to_upsilon", s.angle_to_upsilon}};
        if (cfg.delta > 0 || delta < 1e-6) return c;
        const auto thetas = theta_sequence(trace, c.v, cfg.levels);
        const auto curves = breaking_sequence(trace, thetas, cfg.levels);
        if (injectivity(curves.back()).injective) return c;
        delta /= 2;
    }
}

void add_iet_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--perm", cfg.perm, "monodromy, e.g. \"4 3 2 1\"");
    sub->add_option("--lambda", cfg.lambda, "lengths, comma separated")->delimiter(',');
    sub->add_flag("--random-lambda", cfg.random_lambda, "draw lambda uniformly from the simplex using --seed");
    sub->add_option("--seed", cfg.seed);
    sub->add_flag("--json", cfg.json_only, "machine-readable output only");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
}

void add_theta_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--theta-mode", cfg.theta_mode)->check(CLI::IsMember({"sample", "explicit", "uniform"}));
    sub->add_option("--theta", cfg.theta, "explicit rotation vector")->delimiter(',');
    sub->add_option("--delta", cfg.delta, "radius of the stable ball; 0 halves from 0.5 until injective");
    sub->add_option("--frame-steps", cfg.frame_steps);
    sub->add_option("--levels", cfg.levels);
}

// Splices config-file values in front of the command-line flags so that flags win.
std::vector<std::string> with_config(int argc, char** argv, const std::vector<std::string>& commands) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    if (path.empty()) return args;
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::InvalidInput, "cannot read config " + path);
    const json cfg = json::parse(f);
    std::vector<std::string> injected;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            injected.push_back(flag);
            injected.push_back(joined);
        } else {
            injected.push_back(flag);
            injected.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    auto it = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return std::find(commands.begin(), commands.end(), a) != commands.end();
    });
    if (it == args.end()) throw Error(ErrorKind::InvalidInput, "a subcommand is required with --config");
    args.insert(it + 1, injected.begin(), injected.end());
    return args;
}

int run_induct(const RunConfig& cfg) {
    const InductionTrace t = rauzy_iterate(make_iet(cfg), cfg.steps);
    emit(cfg.out, trace_to_jsonl(t));
    if (t.stopped) {
        std::cerr << t.stopped->what() << " (after " << t.size() << " steps)\n";
        return 2;
    }
    return 0;
}

int run_zorich(const RunConfig& cfg) {
    const ZorichTrace z = zorich_iterate(make_iet(cfg), cfg.steps);
    std::ostringstream out;
    for (int k = 0; k < z.size(); ++k) {
        json f = json::array();
        const auto& m = z.factors[static_cast<std::size_t>(k)];
        for (int i = 0; i < m.dim(); ++i) {
            json row = json::array();
            for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j).str());
            f.push_back(row);
        }
        out << json{{"k", k}, {"accel", z.accel[static_cast<std::size_t>(k)]},
                    {"partial_sum", z.partial_sums[static_cast<std::size_t>(k + 1)]}, {"factor", f}}
                   .dump()
            << "\n";
    }
    emit(cfg.out, out.str());
    return 0;
}

int run_graph(const RunConfig& cfg) {
    const RauzyGraph g = rauzy_class(Permutation::parse_monodromy(cfg.perm));
    if (cfg.json_only) {
        json j;
        for (const auto& v : g.vertices) j["vertices"].push_back(v.to_string());
        for (const auto& e : g.edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"type", e.label}});
        emit(cfg.out, j.dump(2) + "\n");
    } else {
        emit(cfg.out, g.to_dot());
    }
    return 0;
}

int run_lyapunov(const RunConfig& cfg) {
    const Iet iet = make_iet(cfg);
    const LyapunovEstimate e = lyapunov_spectrum(iet, cfg.steps, cfg.batches);
    json j{{"genus", genus(iet.perm())}, {"exponents", e.exponents}, {"error_bars", e.error_bars},
           {"zorich_steps", e.steps_used}, {"rauzy_steps", e.rauzy_steps}};
    emit(cfg.out, j.dump(2) + "\n");
    return 0;
}

int run_sample(const RunConfig& cfg) {
    const Iet iet = make_iet(cfg);
    const StableFrame frame = stable_subspace(iet, cfg.frame_steps);
    const ThetaSample s = sample_theta(frame, iet, cfg.delta > 0 ? cfg.delta : 0.1, cfg.seed);
    json j{{"theta", s.theta}, {"v", to_doubles(s.v)}, {"delta", s.delta}, {"norm", s.norm},
           {"angle_to_upsilon", s.angle_to_upsilon}, {"attempts", s.attempts}, {"gap_ratio", frame.gap_ratio},
           {"zorich_steps", frame.zorich_steps}, {"log_singular", frame.log_singular}, {"frame", frame.as_doubles()}};
    emit(cfg.out, j.dump(2) + "\n");
    return 0;
}

struct Pipeline {
    Iet iet;
    InductionTrace trace;
    ThetaChoice theta;
    std::vector<std::vector<double>> thetas;
};

Pipeline build_pipeline(const RunConfig& cfg, int depth) {
    Pipeline p;
    p.iet = make_iet(cfg);
    p.trace = rauzy_iterate(p.iet, std::max(depth, cfg.levels));
    if (p.trace.size() < depth) throw *p.trace.stopped;
    p.theta = choose_theta(cfg, p.iet, p.trace);
    p.thetas = theta_sequence(p.trace, p.theta.v, depth);
    return p;
}

int run_curve(const RunConfig& cfg) {
    const Pipeline p = build_pipeline(cfg, cfg.levels);
    const auto curves = breaking_sequence(p.trace, p.thetas, cfg.levels);
    std::vector<int> levels = cfg.at.empty() ? std::vector<int>{cfg.levels} : cfg.at;
    json j{{"theta", p.thetas[0]}, {"theta_choice", p.theta.info}, {"levels", json::array()}};
    for (int n : levels) {
        if (n < 0 || n > cfg.levels) throw Error(ErrorKind::LevelMismatch, "requested level beyond --levels");
        const PLCurve& c = curves[static_cast<std::size_t>(n)];
        const std::string suffix = levels.size() > 1 ? "_" + std::to_string(n) : "";
        if (!cfg.svg.empty()) emit(cfg.svg + suffix + ".svg", curve_to_svg(c));
        if (!cfg.csv.empty()) emit(cfg.csv + suffix + ".csv", curve_to_csv(c));
        j["levels"].push_back({{"n", n}, {"segments", c.segments()}});
    }
    if (cfg.svg.empty() && cfg.csv.empty() && !cfg.json_only) emit(cfg.out, curve_to_csv(curves.back()));
    else std::cout << j.dump(2) << "\n";
    return 0;
}

int run_pwi(const RunConfig& cfg) {
    const Pipeline p = build_pipeline(cfg, cfg.limit_level);
    const auto curves = breaking_sequence(p.trace, p.thetas, cfg.limit_level);
    const AdaptedPWI pwi = adapted_pwi(curves.back(), p.iet, p.thetas[0]);
    if (!cfg.out.empty()) emit(cfg.out, pwi.to_json() + "\n");
    const auto orbit = iterate(pwi, pwi.curve(cfg.x), cfg.orbit_steps);
    if (!cfg.csv.empty()) emit(cfg.csv, orbit_to_csv(orbit));
    if (cfg.out.empty() && cfg.csv.empty()) std::cout << orbit_to_csv(orbit);
    return 0;
}

int run_verify(const RunConfig& cfg) {
    const int depth = std::max({cfg.theta_levels, cfg.limit_level, cfg.levels, cfg.qe_levels});
    const Pipeline p = build_pipeline(cfg, depth);
    const int curve_depth = std::max({cfg.levels, cfg.limit_level, cfg.qe_levels});
    const auto curves = breaking_sequence(p.trace, p.thetas, curve_depth);

    VerificationReport rep;
    rep.append(quasi_embedding_suite(p.trace, curves, p.thetas, cfg.qe_levels, cfg.seed));
    rep.append(convergence_report(p.trace, std::vector<PLCurve>(curves.begin(), curves.begin() + cfg.levels + 1), p.thetas));

    const PLCurve& gN = curves[static_cast<std::size_t>(cfg.levels)];
    const auto inj = injectivity(gN);
    json witness = inj.witness ? json{inj.witness->first, inj.witness->second} : json();
    rep.checks.push_back(make_check("injectivity", inj.injective ? 0.0 : 1.0, 0.0, cfg.levels, -1, {{"witness", witness}}));
    // Non-triviality is only claimed for rotation vectors drawn from the stable ball.
    CheckResult nt = nontriviality(gN, discontinuity_cuts(p.iet, cfg.cut_depth), cfg.tol_nontrivial).check();
    nt.n = cfg.levels;
    if (cfg.theta_mode == "sample") rep.checks.push_back(nt);
    rep.checks.push_back(make_check("isometry", isometry_defect(gN), 1e-12 * p.iet.length(), cfg.levels));

    const PLCurve& glim = curves[static_cast<std::size_t>(cfg.limit_level)];
    const AdaptedPWI pwi = adapted_pwi(glim, p.iet, p.thetas[0]);
    rep.checks.push_back(make_check("embedding", embedding_defect(glim, pwi, p.iet), 1e-6, cfg.limit_level));

    const SummabilityReport s = summability_check(p.trace, p.theta.v, cfg.theta_levels);
    rep.checks.push_back(make_check("summability", s.decays ? 0.0 : 1.0, 0.0, s.n_star, -1,
                                    {{"sum", s.sum}, {"K", s.K}, {"n_star", s.n_star},
                                     {"d_n_star", s.terms[static_cast<std::size_t>(s.n_star)]}, {"tail", s.tail}}));

    json j = rep.to_json();
    j["theta"] = p.thetas[0];
    j["theta_choice"] = p.theta.info;
    if (cfg.theta_mode != "sample") j["info"] = {nt.to_json()};
    if (cfg.json_only || !cfg.out.empty()) {
        emit(cfg.out, j.dump(2) + "\n");
    } else {
        for (const auto& c : rep.checks)
            if (!c.pass || c.check == "injectivity" || c.check == "nontriviality" || c.check == "embedding" || c.check == "summability")
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.check << " n=" << c.n << " m=" << c.m << " defect=" << c.defect
                          << " tol=" << c.tol << "\n";
        std::cout << "map_agreement max " << rep.max_defect("map_agreement") << ", quasi_embedding max "
                  << rep.max_defect("quasi_embedding") << "\n"
                  << (rep.pass() ? "all checks pass" : "some checks fail") << "\n";
    }
    return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Isometric embeddings of interval exchanges into piecewise isometries"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto* induct = app.add_subcommand("induct", "Rauzy induction trace as JSON lines");
    add_iet_options(induct, cfg);
    induct->add_option("--steps", cfg.steps);

    auto* zorich = app.add_subcommand("zorich", "Zorich acceleration blocks as JSON lines");
    add_iet_options(zorich, cfg);
    zorich->add_option("--steps", cfg.steps);

    auto* graph = app.add_subcommand("rauzy-graph", "Rauzy class as DOT");
    add_iet_options(graph, cfg);

    auto* lyap = app.add_subcommand("lyapunov", "Lyapunov spectrum of the Zorich cocycle on H_pi");
    add_iet_options(lyap, cfg);
    lyap->add_option("--steps", cfg.steps, "Zorich steps");
    lyap->add_option("--batches", cfg.batches);

    auto* sample = app.add_subcommand("sample-theta", "sample a rotation vector from the stable ball");
    add_iet_options(sample, cfg);
    sample->add_option("--delta", cfg.delta);
    sample->add_option("--frame-steps", cfg.frame_steps);

    auto* curve = app.add_subcommand("curve", "breaking sequence; SVG and CSV export");
    add_iet_options(curve, cfg);
    add_theta_options(curve, cfg);
    curve->add_option("--svg", cfg.svg, "SVG path prefix");
    curve->add_option("--csv", cfg.csv, "CSV path prefix");
    curve->add_option("--at", cfg.at, "levels to export")->delimiter(',');

    auto* pwi = app.add_subcommand("pwi", "theta-adapted PWI spec and an orbit of a curve point");
    add_iet_options(pwi, cfg);
    add_theta_options(pwi, cfg);
    pwi->add_option("--limit-level", cfg.limit_level);
    pwi->add_option("--x", cfg.x, "curve parameter of the orbit start");
    pwi->add_option("--orbit-steps", cfg.orbit_steps);
    pwi->add_option("--csv", cfg.csv, "orbit CSV path");

    auto* verify = app.add_subcommand("verify", "run the verification suite; exit 0 iff every check passes");
    add_iet_options(verify, cfg);
    add_theta_options(verify, cfg);
    verify->add_option("--limit-level", cfg.limit_level);
    verify->add_option("--theta-levels", cfg.theta_levels);
    verify->add_option("--qe-levels", cfg.qe_levels);
    verify->add_option("--cut-depth", cfg.cut_depth);
    verify->add_option("--tol-nontrivial", cfg.tol_nontrivial);

    try {
        std::vector<std::string> args =
            with_config(argc, argv, {"induct", "zorich", "rauzy-graph", "lyapunov", "sample-theta", "curve", "pwi", "verify"});
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*induct) return run_induct(cfg);
        if (*zorich) return run_zorich(cfg);
        if (*graph) return run_graph(cfg);
        if (*lyap) return run_lyapunov(cfg);
        if (*sample) return run_sample(cfg);
        if (*curve) return run_curve(cfg);
        if (*pwi) return run_pwi(cfg);
        if (*verify) return run_verify(cfg);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}
