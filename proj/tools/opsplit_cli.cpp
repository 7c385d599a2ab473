// Command-line front end for the splitting toolkit.
//
//   opsplit run            iterate a method on a problem description
//   opsplit certify        exact fixed-point encoding certificates
//   opsplit counterexample divergence witnesses for unequal stepsizes
//   opsplit experiment     generate and solve a desk-scale instance
//
// Exit codes: 0 success, 1 diverged run or failed check, 2 usage error.
// Output is byte-identical across invocations with the same flags and seed;
// --timing intentionally breaks that by recording wall-clock nanoseconds.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opsplit/certificate.hpp"
#include "opsplit/counterexamples.hpp"
#include "opsplit/engine.hpp"
#include "opsplit/experiments.hpp"
#include "opsplit/operators.hpp"
#include "opsplit/splittings.hpp"

namespace {

using nlohmann::json;
using namespace opsplit;

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "text";  // csv | json | text
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedSystem("cannot open file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw MalformedSystem("bad JSON in '" + path + "': " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw MalformedSystem("cannot write file '" + path + "'");
    out << text;
}

// Either a generated problem dump ({"kind": ...}) or a bare operator list
// ({"dim": ..., "operators": [...]}).
struct LoadedProblem {
    std::vector<OpPtr> ops;
    std::size_t dim = 0;
    std::optional<Problem> problem;
};

LoadedProblem load_problem(const std::string& path) {
    json j = load_json_file(path);
    LoadedProblem out;
    if (j.contains("operators")) {
        try {
            out.dim = j.at("dim").get<std::size_t>();
            for (const auto& oj : j.at("operators")) out.ops.push_back(op_from_json(oj));
        } catch (const json::exception& e) {
            throw MalformedSystem(std::string("problem JSON: ") + e.what());
        }
        if (out.dim == 0) throw MalformedSystem("problem JSON: dim must be positive");
        return out;
    }
    Problem p = problem_from_json(j);
    out.dim = p.dim;
    out.ops = p.ops;
    out.problem = std::move(p);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_run(const GlobalOpts& g, const std::string& method, const std::string& problem_path,
            const MethodConfig& cfg_in, const IterationConfig& itcfg,
            const std::string& trace_path) {
    LoadedProblem lp = load_problem(problem_path);
    MethodConfig cfg = cfg_in;
    cfg.method = method;

    std::vector<OpPtr> ops = lp.ops;
    if (lp.problem) ops = ops_for_method(*lp.problem, method);
    Splitting sp = make_splitting(cfg, ops, lp.dim);

    Metrics metrics;
    if (lp.problem) {
        const Problem& p = *lp.problem;
        metrics.objective = [&p](const Vector& x) { return p.objective(x).finite_part; };
    }
    IterateResult res = iterate(sp.step, sp.origin(), itcfg, &metrics);

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw MalformedSystem("cannot write trace file '" + trace_path + "'");
        write_trace_csv(out, res.trace);
    }

    if (g.format == "json") {
        json j;
        j["method"] = method;
        j["status"] = to_string(res.status);
        j["iters"] = res.iters;
        j["fp_residual"] = res.final_residual;
        j["solution_norm"] = norm2(res.solution);
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "method: " << method << '\n'
                  << "status: " << to_string(res.status) << '\n'
                  << "iters: " << res.iters << '\n'
                  << "fp_residual: " << fmt_double(res.final_residual) << '\n'
                  << "solution_norm: " << fmt_double(norm2(res.solution)) << '\n';
    }
    return res.status == IterStatus::Converged ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct CertifyOpts {
    std::string system;
    std::string file;
    std::string alpha = "1", beta = "1", theta = "1", eta = "0", gamma = "1";
    std::vector<std::string> thetas;  // --theta1 .. --theta8 when given
    std::vector<std::string> omegas = {"1/3", "1/3", "1/3"};
};

int cmd_certify(const GlobalOpts& g, const CertifyOpts& c) {
    ScalarBlockSystem sys;
    EncodingTargets targets;
    bool probe_only = false;

    if (c.system == "family") {
        std::array<Rational, 8> th;
        if (!c.thetas.empty()) {
            if (c.thetas.size() != 8)
                throw MalformedSystem("certify: need all of --theta1 .. --theta8");
            for (std::size_t i = 0; i < 8; ++i) th[i] = parse_rational(c.thetas[i]);
        } else {
            th = family_step_thetas(parse_rational(c.alpha), parse_rational(c.beta),
                                    parse_rational(c.theta), parse_rational(c.eta));
        }
        sys = build_family_system(parse_rational(c.alpha), parse_rational(c.beta), th);
        targets = family_targets();
    } else if (c.system == "ryu3") {
        sys = build_ryu3_system(parse_rational(c.alpha), parse_rational(c.theta));
        targets = ryu3_targets();
    } else if (c.system == "ppxa") {
        std::array<Rational, 3> om{parse_rational(c.omegas.at(0)), parse_rational(c.omegas.at(1)),
                                   parse_rational(c.omegas.at(2))};
        sys = build_ppxa_system(parse_rational(c.gamma), om, parse_rational(c.theta));
        targets = ppxa_targets();
    } else if (c.system == "file") {
        if (c.file.empty()) throw MalformedSystem("certify: --system file needs --file PATH");
        json j = load_json_file(c.file);
        sys = system_from_json(j);
        auto t = targets_from_json(j);
        if (t)
            targets = *t;
        else
            probe_only = true;
    } else {
        throw MalformedSystem("certify: --system must be family, ryu3, ppxa, or file");
    }

    if (probe_only) {
        ProbeReport rep = impossibility_probe(sys);
        if (g.format == "json")
            std::cout << probe_to_json(rep).dump(2) << '\n';
        else
            std::cout << probe_to_text(rep);
        return 0;
    }

    EncodingReport rep = verify_encoding(sys, targets);
    if (g.format == "json")
        std::cout << report_to_json(rep).dump(2) << '\n';
    else
        std::cout << report_to_text(rep, sys);
    return rep.all_ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------

int cmd_rotation(const GlobalOpts& g, double alpha, double beta, double omega, double theta,
                 std::size_t iters, std::size_t dim) {
    RotationPairParams rp{alpha, beta, omega, dim};
    auto [a, b] = build_rotation_pair(rp);
    FamilyParams fam;
    fam.alpha = alpha;
    fam.beta = beta;
    fam.theta = theta;
    Vector z0(dim, 0.0);
    z0[0] = 1.0;
    const double predicted = predicted_growth(rp, theta);
    const double measured = measure_growth(*a, *b, fam, z0, iters);
    const double err = std::abs(predicted - measured);

    if (g.format == "json") {
        json j;
        j["alpha"] = alpha;
        j["beta"] = beta;
        j["omega"] = omega;
        j["theta"] = theta;
        j["predicted_growth"] = predicted;
        j["measured_growth"] = measured;
        j["abs_error"] = err;
        std::cout << j.dump(2) << '\n';
    } else if (g.format == "csv") {
        std::cout << "alpha,beta,omega,theta,predicted,measured,abs_error\n"
                  << fmt_double(alpha) << ',' << fmt_double(beta) << ',' << fmt_double(omega)
                  << ',' << fmt_double(theta) << ',' << fmt_double(predicted) << ','
                  << fmt_double(measured) << ',' << fmt_double(err) << '\n';
    } else {
        std::cout << "rotation pair: alpha=" << fmt_double(alpha) << " beta=" << fmt_double(beta)
                  << " omega=" << fmt_double(omega) << " theta=" << fmt_double(theta) << '\n'
                  << "predicted growth: " << fmt_double(predicted) << '\n'
                  << "measured growth:  " << fmt_double(measured) << '\n'
                  << "abs error:        " << fmt_double(err) << '\n';
    }
    return err <= 1e-6 ? 0 : 1;
}

int cmd_theta_range(const GlobalOpts& g, double theta) {
    ThetaRangeReport rep = theta_range_report(theta);

    // Exact geometric decay witness on (0, N_{{0}}) from z0 = 1.
    FamilyParams fam;
    fam.theta = theta;
    auto zero = make_zero();
    auto cone = make_normal_cone_zero();
    Vector z{1.0};
    double max_rel_err = 0.0;
    double ref = 1.0;
    for (int k = 1; k <= 40; ++k) {
        z = step_family(fam, *zero, *cone, z).t;
        ref *= 1.0 - theta;
        const double denom = std::max(1.0, std::abs(ref));
        max_rel_err = std::max(max_rel_err, std::abs(z[0] - ref) / denom);
    }

    if (g.format == "json") {
        json j;
        j["theta"] = theta;
        j["factor"] = rep.factor;
        j["regime"] = rep.regime;
        j["max_rel_error_vs_exact"] = max_rel_err;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "theta: " << fmt_double(theta) << '\n'
                  << "per-step factor (1 - theta): " << fmt_double(rep.factor) << '\n'
                  << "regime: " << rep.regime << '\n'
                  << "max relative error vs exact decay over 40 steps: " << fmt_double(max_rel_err)
                  << '\n';
    }
    return max_rel_err <= 1e-13 ? 0 : 1;
}

// ---------------------------------------------------------------------------

int cmd_experiment(const GlobalOpts& g, const std::string& kind, std::size_t dim,
                   std::size_t n_obs, double lambda, const IterationConfig& itcfg,
                   bool parallel) {
    Problem prob;
    if (kind == "denoise") {
        DenoiseParams p;
        if (dim) p.dim = dim;
        if (lambda > 0) p.lambda = lambda;
        prob = generate_denoise(p, g.seed);
    } else if (kind == "portfolio") {
        PortfolioParams p;
        if (dim) p.dim = dim;
        if (n_obs) p.n_obs = n_obs;
        prob = generate_portfolio(p, g.seed);
    } else if (kind == "poisson") {
        PoissonParams p;
        if (dim) p.dim = dim;
        if (lambda > 0) p.lambda = lambda;
        prob = generate_poisson_tv(p, g.seed);
    } else {
        throw MalformedSystem("experiment: --kind must be denoise, portfolio, or poisson");
    }

    std::filesystem::create_directories(g.out_dir);
    write_text_file(g.out_dir + "/problem.json", problem_to_json(prob).dump(2) + "\n");

    ExperimentResult res = run_experiment(prob, default_methods(prob), itcfg, parallel);

    bool any_diverged = false;
    json summary = json::array();
    for (const auto& run : res.runs) {
        std::ostringstream trace;
        write_trace_csv(trace, run.result.trace);
        write_text_file(g.out_dir + "/trace_" + run.cfg.method + ".csv", trace.str());
        any_diverged = any_diverged || run.result.status == IterStatus::Diverged;
        json j;
        j["method"] = run.cfg.method;
        j["status"] = to_string(run.result.status);
        j["iters"] = run.result.iters;
        j["fp_residual"] = run.result.final_residual;
        j["objective"] = run.final_objective.finite_part;
        j["slack"] = run.final_objective.slack;
        summary.push_back(std::move(j));
    }

    if (g.format == "json") {
        json j;
        j["kind"] = prob.kind;
        j["seed"] = g.seed;
        j["dim"] = prob.dim;
        j["reference_objective"] = res.reference_objective;
        j["runs"] = std::move(summary);
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "experiment " << prob.kind << " (seed " << g.seed << ", dim " << prob.dim
                  << ")\n"
                  << "reference objective: " << fmt_double(res.reference_objective) << '\n';
        for (const auto& run : res.runs)
            std::cout << "  " << run.cfg.method << ": " << to_string(run.result.status)
                      << " iters=" << run.result.iters
                      << " fp_residual=" << fmt_double(run.result.final_residual)
                      << " objective=" << fmt_double(run.final_objective.finite_part)
                      << " slack=" << fmt_double(run.final_objective.slack) << '\n';
    }
    return any_diverged ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "opsplit: resolvent-splitting toolkit.\n"
        "Parameter names: alpha and beta are resolvent stepsizes, theta is the\n"
        "relaxation, eta mixes the two solution read-outs of the two-operator\n"
        "family, omega are the PPXA averaging weights."};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "Seed for generated randomness (default 1)");
    app.add_option("--out", g.out_dir, "Output directory for files (default .)");
    app.add_option("--format", g.format, "Output format: csv, json, or text (default)")
        ->check(CLI::IsMember({"csv", "json", "text"}));

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Iterate a splitting method on a problem JSON");
    std::string run_method, run_problem, run_trace;
    MethodConfig mc;
    IterationConfig run_cfg;
    run->add_option("--method", run_method, "ppm, drs, prs, family, ryu3, ppxa, dys, pdhg3")
        ->required()
        ->check(CLI::IsMember({"ppm", "drs", "prs", "family", "ryu3", "ppxa", "dys", "pdhg3"}));
    run->add_option("--problem", run_problem, "Problem description JSON file")->required();
    run->add_option("--alpha", mc.alpha, "Resolvent stepsize alpha (default 1)");
    run->add_option("--beta", mc.beta, "Second stepsize beta (family; default alpha)");
    run->add_option("--theta", mc.theta, "Relaxation theta (default per method)");
    run->add_option("--eta", mc.eta, "Solution mix eta for the family (default 0)");
    run->add_option("--gamma", mc.gamma, "PPXA penalty gamma (default 1)");
    run->add_option("--omega-a", mc.omega[0], "PPXA weight on A (default 1/3)");
    run->add_option("--omega-b", mc.omega[1], "PPXA weight on B (default 1/3)");
    run->add_option("--omega-c", mc.omega[2], "PPXA weight on C (default 1/3)");
    run->add_option("--tau", mc.tau, "pdhg3 primal stepsize (default 0.5)");
    run->add_option("--sigma", mc.sigma, "pdhg3 dual stepsize (default 0.5)");
    run->add_option("--max-iters", run_cfg.max_iters, "Iteration budget (default 10000)");
    run->add_option("--tol", run_cfg.fp_tol, "Fixed-point residual tolerance (default 1e-9)");
    run->add_option("--divergence-bound", run_cfg.divergence_bound,
                    "Iterate norm treated as divergence (default 1e12)");
    run->add_option("--record-every", run_cfg.record_every, "Trace stride (default 1)");
    run->add_option("--trace", run_trace, "Write the iteration trace CSV here");
    run->add_flag("--timing", run_cfg.record_timing,
                  "Fill elapsed_ns in traces (breaks byte-level idempotence)");

    // certify ---------------------------------------------------------------
    auto* certify = app.add_subcommand("certify", "Exact fixed-point encoding certificates");
    CertifyOpts co;
    certify->add_option("--system", co.system, "family, ryu3, ppxa, or file")->required();
    certify->add_option("--file", co.file, "System JSON (with --system file)");
    certify->add_option("--alpha", co.alpha, "Stepsize alpha as a rational, e.g. 1 or 1/2");
    certify->add_option("--beta", co.beta, "Stepsize beta as a rational");
    certify->add_option("--theta", co.theta, "Relaxation theta as a rational");
    certify->add_option("--eta", co.eta, "Family solution mix eta as a rational");
    certify->add_option("--gamma", co.gamma, "PPXA penalty gamma as a rational");
    std::vector<CLI::Option*> theta_opts;
    co.thetas.assign(8, "");
    for (int i = 0; i < 8; ++i)
        theta_opts.push_back(certify->add_option("--theta" + std::to_string(i + 1), co.thetas[i],
                                                 "Family coefficient theta" + std::to_string(i + 1)));
    certify->add_option("--omega-a", co.omegas[0], "PPXA weight on A as a rational");
    certify->add_option("--omega-b", co.omegas[1], "PPXA weight on B as a rational");
    certify->add_option("--omega-c", co.omegas[2], "PPXA weight on C as a rational");

    // counterexample ----------------------------------------------------------
    auto* cex = app.add_subcommand("counterexample", "Divergence and decay witnesses");
    cex->require_subcommand(1);
    auto* rot = cex->add_subcommand("rotation", "Unequal-stepsize rotation counterexample");
    double rx_alpha = 1.0, rx_beta = 2.0, rx_omega = M_PI / 4.0, rx_theta = 1.0;
    std::size_t rx_iters = 200, rx_dim = 2;
    rot->add_option("--alpha", rx_alpha, "Stepsize alpha (default 1)");
    rot->add_option("--beta", rx_beta, "Stepsize beta (default 2)");
    rot->add_option("--omega", rx_omega, "Rotation angle in (0, pi/2) (default pi/4)");
    rot->add_option("--theta", rx_theta, "Relaxation theta (default 1)");
    rot->add_option("--iters", rx_iters, "Steps measured (default 200)");
    rot->add_option("--dim", rx_dim, "Ambient dimension (default 2)");
    auto* tr = cex->add_subcommand("theta-range", "Exact decay regimes of the family");
    double tr_theta = 1.0;
    tr->add_option("--theta", tr_theta, "Relaxation theta")->required();

    // experiment -------------------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "Generate and solve a desk-scale instance");
    std::string exp_kind;
    std::size_t exp_dim = 0, exp_nobs = 0;
    double exp_lambda = 0.0;
    bool exp_parallel = false;
    IterationConfig exp_cfg;
    exp_cfg.record_every = 10;
    exp->add_option("--kind", exp_kind, "denoise, portfolio, or poisson")
        ->required()
        ->check(CLI::IsMember({"denoise", "portfolio", "poisson"}));
    exp->add_option("--dim", exp_dim, "Override the problem dimension");
    exp->add_option("--n-obs", exp_nobs, "Override the observation count (portfolio)");
    exp->add_option("--lambda", exp_lambda, "Override the L1/likelihood weight");
    exp->add_option("--max-iters", exp_cfg.max_iters, "Iteration budget (default 10000)");
    exp->add_option("--tol", exp_cfg.fp_tol, "Fixed-point tolerance (default 1e-9)");
    exp->add_option("--record-every", exp_cfg.record_every, "Trace stride (default 10)");
    exp->add_flag("--parallel", exp_parallel, "One thread per method");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(g, run_method, run_problem, mc, run_cfg, run_trace);
        if (certify->parsed()) {
            std::size_t given = 0;
            for (auto* o : theta_opts)
                if (o->count() > 0) ++given;
            if (given == 0)
                co.thetas.clear();
            else if (given != 8)
                throw MalformedSystem("certify: --theta1 .. --theta8 must be given together");
            return cmd_certify(g, co);
        }
        if (rot->parsed())
            return cmd_rotation(g, rx_alpha, rx_beta, rx_omega, rx_theta, rx_iters, rx_dim);
        if (tr->parsed()) return cmd_theta_range(g, tr_theta);
        if (exp->parsed())
            return cmd_experiment(g, exp_kind, exp_dim, exp_nobs, exp_lambda, exp_cfg,
                                  exp_parallel);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NonConvergedReference& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
