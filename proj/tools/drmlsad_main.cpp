#include "drmlsad/admm.hpp"
#include "drmlsad/backtest.hpp"
#include "drmlsad/data.hpp"
#include "drmlsad/oracle.hpp"
#include "drmlsad/ppdssn.hpp"
#include "drmlsad/rwpi.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using json = nlohmann::json;
using namespace drmlsad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitIterLimit = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitWindowInfeasible = 4;

ReturnUnit parse_unit(const std::string& unit) {
    if (unit == "percent") return ReturnUnit::Percent;
    if (unit == "fraction") return ReturnUnit::Fraction;
    throw SolverError("unknown unit: " + unit);
}

json report_to_json(const SolveReport& report, const DrMlsadProblem& prob, ReturnUnit unit) {
    return json{{"solver", report.solver_name},
                {"status", to_string(report.status)},
                {"outer_iterations", report.outer_iterations},
                {"inner_iterations", report.inner_iterations},
                {"kkt_residual", report.kkt_residual},
                {"objective", report.objective},
                {"wall_time_s", report.wall_time},
                {"epsilon", prob.epsilon()},
                {"rho", prob.rho()},
                {"unit", to_string(unit)}};
}

void write_or_print(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(path);
        if (!out) throw SolverError("cannot write file: " + path);
        out << j.dump(2) << "\n";
    }
}

void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SolverError("cannot write file: " + path);
    out << "outer,inner,psi,grad_norm,kkt_residual,sigma,gamma\n";
    out.precision(17);
    for (const auto& r : trace)
        out << r.outer << ',' << r.inner << ',' << r.psi << ',' << r.grad_norm << ','
            << r.kkt_residual << ',' << r.sigma << ',' << r.gamma << '\n';
}

std::pair<PrimalDualIterate, SolveReport> run_solver(const std::string& solver,
                                                     const DrMlsadProblem& prob, double tol,
                                                     Trace* trace) {
    if (solver == "ppdssn") return ppa_solve(prob, tol, SsnConfig{}, 500, trace);
    if (solver == "padmm") {
        AdmmConfig cfg = padmm_defaults();
        cfg.tol = tol;
        return padmm_solve(prob, cfg, trace);
    }
    if (solver == "dadmm") {
        AdmmConfig cfg = dadmm_defaults();
        cfg.tol = tol;
        return dadmm_solve(prob, cfg, trace);
    }
    throw SolverError("unknown solver: " + solver);
}

int cmd_solve(const std::string& input, const std::string& unit, double epsilon, double rho,
              bool rho_from_target, const std::string& solver, double tol, bool verify,
              const std::string& json_out, const std::string& trace_out) {
    CsvOptions opts;
    opts.unit = parse_unit(unit);
    opts.drop_assets_with_missing = true;
    const ReturnsDataset data = load_returns_csv(input, opts);

    double rho_eff = rho;
    if (rho_from_target) rho_eff = choose_target_return(data) - epsilon;

    try {
        DrMlsadProblem prob(build_scenario_model(data), epsilon, rho_eff);
        Trace trace;
        auto [it, report] = run_solver(solver, prob, tol, trace_out.empty() ? nullptr : &trace);

        json j = report_to_json(report, prob, data.unit());
        if (verify) {
            auto [x_ref, obj_ref] = oracle::subgradient_reference_solve(prob);
            j["oracle_objective"] = obj_ref;
            j["oracle_gap"] = std::abs(obj_ref - report.objective);
        }
        write_or_print(j, json_out);
        if (!trace_out.empty()) write_trace_csv(trace, trace_out);
        return report.status == SolveStatus::Converged ? kExitOk : kExitIterLimit;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
}

int cmd_radius(const std::string& input, const std::string& unit, double alpha, long k,
               std::uint64_t seed, const std::string& scaling, const std::string& json_out) {
    CsvOptions opts;
    opts.unit = parse_unit(unit);
    opts.drop_assets_with_missing = true;
    const ReturnsDataset data = load_returns_csv(input, opts);

    RwpiOptions ropts;
    ropts.alpha_bar = alpha;
    if (k > 0) ropts.k = k;
    ropts.seed = seed;
    ropts.scaling = scaling == "paper-literal" ? RadiusScaling::PaperLiteral : RadiusScaling::Theorem;

    const double rho_bar = choose_target_return(data);
    const RadiusEstimate est = rwpi_radius(data, rho_bar, ropts);

    const double sqrt_n = std::sqrt(static_cast<double>(data.periods()));
    json j{{"epsilon", est.epsilon},
           {"epsilon_theorem", est.eta_quantile / sqrt_n},
           {"epsilon_paper_literal", sqrt_n * est.eta_quantile},
           {"scaling", scaling},
           {"eta_quantile", est.eta_quantile},
           {"alpha_bar", est.alpha_bar},
           {"rho_bar", rho_bar},
           {"lambda1", est.lambda1},
           {"lambda2", est.lambda2},
           {"lambda3", std::vector<double>(est.lambda3.data(), est.lambda3.data() + est.lambda3.size())},
           {"k_samples", est.k_samples},
           {"seed", est.seed},
           {"unit", to_string(data.unit())}};
    if (est.degenerate_covariance) j["warning"] = "degenerate covariance; epsilon set to 0";
    write_or_print(j, json_out);
    return kExitOk;
}

Strategy parse_strategy(const std::string& s) {
    if (s == "rwpi") return Strategy::RwpiDr;
    if (s == "cv") return Strategy::CvDr;
    if (s == "saa") return Strategy::Saa;
    if (s == "naive") return Strategy::Naive;
    throw SolverError("unknown strategy: " + s);
}

int cmd_backtest(const std::string& input, const std::string& unit, long tau,
                 const std::string& strategy, double alpha, const std::string& cv_grid,
                 std::uint64_t seed, const std::string& out_dir, int threads) {
    CsvOptions opts;
    opts.unit = parse_unit(unit);
    opts.drop_assets_with_missing = true;
    const ReturnsDataset data = load_returns_csv(input, opts);
    if (tau >= data.periods()) {
        std::cerr << "error: window exceeds data (tau=" << tau << ", T=" << data.periods()
                  << ")\n";
        return kExitIo;
    }

    BacktestConfig cfg;
    cfg.tau = tau;
    cfg.strategy = parse_strategy(strategy);
    cfg.alpha_bar = alpha;
    cfg.seed = seed;
    cfg.threads = threads;
    if (!cv_grid.empty()) {
        std::stringstream ss(cv_grid);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.cv_grid.push_back(std::stod(tok));
    }

    try {
        const BacktestResult result = rolling_backtest(data, cfg);

        std::ofstream windows(out_dir + "/windows.csv");
        if (!windows) throw SolverError("cannot write " + out_dir + "/windows.csv");
        windows << "t,epsilon,rho,objective,realized_return\n";
        windows.precision(17);
        for (const auto& w : result.windows)
            windows << w.t << ',' << w.epsilon << ',' << w.rho << ',' << w.objective << ','
                    << w.realized_return << '\n';

        std::ofstream wealth(out_dir + "/wealth.csv");
        if (!wealth) throw SolverError("cannot write " + out_dir + "/wealth.csv");
        wealth << "t,wealth\n";
        wealth.precision(17);
        for (size_t i = 0; i < result.metrics.wealth.size(); ++i)
            wealth << i << ',' << result.metrics.wealth[i] << '\n';

        json metrics{{"mean", result.metrics.mean},
                     {"variance", result.metrics.variance},
                     {"sharpe", result.metrics.sharpe},
                     {"turnover", result.metrics.turnover},
                     {"cvar", result.metrics.cvar},
                     {"unit", to_string(result.metrics.unit)},
                     {"strategy", strategy},
                     {"tau", tau},
                     {"seed", seed},
                     {"windows", result.weights.size()}};
        write_or_print(metrics, out_dir + "/metrics.json");
        return kExitOk;
    } catch (const WindowInfeasibleError& e) {
        std::cerr << "error: " << e.what() << " (window " << e.window << ")\n";
        return kExitWindowInfeasible;
    }
}

int cmd_gen(long samples, long assets, std::uint64_t seed, const std::string& out) {
    SyntheticSpec spec;
    spec.n_samples = samples;
    spec.n_assets = assets;
    spec.seed = seed;
    save_returns_csv(gen_synthetic(spec), out);
    return kExitOk;
}

int cmd_bench(const std::string& sizes, std::uint64_t seed, const std::string& solvers,
              double tol, const std::string& out) {
    std::vector<std::pair<long, long>> parsed_sizes;
    {
        std::stringstream ss(sizes);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto x = tok.find('x');
            if (x == std::string::npos) throw SolverError("size must look like 200x4000: " + tok);
            parsed_sizes.emplace_back(std::stol(tok.substr(0, x)), std::stol(tok.substr(x + 1)));
        }
    }
    std::vector<std::string> solver_list;
    {
        std::stringstream ss(solvers);
        std::string tok;
        while (std::getline(ss, tok, ',')) solver_list.push_back(tok);
    }

    std::ostream* out_stream = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw SolverError("cannot write file: " + out);
        out_stream = &file;
    }
    *out_stream << "N,m,solver,iter,time_s,kkt_residual,objective\n";

    int exit_code = kExitOk;
    for (size_t idx = 0; idx < parsed_sizes.size(); ++idx) {
        const auto [n, m] = parsed_sizes[idx];
        SyntheticSpec spec;
        spec.n_samples = n;
        spec.n_assets = m;
        spec.seed = seed + idx;
        const ReturnsDataset data = gen_synthetic(spec);
        try {
            const DrMlsadProblem prob = bench_defaults(data);
            for (const auto& solver : solver_list) {
                auto [it, report] = run_solver(solver, prob, tol, nullptr);
                std::string iter = std::to_string(report.outer_iterations);
                if (solver == "ppdssn")
                    iter += "(" + std::to_string(report.inner_iterations) + ")";
                (*out_stream) << n << ',' << m << ',' << solver << ',' << iter << ','
                              << report.wall_time << ',' << report.kkt_residual << ','
                              << report.objective << '\n';
                if (report.status != SolveStatus::Converged) exit_code = kExitIterLimit;
            }
        } catch (const InfeasibleError& e) {
            std::cerr << "error: size " << n << "x" << m << ": " << e.what() << "\n";
            exit_code = kExitInfeasible;
        }
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wasserstein DR mean-lower-semi-absolute-deviation portfolio toolkit"};
    app.require_subcommand(1);

    // solve
    std::string input, unit = "percent", solver = "ppdssn", json_out, trace_out;
    double epsilon = 0.0, rho = 0.0, tol = 1e-5;
    bool verify = false;
    std::string rho_policy;
    auto* solve = app.add_subcommand("solve", "solve one instance from a returns CSV");
    solve->add_option("--input", input, "returns CSV")->required();
    solve->add_option("--unit", unit, "percent|fraction (default percent)");
    solve->add_option("--epsilon", epsilon, "Wasserstein radius")->required();
    auto* rho_opt = solve->add_option("--rho", rho, "return floor");
    solve->add_option("--rho-policy", rho_policy, "target-minus-eps: rho = rho_bar - epsilon");
    solve->add_option("--solver", solver, "ppdssn|padmm|dadmm");
    solve->add_option("--tol", tol, "relative KKT tolerance (default 1e-5)");
    solve->add_flag("--verify", verify, "also run the subgradient reference");
    solve->add_option("--json", json_out, "write the report JSON here (default stdout)");
    solve->add_option("--trace", trace_out, "write the per-iteration trace CSV here");

    // radius
    std::string r_input, r_unit = "percent", r_scaling = "theorem", r_json;
    double r_alpha = 0.05;
    long r_k = 0;
    std::uint64_t r_seed = 0;
    auto* radius = app.add_subcommand("radius", "estimate the Wasserstein radius");
    radius->add_option("--input", r_input, "returns CSV")->required();
    radius->add_option("--unit", r_unit, "percent|fraction");
    radius->add_option("--alpha", r_alpha, "confidence parameter (default 0.05)");
    radius->add_option("--k", r_k, "Monte Carlo draws (default floor(0.2 N))");
    radius->add_option("--seed", r_seed, "RNG seed");
    radius->add_option("--scaling", r_scaling, "theorem|paper-literal");
    radius->add_option("--json", r_json, "write the JSON here (default stdout)");

    // backtest
    std::string b_input, b_unit = "percent", b_strategy = "rwpi", b_grid, b_out = ".";
    long b_tau = 90;
    double b_alpha = 0.05;
    std::uint64_t b_seed = 0;
    int b_threads = 1;
    auto* backtest = app.add_subcommand("backtest", "rolling-horizon evaluation");
    backtest->add_option("--input", b_input, "returns CSV")->required();
    backtest->add_option("--unit", b_unit, "percent|fraction");
    backtest->add_option("--tau", b_tau, "estimation window (default 90)");
    backtest->add_option("--strategy", b_strategy, "rwpi|cv|saa|naive");
    backtest->add_option("--alpha", b_alpha, "confidence parameter for rwpi");
    backtest->add_option("--cv-grid", b_grid, "comma-separated epsilon grid");
    backtest->add_option("--seed", b_seed, "RNG seed");
    backtest->add_option("--out-dir", b_out, "output directory (default .)");
    backtest->add_option("--threads", b_threads,
                         "parallel windows (default 1 or DRMLSAD_THREADS)");

    // gen
    long g_samples = 200, g_assets = 100;
    std::uint64_t g_seed = 0;
    std::string g_out;
    auto* gen = app.add_subcommand("gen", "generate a synthetic returns CSV");
    gen->add_option("--samples", g_samples, "periods (default 200)");
    gen->add_option("--assets", g_assets, "assets (default 100)");
    gen->add_option("--seed", g_seed, "RNG seed");
    gen->add_option("--out", g_out, "output CSV")->required();

    // bench
    std::string be_sizes = "200x4000", be_solvers = "ppdssn,padmm,dadmm", be_out;
    std::uint64_t be_seed = 0;
    double be_tol = 1e-5;
    auto* bench = app.add_subcommand("bench", "synthetic benchmark table");
    bench->add_option("--sizes", be_sizes, "comma-separated NxM list (default 200x4000)");
    bench->add_option("--seed", be_seed, "RNG seed");
    bench->add_option("--solvers", be_solvers, "comma-separated solver list");
    bench->add_option("--tol", be_tol, "relative KKT tolerance (default 1e-5)");
    bench->add_option("--out", be_out, "output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("DRMLSAD_THREADS")) {
        if (b_threads == 1) b_threads = std::max(1, std::atoi(env));
    }

    try {
        if (solve->parsed()) {
            const bool rho_from_target = rho_policy == "target-minus-eps";
            if (!rho_from_target && rho_opt->count() == 0) {
                std::cerr << "error: provide --rho or --rho-policy target-minus-eps\n";
                return kExitIo;
            }
            return cmd_solve(input, unit, epsilon, rho, rho_from_target, solver, tol, verify,
                             json_out, trace_out);
        }
        if (radius->parsed())
            return cmd_radius(r_input, r_unit, r_alpha, r_k, r_seed, r_scaling, r_json);
        if (backtest->parsed())
            return cmd_backtest(b_input, b_unit, b_tau, b_strategy, b_alpha, b_grid, b_seed, b_out,
                                b_threads);
        if (gen->parsed()) return cmd_gen(g_samples, g_assets, g_seed, g_out);
        if (bench->parsed()) return cmd_bench(be_sizes, be_seed, be_solvers, be_tol, be_out);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitIo;
}
