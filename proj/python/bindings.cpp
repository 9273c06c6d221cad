#include "drmlsad/admm.hpp"
#include "drmlsad/backtest.hpp"
#include "drmlsad/data.hpp"
#include "drmlsad/oracle.hpp"
#include "drmlsad/ppdssn.hpp"
#include "drmlsad/rwpi.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace drmlsad;

namespace {

ReturnsDataset make_dataset(const Matrix& returns, std::vector<std::string> names,
                            const std::string& unit) {
    if (names.empty())
        for (Eigen::Index i = 0; i < returns.cols(); ++i)
            names.push_back("asset" + std::to_string(i + 1));
    return ReturnsDataset(returns, std::move(names), {},
                          unit == "percent" ? ReturnUnit::Percent : ReturnUnit::Fraction);
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["solver"] = r.solver_name;
    d["status"] = to_string(r.status);
    d["outer_iterations"] = r.outer_iterations;
    d["inner_iterations"] = r.inner_iterations;
    d["kkt_residual"] = r.kkt_residual;
    d["objective"] = r.objective;
    d["wall_time_s"] = r.wall_time;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Wasserstein distributionally robust mean-lower-semi-absolute-deviation "
              "portfolio solvers";

    py::register_exception<EmptySetError>(m, "EmptySetError");
    py::register_exception<InfeasibleError>(m, "InfeasibleError");
    py::register_exception<SolverError>(m, "SolverError");

    py::class_<ReturnsDataset>(m, "ReturnsDataset")
        .def(py::init(&make_dataset), py::arg("returns"),
             py::arg("asset_names") = std::vector<std::string>{}, py::arg("unit") = "fraction")
        .def_property_readonly("returns", &ReturnsDataset::returns)
        .def_property_readonly("asset_names", &ReturnsDataset::asset_names)
        .def_property_readonly("unit",
                               [](const ReturnsDataset& d) { return std::string(to_string(d.unit())); })
        .def("__repr__", [](const ReturnsDataset& d) {
            return "ReturnsDataset(" + std::to_string(d.periods()) + " periods, " +
                   std::to_string(d.assets()) + " assets)";
        });

    m.def("load_returns_csv",
          [](const std::string& path, const std::string& unit, bool drop_missing) {
              CsvOptions opts;
              opts.unit = unit == "percent" ? ReturnUnit::Percent : ReturnUnit::Fraction;
              opts.drop_assets_with_missing = drop_missing;
              return load_returns_csv(path, opts);
          },
          py::arg("path"), py::arg("unit") = "percent", py::arg("drop_missing") = true);

    m.def("gen_synthetic",
          [](long samples, long assets, std::uint64_t seed) {
              SyntheticSpec spec;
              spec.n_samples = samples;
              spec.n_assets = assets;
              spec.seed = seed;
              return gen_synthetic(spec);
          },
          py::arg("samples"), py::arg("assets"), py::arg("seed") = 0);

    m.def("solve",
          [](const ReturnsDataset& data, double epsilon, double rho, const std::string& solver,
             double tol) {
              DrMlsadProblem prob(build_scenario_model(data), epsilon, rho);
              std::pair<PrimalDualIterate, SolveReport> result;
              if (solver == "ppdssn")
                  result = ppa_solve(prob, tol);
              else if (solver == "padmm") {
                  AdmmConfig cfg = padmm_defaults();
                  cfg.tol = tol;
                  result = padmm_solve(prob, cfg);
              } else if (solver == "dadmm") {
                  AdmmConfig cfg = dadmm_defaults();
                  cfg.tol = tol;
                  result = dadmm_solve(prob, cfg);
              } else {
                  throw SolverError("unknown solver: " + solver);
              }
              py::dict d = report_dict(result.second);
              d["x"] = result.first.x;
              return d;
          },
          py::arg("data"), py::arg("epsilon"), py::arg("rho"), py::arg("solver") = "ppdssn",
          py::arg("tol") = 1e-5);

    m.def("objective_value",
          [](const ReturnsDataset& data, const Vector& x, double epsilon) {
              return objective_value(
                  x, DrMlsadProblem::without_return_floor(build_scenario_model(data), epsilon));
          },
          py::arg("data"), py::arg("x"), py::arg("epsilon"));

    m.def("choose_target_return", &choose_target_return, py::arg("data"), py::arg("tol") = 1e-9);

    m.def("rwpi_radius",
          [](const ReturnsDataset& data, double rho_bar, double alpha, std::uint64_t seed,
             const std::string& scaling) {
              RwpiOptions opts;
              opts.alpha_bar = alpha;
              opts.seed = seed;
              opts.scaling = scaling == "paper-literal" ? RadiusScaling::PaperLiteral
                                                        : RadiusScaling::Theorem;
              const RadiusEstimate est = rwpi_radius(data, rho_bar, opts);
              py::dict d;
              d["epsilon"] = est.epsilon;
              d["eta_quantile"] = est.eta_quantile;
              d["alpha_bar"] = est.alpha_bar;
              d["lambda1"] = est.lambda1;
              d["lambda2"] = est.lambda2;
              d["lambda3"] = est.lambda3;
              d["k_samples"] = est.k_samples;
              d["seed"] = est.seed;
              d["degenerate_covariance"] = est.degenerate_covariance;
              return d;
          },
          py::arg("data"), py::arg("rho_bar"), py::arg("alpha") = 0.05, py::arg("seed") = 0,
          py::arg("scaling") = "theorem");

    m.def("project_capped_simplex",
          [](const Vector& z, const Vector& mu_hat, double b) {
              return project_C(z, HalfspaceSimplex{mu_hat, b});
          },
          py::arg("z"), py::arg("mu_hat"), py::arg("b"),
          "Euclidean projection onto {e'x=1, x>=0, mu_hat'x >= b}");

    m.def("rolling_backtest",
          [](const ReturnsDataset& data, long tau, const std::string& strategy,
             std::uint64_t seed, double alpha, int threads) {
              BacktestConfig cfg;
              cfg.tau = tau;
              cfg.seed = seed;
              cfg.alpha_bar = alpha;
              cfg.threads = threads;
              if (strategy == "rwpi") cfg.strategy = Strategy::RwpiDr;
              else if (strategy == "cv") cfg.strategy = Strategy::CvDr;
              else if (strategy == "saa") cfg.strategy = Strategy::Saa;
              else if (strategy == "naive") cfg.strategy = Strategy::Naive;
              else throw SolverError("unknown strategy: " + strategy);

              const BacktestResult result = rolling_backtest(data, cfg);
              py::dict d;
              d["weights"] = result.weights;
              d["realized_returns"] = result.realized_returns;
              py::dict metrics;
              metrics["mean"] = result.metrics.mean;
              metrics["variance"] = result.metrics.variance;
              metrics["sharpe"] = result.metrics.sharpe;
              metrics["turnover"] = result.metrics.turnover;
              metrics["cvar"] = result.metrics.cvar;
              metrics["wealth"] = result.metrics.wealth;
              d["metrics"] = metrics;
              return d;
          },
          py::arg("data"), py::arg("tau") = 90, py::arg("strategy") = "naive",
          py::arg("seed") = 0, py::arg("alpha") = 0.05, py::arg("threads") = 1);

    m.def("subgradient_reference",
          [](const ReturnsDataset& data, double epsilon, double rho, long iters) {
              DrMlsadProblem prob(build_scenario_model(data), epsilon, rho);
              auto [x, obj] = oracle::subgradient_reference_solve(prob, iters);
              return py::make_tuple(x, obj);
          },
          py::arg("data"), py::arg("epsilon"), py::arg("rho"), py::arg("iters") = 200000);
}
