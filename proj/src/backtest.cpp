#include "drmlsad/backtest.hpp"

#include "drmlsad/ppdssn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace drmlsad {

double cvar_sorted_tail(const std::vector<double>& returns, double level) {
    if (returns.empty()) throw InsufficientHistoryError("cvar needs at least one return");
    std::vector<double> losses(returns.size());
    std::transform(returns.begin(), returns.end(), losses.begin(), [](double r) { return -r; });
    std::sort(losses.begin(), losses.end(), std::greater<double>());

    const double q = static_cast<double>(losses.size()) * (1.0 - level);
    const auto whole = static_cast<size_t>(std::floor(q));
    double tail = 0.0;
    for (size_t i = 0; i < whole && i < losses.size(); ++i) tail += losses[i];
    const double frac = q - static_cast<double>(whole);
    if (frac > 0.0 && whole < losses.size()) tail += frac * losses[whole];
    return tail / q;
}

std::vector<double> cumulative_wealth(const std::vector<double>& realized_returns,
                                      ReturnUnit unit) {
    const double scale = unit == ReturnUnit::Percent ? 0.01 : 1.0;
    std::vector<double> wealth;
    wealth.reserve(realized_returns.size() + 1);
    wealth.push_back(1.0);
    for (double r : realized_returns) wealth.push_back(wealth.back() * (1.0 + scale * r));
    return wealth;
}

MetricsReport compute_metrics(const std::vector<Vector>& weights,
                              const std::vector<double>& realized_returns,
                              const Matrix& realized_rows, const BacktestConfig& cfg,
                              ReturnUnit unit) {
    const size_t n = realized_returns.size();
    if (n < 2) throw InsufficientHistoryError("variance needs at least 2 out-of-sample periods");
    if (weights.size() < 2) throw InsufficientHistoryError("turnover needs at least 2 weight vectors");
    if (weights.size() != n || static_cast<size_t>(realized_rows.rows()) != n)
        throw SolverError("weights, returns and return rows must align");

    MetricsReport report;
    report.unit = unit;

    double mean = 0.0;
    for (double r : realized_returns) mean += r;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double r : realized_returns) var += (r - mean) * (r - mean);
    var /= static_cast<double>(n - 1);
    report.mean = mean;
    report.variance = var;
    report.sharpe = var > 0.0 ? mean / std::sqrt(var) : 0.0;

    // Drifted holdings: w~_{i,t} = (1 + r_{i,t+1}) w_{i,t} / (1 + r_{t+1}'w_t);
    // gross returns need fractional units.
    const double scale = unit == ReturnUnit::Percent ? 0.01 : 1.0;
    double turn = 0.0;
    for (size_t t = 0; t + 1 < weights.size(); ++t) {
        const double port_gross = 1.0 + scale * realized_returns[t];
        double sum_abs = 0.0;
        for (Eigen::Index i = 0; i < weights[t].size(); ++i) {
            const double drifted =
                (1.0 + scale * realized_rows(static_cast<Eigen::Index>(t), i)) * weights[t][i] /
                port_gross;
            sum_abs += std::abs(weights[t + 1][i] - drifted);
        }
        turn += sum_abs;
    }
    report.turnover = turn / static_cast<double>(weights.size() - 1);

    report.cvar = cvar_sorted_tail(realized_returns, cfg.cvar_level);
    report.wealth = cumulative_wealth(realized_returns, unit);
    return report;
}

namespace {

struct WindowPolicy {
    double epsilon = 0.0;
    double rho = 0.0;
};

WindowPolicy window_policy(const ReturnsDataset& window, const BacktestConfig& cfg,
                           std::uint64_t window_seed) {
    WindowPolicy policy;
    switch (cfg.strategy) {
        case Strategy::Naive:
            return policy;  // unused
        case Strategy::Saa: {
            policy.epsilon = 0.0;
            policy.rho = choose_target_return(window, cfg.solver_tol);
            return policy;
        }
        case Strategy::RwpiDr: {
            const double rho_bar = choose_target_return(window, cfg.solver_tol);
            RwpiOptions opts;
            opts.alpha_bar = cfg.alpha_bar;
            opts.seed = window_seed;
            policy.epsilon = rwpi_radius(window, rho_bar, opts).epsilon;
            policy.rho = rho_bar - policy.epsilon;
            return policy;
        }
        case Strategy::CvDr: {
            const double rho_bar = choose_target_return(window, cfg.solver_tol);
            const std::vector<double>& grid = cfg.cv_grid.empty() ? default_cv_grid() : cfg.cv_grid;
            policy.epsilon = cv_radius(window, grid, 5, cfg.solver_tol);
            policy.rho = rho_bar - policy.epsilon;
            return policy;
        }
    }
    throw SolverError("unknown strategy");
}

Vector fit_window(const ReturnsDataset& window, const BacktestConfig& cfg,
                  std::uint64_t window_seed, Eigen::Index window_index, WindowPolicy& policy) {
    if (cfg.strategy == Strategy::Naive) {
        return Vector::Constant(window.assets(), 1.0 / static_cast<double>(window.assets()));
    }
    policy = window_policy(window, cfg, window_seed);
    ScenarioModel model = build_scenario_model(window);

    // rho + epsilon = rho_bar <= max mean by construction; shrink epsilon up
    // to three times if rounding leaves the window marginally infeasible.
    double eps = policy.epsilon;
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (check_feasible(model.mu_hat, policy.rho + eps)) {
            DrMlsadProblem prob(model, eps, policy.rho);
            auto [it, report] = ppa_solve(prob, cfg.solver_tol);
            policy.epsilon = eps;
            return it.x;
        }
        eps *= 0.9;
    }
    throw WindowInfeasibleError(window_index, "window " + std::to_string(window_index) +
                                                  " stayed infeasible after shrinking epsilon");
}

}  // namespace

BacktestResult rolling_backtest(const ReturnsDataset& data, const BacktestConfig& cfg) {
    const Eigen::Index t_total = data.periods();
    if (cfg.tau < 2 || cfg.tau >= t_total)
        throw SolverError("estimation window must satisfy 2 <= tau < T");
    if (cfg.step < 1) throw SolverError("step must be >= 1");

    const Eigen::Index n_windows = (t_total - cfg.tau + cfg.step - 1) / cfg.step;
    BacktestResult result;
    result.weights.resize(n_windows);
    result.realized_returns.resize(n_windows);
    result.windows.resize(n_windows);

    std::atomic<Eigen::Index> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const auto run = [&]() {
        while (!failed.load()) {
            const Eigen::Index k = next.fetch_add(1);
            if (k >= n_windows) break;
            try {
                const Eigen::Index start = k * cfg.step;
                const Eigen::Index target_row = start + cfg.tau;
                ReturnsDataset window = data.window(start, cfg.tau);
                // Deterministic per-window stream regardless of thread count.
                const std::uint64_t window_seed =
                    cfg.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(k) + 1ull;

                WindowPolicy policy;
                Vector w = fit_window(window, cfg, window_seed, k, policy);
                const double realized = data.returns().row(target_row).dot(w);

                result.weights[k] = w;
                result.realized_returns[k] = realized;
                DrMlsadProblem prob_for_obj =
                    cfg.strategy == Strategy::Naive
                        ? DrMlsadProblem::without_return_floor(build_scenario_model(window), 0.0)
                        : DrMlsadProblem(build_scenario_model(window), policy.epsilon, policy.rho);
                result.windows[k] = WindowRecord{target_row, policy.epsilon, policy.rho,
                                                 objective_value(w, prob_for_obj), realized};
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };

    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    Matrix realized_rows(n_windows, data.assets());
    for (Eigen::Index k = 0; k < n_windows; ++k)
        realized_rows.row(k) = data.returns().row(k * cfg.step + cfg.tau);
    result.metrics =
        compute_metrics(result.weights, result.realized_returns, realized_rows, cfg, data.unit());
    return result;
}

}  // namespace drmlsad
