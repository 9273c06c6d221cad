#pragma once

#include "drmlsad/rwpi.hpp"
#include "drmlsad/types.hpp"

#include <cstdint>
#include <optional>

namespace drmlsad {

enum class Strategy { RwpiDr, CvDr, Saa, Naive };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::RwpiDr: return "rwpi";
        case Strategy::CvDr: return "cv";
        case Strategy::Saa: return "saa";
        case Strategy::Naive: return "naive";
    }
    return "unknown";
}

struct BacktestConfig {
    Eigen::Index tau = 90;  // estimation window length
    Eigen::Index step = 1;  // windows advance by this many rows
    Strategy strategy = Strategy::RwpiDr;
    double alpha_bar = 0.05;
    std::vector<double> cv_grid;  // empty = default grid
    std::uint64_t seed = 0;
    double cvar_level = 0.95;
    double solver_tol = 1e-7;
    int threads = 1;
};

struct MetricsReport {
    double mean = 0.0;
    double variance = 0.0;
    double sharpe = 0.0;
    double turnover = 0.0;
    double cvar = 0.0;
    std::vector<double> wealth;  // cumulative, starts at 1
    ReturnUnit unit = ReturnUnit::Fraction;
};

struct WindowRecord {
    Eigen::Index t = 0;  // row index of the realized return
    double epsilon = 0.0;
    double rho = 0.0;
    double objective = 0.0;
    double realized_return = 0.0;
};

struct BacktestResult {
    std::vector<Vector> weights;           // one per window
    std::vector<double> realized_returns;  // w_t' r_{t+1}, native unit
    std::vector<WindowRecord> windows;
    MetricsReport metrics;
};

// Rolling-horizon evaluation: window k fits on rows [k*step, k*step + tau)
// and realizes the return of row k*step + tau. Per-window policies follow the
// strategy; rho = rho_bar - epsilon keeps every window feasible by
// construction. Throws WindowInfeasibleError with the offending index if a
// numerically marginal window stays infeasible after three 10% shrinks of
// epsilon.
BacktestResult rolling_backtest(const ReturnsDataset& data, const BacktestConfig& cfg);

// The five evaluation criteria over realized returns and weights. Variance
// uses the (count-1) denominator; turnover compares each next weight vector
// against the drifted previous one; CVaR is the exact sorted-tail value of
// the minimization formula.
MetricsReport compute_metrics(const std::vector<Vector>& weights,
                              const std::vector<double>& realized_returns,
                              const Matrix& realized_rows, const BacktestConfig& cfg,
                              ReturnUnit unit);

// W_0 = 1, W_{t+1} = W_t (1 + r_t), returns converted to fractions first.
std::vector<double> cumulative_wealth(const std::vector<double>& realized_returns,
                                      ReturnUnit unit);

// Sorted-tail conditional value-at-risk of the loss series -r at the given
// level; equals the minimization form min_eta {eta + mean max(-r - eta, 0)/(1-level)}.
double cvar_sorted_tail(const std::vector<double>& returns, double level);

}  // namespace drmlsad
