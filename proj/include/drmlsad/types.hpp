#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmlsad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Unit the return panel is stored in. All solver formulas are unit-agnostic;
// epsilon and rho must be supplied in the same unit as the panel.
enum class ReturnUnit { Fraction, Percent };

inline const char* to_string(ReturnUnit u) {
    return u == ReturnUnit::Percent ? "percent" : "fraction";
}

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptySetError : SolverError {
    EmptySetError() : SolverError("projection target set is empty") {}
    explicit EmptySetError(const std::string& what) : SolverError(what) {}
};

struct InfeasibleError : SolverError {
    using SolverError::SolverError;
};

struct InfeasibleTargetError : SolverError {
    using SolverError::SolverError;
};

struct LineSearchStallError : SolverError {
    using SolverError::SolverError;
};

struct IndefiniteSystemError : SolverError {
    using SolverError::SolverError;
};

struct DegenerateDenominatorError : SolverError {
    using SolverError::SolverError;
};

struct InsufficientHistoryError : SolverError {
    using SolverError::SolverError;
};

struct ParseError : SolverError {
    long line;
    ParseError(long line_, const std::string& what) : SolverError(what), line(line_) {}
};

struct MissingValuesError : SolverError {
    std::string asset;
    MissingValuesError(std::string asset_, const std::string& what)
        : SolverError(what), asset(std::move(asset_)) {}
};

struct WindowInfeasibleError : SolverError {
    long window;
    WindowInfeasibleError(long window_, const std::string& what)
        : SolverError(what), window(window_) {}
};

// N x m panel of per-period asset returns. Entries must be finite, N >= 2,
// m >= 1, no gaps (ingestion rejects or drops assets with missing values).
class ReturnsDataset {
public:
    ReturnsDataset(Matrix returns, std::vector<std::string> asset_names,
                   std::vector<std::string> period_labels = {},
                   ReturnUnit unit = ReturnUnit::Fraction);

    const Matrix& returns() const { return returns_; }
    const std::vector<std::string>& asset_names() const { return asset_names_; }
    const std::vector<std::string>& period_labels() const { return period_labels_; }
    ReturnUnit unit() const { return unit_; }

    Eigen::Index periods() const { return returns_.rows(); }
    Eigen::Index assets() const { return returns_.cols(); }

    // Contiguous row slice [first, first+count).
    ReturnsDataset window(Eigen::Index first, Eigen::Index count) const;

private:
    Matrix returns_;
    std::vector<std::string> asset_names_;
    std::vector<std::string> period_labels_;
    ReturnUnit unit_;
};

// Sample mean mu_hat and the deviation matrix A whose row i is
// (mu_hat - xi_i)^T. Columns of A sum to zero by construction.
struct ScenarioModel {
    Vector mu_hat;
    Matrix A;

    Eigen::Index samples() const { return A.rows(); }
    Eigen::Index assets() const { return A.cols(); }
};

ScenarioModel build_scenario_model(const ReturnsDataset& data);

// One instance of the reformulated DR-MLSAD convex program
//   min (1/2N) sum |a_i'x - eps| + (1/2N) sum (a_i'x - eps) + eps
//   s.t. e'x = 1, x >= 0, mu_hat'x >= rho + eps.
// Infeasible instances are rejected at construction: the feasible set is
// nonempty iff max_i mu_hat_i >= rho + eps.
class DrMlsadProblem {
public:
    DrMlsadProblem(ScenarioModel scenario, double epsilon, double rho);

    // Variant with the mean-return constraint disabled (b = -inf); used by
    // the target-return selection step, where the plain simplex is the
    // feasible set.
    static DrMlsadProblem without_return_floor(ScenarioModel scenario, double epsilon);

    const ScenarioModel& scenario() const { return scenario_; }
    double epsilon() const { return epsilon_; }
    double rho() const { return rho_; }
    double b() const { return b_; }

    Eigen::Index samples() const { return scenario_.samples(); }
    Eigen::Index assets() const { return scenario_.assets(); }

private:
    DrMlsadProblem() = default;

    ScenarioModel scenario_;
    double epsilon_ = 0.0;
    double rho_ = 0.0;
    double b_ = 0.0;  // rho + epsilon, precomputed once
};

bool check_feasible(const Vector& mu_hat, double b);
bool check_feasible(const DrMlsadProblem& prob);

struct PrimalDualIterate {
    Vector x;  // portfolio weights, length m
    Vector y;  // auxiliary y = Ax - eps*e, length N
    Vector u;  // Lagrange multiplier, length N
};

enum class SolveStatus { Converged, IterLimit, Infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::IterLimit: return "IterLimit";
        case SolveStatus::Infeasible: return "Infeasible";
    }
    return "unknown";
}

struct SolveReport {
    std::string solver_name;
    long outer_iterations = 0;
    long inner_iterations = 0;
    double kkt_residual = std::numeric_limits<double>::quiet_NaN();
    double objective = std::numeric_limits<double>::quiet_NaN();
    double wall_time = 0.0;  // seconds
    SolveStatus status = SolveStatus::IterLimit;
};

// Per-iteration trace record shared by all solvers. For first-order solvers
// the inner counter stays 0 and psi/grad_norm are unused (NaN).
struct TraceRecord {
    long outer = 0;
    long inner = 0;
    double psi = std::numeric_limits<double>::quiet_NaN();
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    double kkt_residual = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
};

using Trace = std::vector<TraceRecord>;

// Objective of the reformulated program (absolute-value form); equal to
// (1/N) sum max(0, a_i'x - eps) + eps.
double objective_value(const Vector& x, const DrMlsadProblem& prob);

// Relative KKT residual R_kkt = max{Res1, Res2} of the split-form optimality
// system, with
//   Res1 = max( ||x - Pi_C(x + A'u)|| / (1+||x||+||u||),
//               ||y - prox_{(1/2N)|.|_1}(y - e/2N - u)|| / (1+||y||+||u||) )
//   Res2 = ||y - Ax + eps e|| / (1+||y||+||Ax||).
double kkt_residual(const PrimalDualIterate& it, const DrMlsadProblem& prob);

}  // namespace drmlsad
