#include "drmlsad/admm.hpp"

#include "drmlsad/prox.hpp"

#include <chrono>
#include <cmath>

namespace drmlsad {

namespace {

// Cached solver for (I + A'A) x = rhs (m x m system). When the wide side is
// larger, the Sherman-Morrison-Woodbury identity
//   (I + A'A)^-1 = I - A'(I + AA')^-1 A
// routes the factorization through the smaller Gram matrix; the same cache
// answers (I + AA') systems the symmetric way.
class GramSolver {
public:
    GramSolver(const Matrix& A, bool factor_small_side) : A_(A) {
        const Eigen::Index n = A.rows(), m = A.cols();
        use_row_gram_ = factor_small_side ? (n <= m) : (m <= n);
        if (use_row_gram_) {
            Matrix g = Matrix::Identity(n, n);
            g.selfadjointView<Eigen::Lower>().rankUpdate(A_);
            g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
            llt_.compute(g);
        } else {
            Matrix g = Matrix::Identity(m, m);
            g.selfadjointView<Eigen::Lower>().rankUpdate(A_.transpose());
            g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
            llt_.compute(g);
        }
        if (llt_.info() != Eigen::Success)
            throw IndefiniteSystemError("cholesky of the gram matrix failed");
    }

    // (I + A'A)^-1 rhs
    Vector solve_col_gram(const Vector& rhs) const {
        if (use_row_gram_) return rhs - A_.transpose() * llt_.solve(A_ * rhs);
        return llt_.solve(rhs);
    }

    // (I + AA')^-1 rhs
    Vector solve_row_gram(const Vector& rhs) const {
        if (use_row_gram_) return llt_.solve(rhs);
        return rhs - A_ * llt_.solve(A_.transpose() * rhs);
    }

private:
    const Matrix& A_;
    bool use_row_gram_ = false;
    Eigen::LLT<Matrix> llt_;
};

// Relative KKT residual in the first-order solvers' sign convention
// (multiplier enters with the opposite sign to the split-form system).
double admm_kkt(const Vector& x, const Vector& y, const Vector& u, const DrMlsadProblem& prob,
                const HalfspaceSimplex& set) {
    const Matrix& A = prob.scenario().A;
    const double n = static_cast<double>(prob.samples());
    const Vector ax = A * x;
    const double r1 = (x - project_C(x - A.transpose() * u, set)).norm() /
                      (1.0 + x.norm() + u.norm());
    const Vector prox_arg = y.array() - 1.0 / (2.0 * n) + u.array();
    const double r2 = (y - soft_threshold(prox_arg, 1.0 / (2.0 * n))).norm() /
                      (1.0 + y.norm() + u.norm());
    const double r3 = (ax - Vector::Constant(y.size(), prob.epsilon()) - y).norm() /
                      (1.0 + y.norm() + ax.norm());
    return std::max({r1, r2, r3});
}

}  // namespace

std::pair<PrimalDualIterate, SolveReport> padmm_solve(const DrMlsadProblem& prob,
                                                      const AdmmConfig& cfg, Trace* trace) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix& A = prob.scenario().A;
    const Eigen::Index n = prob.samples(), m = prob.assets();
    const double nn = static_cast<double>(n);
    const double eps = prob.epsilon();
    const double rho = cfg.rho_tilde;
    const HalfspaceSimplex set = feasible_set(prob);
    const Vector eps_e = Vector::Constant(n, eps);

    GramSolver solver(A, /*factor_small_side=*/true);

    Vector y = Vector::Zero(n), alpha = Vector::Zero(m);
    Vector u = Vector::Zero(n), xi = Vector::Zero(m);
    Vector x = Vector::Zero(m);

    SolveReport report;
    report.solver_name = "padmm";
    double rkkt = std::numeric_limits<double>::infinity();

    for (long k = 0; k < cfg.max_iter; ++k) {
        x = solver.solve_col_gram(A.transpose() * (y + eps_e - u / rho) + (alpha - xi / rho));
        const Vector ax = A * x;
        y = soft_threshold(ax - eps_e - (Vector::Constant(n, 1.0 / (2.0 * nn)) - u) / rho,
                           1.0 / (2.0 * nn * rho));
        alpha = project_C(x + xi / rho, set);
        u += cfg.tau * rho * (ax - eps_e - y);
        xi += cfg.tau * rho * (x - alpha);

        ++report.outer_iterations;
        rkkt = admm_kkt(x, y, u, prob, set);
        if (trace)
            trace->push_back({k, 0, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), rkkt,
                              std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()});
        if (rkkt <= cfg.tol) break;
    }

    report.kkt_residual = rkkt;
    report.objective = objective_value(x, prob);
    report.status = rkkt <= cfg.tol ? SolveStatus::Converged : SolveStatus::IterLimit;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Flip the multiplier into the split-form sign convention.
    return {PrimalDualIterate{x, y, -u}, std::move(report)};
}

std::pair<PrimalDualIterate, SolveReport> dadmm_solve(const DrMlsadProblem& prob,
                                                      const AdmmConfig& cfg, Trace* trace) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix& A = prob.scenario().A;
    const Eigen::Index n = prob.samples(), m = prob.assets();
    const double nn = static_cast<double>(n);
    const double eps = prob.epsilon();
    const double rho = cfg.rho_tilde;
    const HalfspaceSimplex set = feasible_set(prob);
    const Vector e_2n = Vector::Constant(n, 1.0 / (2.0 * nn));

    GramSolver solver(A, /*factor_small_side=*/true);

    Vector x = Vector::Zero(m), y = Vector::Zero(n);
    Vector z = Vector::Zero(n), xi = Vector::Zero(m);
    Vector u = Vector::Zero(n);

    SolveReport report;
    report.solver_name = "dadmm";
    double rkkt = std::numeric_limits<double>::infinity();

    for (long k = 0; k < cfg.max_iter; ++k) {
        u = solver.solve_row_gram(A * (x / rho - xi) + z + e_2n - (y + Vector::Constant(n, eps)) / rho);
        const Vector atu = A.transpose() * u;
        xi = (x / rho - atu) - project_C(x - rho * atu, set) / rho;
        z = project_linf_ball(u - e_2n + y / rho, 1.0 / (2.0 * nn));
        x += cfg.tau * rho * (-atu - xi);
        y += cfg.tau * rho * (u - e_2n - z);

        ++report.outer_iterations;
        rkkt = admm_kkt(x, y, u, prob, set);
        if (trace)
            trace->push_back({k, 0, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), rkkt,
                              std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()});
        if (rkkt <= cfg.tol) break;
    }

    report.kkt_residual = rkkt;
    report.objective = objective_value(x, prob);
    report.status = rkkt <= cfg.tol ? SolveStatus::Converged : SolveStatus::IterLimit;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {PrimalDualIterate{x, y, -u}, std::move(report)};
}

}  // namespace drmlsad
