#include "drmlsad/ppdssn.hpp"

#include <chrono>
#include <cmath>

namespace drmlsad {

namespace {

double l1_threshold(const PpaState& state, const DrMlsadProblem& prob) {
    return state.gamma / (2.0 * static_cast<double>(prob.samples()));
}

Vector w_tilde_of(const Vector& u, const PpaState& state, const DrMlsadProblem& prob) {
    const double n = static_cast<double>(prob.samples());
    return prob.scenario().A * state.x -
           Vector::Constant(u.size(), prob.epsilon()) -
           state.gamma * (u.array() + 1.0 / (2.0 * n)).matrix();
}

}  // namespace

double psi_value(const Vector& u, const PpaState& state, const DrMlsadProblem& prob) {
    const Matrix& A = prob.scenario().A;
    const double n = static_cast<double>(prob.samples());
    const double eps = prob.epsilon();
    const HalfspaceSimplex set = feasible_set(prob);

    const Vector atu = A.transpose() * u;
    const Vector z_hat = state.x + state.sigma * atu;
    const Vector v = (u.array() + 1.0 / (2.0 * n)).matrix();
    const Vector ax_eps = A * state.x - Vector::Constant(u.size(), eps);
    const Vector w = ax_eps - state.gamma * v;

    double value = -moreau_env_indicator_C(z_hat, state.sigma, set);
    value += state.x.dot(atu) + 0.5 * state.sigma * atu.squaredNorm();
    value += -moreau_env_l1(w, l1_threshold(state, prob)) / state.gamma;
    value += -ax_eps.dot(v) + 0.5 * state.gamma * v.squaredNorm();
    value += -eps * (1.0 + u.sum());
    return value;
}

PsiGradient psi_grad(const Vector& u, const PpaState& state, const DrMlsadProblem& prob) {
    const Matrix& A = prob.scenario().A;
    const double eps = prob.epsilon();
    const HalfspaceSimplex set = feasible_set(prob);

    PsiGradient g;
    g.z_hat = state.x + state.sigma * (A.transpose() * u);
    g.proj_point = project_C(g.z_hat, set);
    g.w_tilde = w_tilde_of(u, state, prob);
    g.prox_point = soft_threshold(g.w_tilde, l1_threshold(state, prob));
    g.grad = A * g.proj_point - g.prox_point - Vector::Constant(u.size(), eps);
    return g;
}

double augmented_gap(const PrimalDualIterate& it, const Vector& u, const PpaState& state,
                     const DrMlsadProblem& prob) {
    const Matrix& A = prob.scenario().A;
    const double n = static_cast<double>(prob.samples());
    const double eps = prob.epsilon();

    const Vector y_center = A * state.x - Vector::Constant(it.y.size(), eps);
    double f = (it.y.sum() + it.y.lpNorm<1>()) / (2.0 * n) + eps;
    f += (it.x - state.x).squaredNorm() / (2.0 * state.sigma);
    f += (it.y - y_center).squaredNorm() / (2.0 * state.gamma);
    return f + psi_value(u, state, prob);
}

Vector newton_system_solve(const Matrix& A, const HsJacobian& n0, const Eigen::ArrayXd& l1_active,
                           double sigma, double gamma, double eps_j, const Vector& rhs,
                           const SsnConfig& cfg, NewtonSystemStats* stats) {
    if (!(eps_j > 0.0)) throw SolverError("newton system requires eps_j > 0");
    const Eigen::Index n = rhs.size();
    const double bound =
        std::min(cfg.bar_rho, std::pow(rhs.norm(), 1.0 + cfg.bar_tau));

    const auto apply = [&](const Vector& v) -> Vector {
        Vector out = sigma * (A * apply_N0(n0, A.transpose() * v));
        out.array() += gamma * l1_active * v.array() + eps_j * v.array();
        return out;
    };

    Vector d;
    if (n <= cfg.cg_switch_n) {
        Matrix system = sigma * assemble_ANAt(A, n0);
        system.diagonal().array() += gamma * l1_active + eps_j;
        Eigen::LLT<Matrix> llt(system);
        if (llt.info() != Eigen::Success) {
            if (stats) ++stats->cholesky_retries;
            system.diagonal().array() += 9.0 * eps_j;
            llt.compute(system);
            if (llt.info() != Eigen::Success)
                throw IndefiniteSystemError("cholesky failed twice on the newton system");
        }
        d = llt.solve(rhs);
        if (stats) ++stats->cholesky_solves;
    } else {
        // Matrix-free CG; the operator is positive definite by construction.
        const double cg_tol = std::min({1e-6, bound});
        d = Vector::Zero(n);
        Vector r = rhs;
        Vector p = r;
        double rs = r.squaredNorm();
        const long max_cg = 10 * n;
        for (long it = 0; it < max_cg && std::sqrt(rs) > cg_tol; ++it) {
            const Vector ap = apply(p);
            const double alpha = rs / p.dot(ap);
            d += alpha * p;
            r -= alpha * ap;
            const double rs_new = r.squaredNorm();
            p = r + (rs_new / rs) * p;
            rs = rs_new;
        }
        if (stats) ++stats->cg_solves;
    }

    if (stats) {
        const double residual = (apply(d) - rhs).norm();
        if (bound > 0.0)
            stats->worst_residual_margin = std::max(stats->worst_residual_margin, residual / bound);
    }
    return d;
}

namespace {

// Outer KKT test evaluated at the candidate triple implied by the current
// dual iterate; the projection/prox byproducts of the gradient are the
// candidate (x, y).
double candidate_kkt(const PsiGradient& g, const Vector& u, const PpaState& state,
                     const DrMlsadProblem& prob) {
    PrimalDualIterate it{g.proj_point, g.prox_point, u};
    return kkt_residual(it, prob);
}

}  // namespace

SsnResult ssn_solve(const Vector& u0, const PpaState& state, const DrMlsadProblem& prob,
                    const SsnConfig& cfg, double tol_inner, double outer_tol, Trace* trace,
                    NewtonSystemStats* stats) {
    const Matrix& A = prob.scenario().A;
    const HalfspaceSimplex set = feasible_set(prob);
    const double thresh = l1_threshold(state, prob);

    SsnResult result;
    result.u = u0;
    PsiGradient g = psi_grad(result.u, state, prob);
    double psi = psi_value(result.u, state, prob);

    // Duality-gap stopping thresholds with the summable sequences 1/k^2.
    const double k1 = static_cast<double>(state.outer_iter + 1);
    const double gap_tol_a = 1.0 / (k1 * k1);

    for (long j = 0; j < cfg.max_inner; ++j) {
        const double gnorm = g.grad.norm();
        if (trace)
            trace->push_back({state.outer_iter, j, psi, gnorm,
                              std::numeric_limits<double>::quiet_NaN(), state.sigma, state.gamma});

        if (gnorm <= tol_inner) break;
        const double cand = candidate_kkt(g, result.u, state, prob);
        if (cand <= outer_tol) {
            result.candidate_converged = true;
            break;
        }
        if (cfg.use_gap_criteria) {
            PrimalDualIterate cand_it{g.proj_point, A * g.proj_point -
                                                       Vector::Constant(result.u.size(),
                                                                        prob.epsilon()),
                                      result.u};
            const double gap = augmented_gap(cand_it, result.u, state, prob);
            const double dx = (cand_it.x - state.x).squaredNorm();
            const Vector y_center =
                A * state.x - Vector::Constant(result.u.size(), prob.epsilon());
            const double dy = (cand_it.y - y_center).squaredNorm();
            const double dist_m = dx + (state.sigma / state.gamma) * dy;
            const double bound_a = gap_tol_a * gap_tol_a / (2.0 * state.sigma);
            const double bound_b = gap_tol_a * gap_tol_a * dist_m / (2.0 * state.sigma);
            if (gap <= bound_a && gap <= bound_b) break;
        }

        const HsJacobian n0 = projC_hs_jacobian_at(g.proj_point, set);
        const L1ProxJacobian u_jac = l1_prox_jacobian(g.w_tilde, thresh);
        const double eps_j = std::max(1e-6, cfg.upsilon1 * std::min(cfg.upsilon2, gnorm));

        const Vector d = newton_system_solve(A, n0, u_jac.active, state.sigma, state.gamma, eps_j,
                                             -g.grad, cfg, stats);
        const double slope = g.grad.dot(d);
        if (!(slope < 0.0)) throw LineSearchStallError("newton direction is not a descent direction");

        double alpha = 1.0;
        Vector u_trial = result.u + alpha * d;
        double psi_trial = psi_value(u_trial, state, prob);
        while (psi_trial > psi + cfg.vartheta * alpha * slope) {
            alpha *= cfg.varrho;
            if (alpha < 1e-12)
                throw LineSearchStallError("armijo step size underflow: gradient/jacobian mismatch");
            u_trial = result.u + alpha * d;
            psi_trial = psi_value(u_trial, state, prob);
        }

        result.u = u_trial;
        psi = psi_trial;
        g = psi_grad(result.u, state, prob);
        ++result.inner_iters;
    }

    result.last_grad = std::move(g);
    return result;
}

void adapt_parameters(PpaState& state, double s1, double s2, double res2) {
    const double res1 = std::max(s1, s2);
    double rho1, rho2;
    if (res1 <= res2) {
        if (s2 > s1) {
            rho1 = 0.9;
            rho2 = 1.2;
        } else if (s2 == s1) {
            rho1 = 0.95;
            rho2 = 1.3;
        } else {
            rho1 = 0.98;
            rho2 = 1.4;
        }
        state.sigma = std::max(1e-3, rho1 * state.sigma);
        state.gamma = std::min(1e6, rho2 * state.gamma);
    } else {
        if (s2 < s1 && s1 > 1.5 * res2) {
            rho1 = 1.02;
        } else if (1.5 * res2 > s1 && s1 > s2) {
            rho1 = 1.05;
        } else if (s2 > s1 && s1 > 1.1 * res2) {
            rho1 = 1.03;
        } else {
            rho1 = 1.01;
        }
        if (s2 > s1 && s2 > 1.5 * res2) {
            rho2 = 1.2;
        } else if (1.5 * res2 >= s2 && s2 == s1) {
            rho2 = 1.15;
        } else if (s2 < s1 && s2 > 1.1 * res2) {
            rho2 = 1.1;
        } else {
            rho2 = 1.0;
        }
        state.sigma = std::max(1e-2, rho1 * state.sigma);
        state.gamma = std::max(2e6, rho2 * state.gamma);
    }
}

std::pair<PrimalDualIterate, SolveReport> ppa_solve_opts(const DrMlsadProblem& prob, double tol,
                                                         const PpdssnOptions& opts, Trace* trace) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix& A = prob.scenario().A;
    const Eigen::Index n = prob.samples();
    const double nn = static_cast<double>(n);
    const double eps = prob.epsilon();
    const HalfspaceSimplex set = feasible_set(prob);

    PpaState state;
    state.sigma = opts.sigma0;
    state.gamma = opts.gamma0;
    state.x = project_C(Vector::Zero(prob.assets()), set);
    state.y = A * state.x - Vector::Constant(n, eps);
    state.u = Vector::Zero(n);

    SolveReport report;
    report.solver_name = "ppdssn";

    PrimalDualIterate it{state.x, state.y, state.u};
    double rkkt = kkt_residual(it, prob);

    for (long k = 0; k < opts.max_outer && rkkt > tol; ++k) {
        state.outer_iter = k;
        const double g0 = psi_grad(state.u, state, prob).grad.norm();
        const double tol_inner =
            std::max(0.2 * tol, std::min(0.05, 0.5 / ((k + 1.0) * (k + 1.0)))) * (1.0 + g0);

        SsnResult inner = ssn_solve(state.u, state, prob, opts.ssn, tol_inner, tol, trace);
        report.inner_iterations += inner.inner_iters;

        const Vector u_next = inner.u;
        const Vector x_next = project_C(state.x + state.sigma * (A.transpose() * u_next), set);
        const Vector w = w_tilde_of(u_next, state, prob);
        const Vector y_next = soft_threshold(w, l1_threshold(state, prob));

        it = PrimalDualIterate{x_next, y_next, u_next};

        // Component residuals of the new triple drive the penalty update.
        const double s1 = (x_next - project_C(x_next + A.transpose() * u_next, set)).norm() /
                          (1.0 + x_next.norm() + u_next.norm());
        const Vector prox_arg = y_next.array() - 1.0 / (2.0 * nn) - u_next.array();
        const double s2 = (y_next - soft_threshold(prox_arg, 1.0 / (2.0 * nn))).norm() /
                          (1.0 + y_next.norm() + u_next.norm());
        const Vector ax = A * x_next;
        const double res2 = (y_next - ax + Vector::Constant(n, eps)).norm() /
                            (1.0 + y_next.norm() + ax.norm());
        rkkt = std::max({s1, s2, res2});

        ++report.outer_iterations;
        if (trace)
            trace->push_back({k, -1, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), rkkt, state.sigma,
                              state.gamma});

        state.x = x_next;
        state.y = y_next;
        state.u = u_next;
        if (rkkt <= tol) break;
        adapt_parameters(state, s1, s2, res2);
    }

    report.kkt_residual = rkkt;
    report.objective = objective_value(it.x, prob);
    report.status = rkkt <= tol ? SolveStatus::Converged : SolveStatus::IterLimit;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(it), std::move(report)};
}

std::pair<PrimalDualIterate, SolveReport> ppa_solve(const DrMlsadProblem& prob, double tol,
                                                    const SsnConfig& cfg, long max_outer,
                                                    Trace* trace) {
    PpdssnOptions opts;
    opts.ssn = cfg;
    opts.max_outer = max_outer;
    return ppa_solve_opts(prob, tol, opts, trace);
}

}  // namespace drmlsad
