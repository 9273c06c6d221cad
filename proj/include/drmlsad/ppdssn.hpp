#pragma once

#include "drmlsad/jacobian.hpp"
#include "drmlsad/prox.hpp"
#include "drmlsad/types.hpp"

namespace drmlsad {

// Proximal-point state: prox center (x, y), dual warm start u, and the
// penalty pair (sigma, gamma) defining the preconditioner
// M = Diag(e; sigma*gamma^-1*e).
struct PpaState {
    double sigma = 7.6;
    double gamma = 9400.0;
    Vector x;
    Vector y;
    Vector u;
    long outer_iter = 0;
};

struct SsnConfig {
    double vartheta = 1e-4;      // Armijo slope, in (0, 1/2)
    double varrho = 0.5;         // backtracking ratio, in (0, 1)
    double bar_rho = 0.5;        // cap of the Newton-system inexactness rule
    double bar_tau = 1.0;        // superlinear exponent, in (0, 1]
    double upsilon1 = 100.0;     // regularization scale, > 1
    double upsilon2 = 0.01;      // regularization cap, in (0, 1)
    long max_inner = 200;
    Eigen::Index cg_switch_n = 3000;  // above this N, CG replaces Cholesky
    bool use_gap_criteria = false;    // optional duality-gap inner stopping rule
};

// Dual subproblem value
//   psi(u) = -E^sigma_C(x~ + sigma A'u) + <x~, A'u> + (sigma/2)||A'u||^2
//            - (1/gamma) E^1_{(gamma/2N)l1}(w) - <Ax~ - eps e, v> + (gamma/2)||v||^2
//            - eps (1 + e'u),
// with v = e/2N + u and w = Ax~ - eps e - gamma v; the quadratic differences
// are expanded to avoid cancellation at large sigma/gamma.
double psi_value(const Vector& u, const PpaState& state, const DrMlsadProblem& prob);

// grad psi(u) = -eps e + A Pi_C(x~ + sigma A'u)
//               - prox_{(gamma/2N)l1}(Ax~ - eps e - gamma(e/2N + u)).
// The projection and prox points are reused by the Newton model; the struct
// below carries them alongside the gradient.
struct PsiGradient {
    Vector grad;
    Vector proj_point;  // Pi_C(x~ + sigma A'u): the primal candidate x
    Vector prox_point;  // prox of the l1 block: the primal candidate y
    Vector z_hat;       // x~ + sigma A'u
    Vector w_tilde;     // Ax~ - eps e - gamma (e/2N + u)
};

PsiGradient psi_grad(const Vector& u, const PpaState& state, const DrMlsadProblem& prob);

// Duality gap f_k(x, y) + psi_k(u) >= 0 of the regularized subproblem;
// (x, y) must satisfy y = Ax - eps e up to machine precision.
double augmented_gap(const PrimalDualIterate& it, const Vector& u, const PpaState& state,
                     const DrMlsadProblem& prob);

struct NewtonSystemStats {
    long cholesky_solves = 0;
    long cg_solves = 0;
    long cholesky_retries = 0;
    double worst_residual_margin = 0.0;  // max over solves of residual/bound
};

// Solves (V + eps_j I) d = rhs where V = sigma*A*N0*A' + gamma*Diag(active):
// dense Cholesky for N <= cg_switch_n, matrix-free conjugate gradients
// otherwise. The returned residual satisfies min(bar_rho, ||rhs||^(1+bar_tau)).
Vector newton_system_solve(const Matrix& A, const HsJacobian& n0, const Eigen::ArrayXd& l1_active,
                           double sigma, double gamma, double eps_j, const Vector& rhs,
                           const SsnConfig& cfg, NewtonSystemStats* stats = nullptr);

struct SsnResult {
    Vector u;
    long inner_iters = 0;
    bool candidate_converged = false;  // the (x, y, u) candidate already meets the outer test
    PsiGradient last_grad;
};

// Semismooth Newton on psi with Armijo backtracking. Returns when the
// candidate triple passes the outer KKT test at tolerance outer_tol, when
// ||grad psi|| <= tol_inner, or after cfg.max_inner steps. Throws
// LineSearchStallError if the step size underflows 1e-12.
SsnResult ssn_solve(const Vector& u0, const PpaState& state, const DrMlsadProblem& prob,
                    const SsnConfig& cfg, double tol_inner, double outer_tol,
                    Trace* trace = nullptr, NewtonSystemStats* stats = nullptr);

// One application of the adaptive penalty update rule keyed on the component
// residuals s1 (projection), s2 (l1 prox) and the feasibility residual res2.
void adapt_parameters(PpaState& state, double s1, double s2, double res2);

struct PpdssnOptions {
    SsnConfig ssn;
    long max_outer = 500;
    double sigma0 = 7.6;
    double gamma0 = 9400.0;
};

// Preconditioned proximal-point outer loop with semismooth-Newton inner
// solves; stops at kkt_residual <= tol or after max_outer iterations.
std::pair<PrimalDualIterate, SolveReport> ppa_solve(const DrMlsadProblem& prob, double tol,
                                                    const SsnConfig& cfg = {},
                                                    long max_outer = 500,
                                                    Trace* trace = nullptr);

std::pair<PrimalDualIterate, SolveReport> ppa_solve_opts(const DrMlsadProblem& prob, double tol,
                                                         const PpdssnOptions& opts,
                                                         Trace* trace = nullptr);

}  // namespace drmlsad
