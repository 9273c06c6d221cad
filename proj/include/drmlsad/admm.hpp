#pragma once

#include "drmlsad/types.hpp"

namespace drmlsad {

struct AdmmConfig {
    double rho_tilde = 0.01;  // penalty; 0.01 suits the primal split, 1.0 the dual split
    double tau = 1.618;       // step length, in (0, (1+sqrt(5))/2]
    long max_iter = 50000;
    double tol = 1e-5;
};

inline AdmmConfig padmm_defaults() { return AdmmConfig{0.01, 1.618, 50000, 1e-5}; }
inline AdmmConfig dadmm_defaults() { return AdmmConfig{1.0, 1.618, 50000, 1e-5}; }

// ADMM on the primal split
//   min (1/2N) e'y + (1/2N)||y||_1 + chi_C(alpha)  s.t.  y = Ax - eps e, x = alpha,
// with the x-update factorization (I + A'A, or I + AA' via the
// Sherman-Morrison-Woodbury identity when m > N) computed once and cached.
// The returned multiplier is flipped to the sign convention of the
// split-form KKT system, so core::kkt_residual applies directly.
std::pair<PrimalDualIterate, SolveReport> padmm_solve(const DrMlsadProblem& prob,
                                                      const AdmmConfig& cfg = padmm_defaults(),
                                                      Trace* trace = nullptr);

// ADMM on the dual split
//   min <u, eps e> + chi_{(1/2N)Binf}(z) + chi_C^*(xi)
//   s.t. -A'u - xi = 0, u - e/2N = z,
// with the u-update factorization (I + AA', or SMW through I + A'A when
// N >= m) cached. Primal (x, y) are read from the multipliers.
std::pair<PrimalDualIterate, SolveReport> dadmm_solve(const DrMlsadProblem& prob,
                                                      const AdmmConfig& cfg = dadmm_defaults(),
                                                      Trace* trace = nullptr);

}  // namespace drmlsad
