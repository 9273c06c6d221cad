#pragma once

#include "drmlsad/types.hpp"

namespace drmlsad {

// Simplex intersected with the mean-return half-space,
// C = { x | e'x = 1, x >= 0, mu_hat'x >= b }. Nonempty iff max_i mu_hat_i >= b.
// b = -inf disables the half-space and leaves the plain simplex.
struct HalfspaceSimplex {
    Vector mu_hat;
    double b = -std::numeric_limits<double>::infinity();

    bool empty() const { return mu_hat.maxCoeff() < b; }
};

inline HalfspaceSimplex feasible_set(const DrMlsadProblem& prob) {
    return HalfspaceSimplex{prob.scenario().mu_hat, prob.b()};
}

// Tolerance at which the half-space constraint counts as active; shared with
// the HS-Jacobian case classification so both agree on the active set.
inline constexpr double kHalfspaceActiveTol = 1e-10;

// Componentwise sign(z_i) * max(|z_i| - t, 0).
Vector soft_threshold(const Vector& z, double t);

// Componentwise clamp to [-t, t].
Vector project_linf_ball(const Vector& z, double t);

// Euclidean projection onto {e'x = 1, x >= 0} (sort-and-shift).
Vector project_simplex(const Vector& z);

// Euclidean projection onto C. The one-dimensional Lagrangian dual
// lambda -> mu_hat' project_simplex(z + lambda*mu_hat) is nondecreasing and
// piecewise linear; its root is located by secant with a bisection safeguard
// to |mu_hat'x - b| <= 1e-12. Throws EmptySetError when C is empty.
Vector project_C(const Vector& z, const HalfspaceSimplex& set);

// Moreau envelope of t*|.|_1 with unit prox parameter:
// sum_i huber(z_i; t), huber(a; t) = a^2/2 if |a| <= t else t|a| - t^2/2.
double moreau_env_l1(const Vector& z, double t);

// (1/(2*sigma)) * ||z - Pi_C(z)||^2.
double moreau_env_indicator_C(const Vector& z, double sigma, const HalfspaceSimplex& set);

}  // namespace drmlsad
