#pragma once

#include "drmlsad/prox.hpp"
#include "drmlsad/types.hpp"

namespace drmlsad {
namespace oracle {

// Brute-force projection onto C for m <= 12: enumerates every active set of
// the bound constraints crossed with {half-space active, inactive}, solves
// each equality-constrained least-squares system in closed form, filters
// primal feasibility, and returns the closest candidate. Independent of the
// production root-finding path.
Vector activeset_project(const Vector& z, const HalfspaceSimplex& set);

// Variant that also reports the candidate's multipliers (half-space
// multiplier nu and the bound multipliers on the inactive coordinates) so
// tests can assert dual feasibility.
struct ProjectionCertificate {
    Vector x;
    double nu = 0.0;          // >= 0 when the half-space is active
    Vector bound_multipliers; // >= 0 on zero coordinates
};

ProjectionCertificate activeset_project_certified(const Vector& z, const HalfspaceSimplex& set);

// Projected subgradient on the max-form objective with step c/sqrt(k) and
// projection by project_C; keeps the best objective seen. A reference for
// solver objectives, not a production solver.
std::pair<Vector, double> subgradient_reference_solve(const DrMlsadProblem& prob,
                                                      long iters = 200000);

}  // namespace oracle
}  // namespace drmlsad
