#include "drmlsad/oracle.hpp"

#include <cmath>
#include <limits>

namespace drmlsad {
namespace oracle {

namespace {

struct Candidate {
    Vector x;
    double dist2 = std::numeric_limits<double>::infinity();
    double nu = 0.0;
    bool valid = false;
};

// Closed-form minimizer of ||x - z||^2 over x_F free, x_{F^c} = 0,
// e'x_F = 1 and optionally mu'x_F = b. Returns primal-feasible candidates
// only (x >= -tol and, in the inactive case, mu'x >= b - tol).
void try_active_set(const Vector& z, const HalfspaceSimplex& set, unsigned mask, bool halfspace_eq,
                    Candidate& best) {
    const Eigen::Index m = z.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < m; ++i)
        if (mask & (1u << i)) free.push_back(i);
    if (free.empty()) return;
    const double f = static_cast<double>(free.size());

    double theta = 0.0, nu = 0.0;
    if (!halfspace_eq) {
        double sz = 0.0;
        for (auto i : free) sz += z[i];
        theta = (sz - 1.0) / f;
    } else {
        double sz = 0.0, smu = 0.0, qmu = 0.0, zmu = 0.0;
        for (auto i : free) {
            sz += z[i];
            smu += set.mu_hat[i];
            qmu += set.mu_hat[i] * set.mu_hat[i];
            zmu += set.mu_hat[i] * z[i];
        }
        // x_F = z_F - theta e + nu mu_F with e'x_F = 1, mu'x_F = b.
        const double det = f * qmu - smu * smu;
        if (std::abs(det) <= 1e-14 * (1.0 + f * qmu)) return;  // mu_F parallel to e
        const double r1 = sz - 1.0;
        const double r2 = zmu - set.b;
        theta = (qmu * r1 - smu * r2) / det;
        nu = (smu * r1 - f * r2) / det;
    }

    Vector x = Vector::Zero(m);
    for (auto i : free) x[i] = z[i] - theta + (halfspace_eq ? nu * set.mu_hat[i] : 0.0);

    constexpr double tol = 1e-11;
    for (auto i : free)
        if (x[i] < -tol) return;
    if (!halfspace_eq && set.mu_hat.dot(x) < set.b - tol) return;

    for (auto i : free) x[i] = std::max(x[i], 0.0);
    const double dist2 = (x - z).squaredNorm();
    if (dist2 < best.dist2) {
        best.x = x;
        best.dist2 = dist2;
        best.nu = halfspace_eq ? nu : 0.0;
        best.valid = true;
    }
}

}  // namespace

ProjectionCertificate activeset_project_certified(const Vector& z, const HalfspaceSimplex& set) {
    if (set.empty()) throw EmptySetError();
    const Eigen::Index m = z.size();
    if (m > 12) throw SolverError("activeset_project enumerates 2^m subsets; m <= 12 required");

    Candidate best;
    const unsigned full = (1u << m);
    const bool has_halfspace = !(std::isinf(set.b) && set.b < 0);
    for (unsigned mask = 1; mask < full; ++mask) {
        try_active_set(z, set, mask, false, best);
        if (has_halfspace) try_active_set(z, set, mask, true, best);
    }
    if (!best.valid) throw EmptySetError("no feasible active set found");

    ProjectionCertificate cert;
    cert.x = best.x;
    cert.nu = std::max(best.nu, 0.0);
    // Bound multiplier on a zero coordinate is the stationarity slack.
    cert.bound_multipliers = Vector::Zero(m);
    double theta_rec = 0.0;
    Eigen::Index support = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        if (cert.x[i] > 0.0) {
            theta_rec += z[i] - cert.x[i] + best.nu * (has_halfspace ? set.mu_hat[i] : 0.0);
            ++support;
        }
    theta_rec /= std::max<Eigen::Index>(support, 1);
    for (Eigen::Index i = 0; i < m; ++i)
        if (cert.x[i] == 0.0)
            cert.bound_multipliers[i] =
                theta_rec - z[i] - best.nu * (has_halfspace ? set.mu_hat[i] : 0.0);
    return cert;
}

Vector activeset_project(const Vector& z, const HalfspaceSimplex& set) {
    return activeset_project_certified(z, set).x;
}

std::pair<Vector, double> subgradient_reference_solve(const DrMlsadProblem& prob, long iters) {
    const Matrix& A = prob.scenario().A;
    const double n = static_cast<double>(prob.samples());
    const double eps = prob.epsilon();
    const HalfspaceSimplex set = feasible_set(prob);

    Vector x = project_C(Vector::Zero(prob.assets()), set);
    Vector best_x = x;
    double best_val = objective_value(x, prob);

    double row_scale = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        row_scale = std::max(row_scale, A.row(i).norm());
    const double c = std::sqrt(2.0) / (1.0 + row_scale);

    for (long k = 1; k <= iters; ++k) {
        const Vector dev = A * x;
        Vector sub = Vector::Zero(x.size());
        for (Eigen::Index i = 0; i < dev.size(); ++i)
            if (dev[i] - eps > 0.0) sub += A.row(i).transpose();
        sub /= n;

        const double step = c / std::sqrt(static_cast<double>(k));
        x = project_C(x - step * sub, set);
        const double val = objective_value(x, prob);
        if (val < best_val) {
            best_val = val;
            best_x = x;
        }
    }
    return {best_x, best_val};
}

}  // namespace oracle
}  // namespace drmlsad
