#include "drmlsad/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace drmlsad {

Vector soft_threshold(const Vector& z, double t) {
    return z.array().sign() * (z.array().abs() - t).max(0.0);
}

Vector project_linf_ball(const Vector& z, double t) {
    return z.array().min(t).max(-t);
}

namespace {

// One correction sweep keeps e'x = 1 to machine precision after the
// sort-and-shift step; accumulated rounding over long vectors otherwise
// leaves an O(m*eps*scale) defect.
void renormalize_on_support(Vector& x) {
    for (int pass = 0; pass < 2; ++pass) {
        double sum = x.sum();
        if (std::abs(sum - 1.0) <= 1e-15) break;
        Eigen::Index support = (x.array() > 0.0).count();
        if (support == 0) break;
        const double shift = (sum - 1.0) / static_cast<double>(support);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (x[i] > 0.0) x[i] = std::max(0.0, x[i] - shift);
        }
    }
}

}  // namespace

Vector project_simplex(const Vector& z) {
    const Eigen::Index m = z.size();
    std::vector<double> sorted(z.data(), z.data() + m);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    double cumsum = 0.0;
    double theta = sorted.front() - 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        cumsum += sorted[j];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) {
            theta = candidate;
        } else {
            break;
        }
    }

    Vector x = (z.array() - theta).max(0.0);
    renormalize_on_support(x);
    return x;
}

Vector project_C(const Vector& z, const HalfspaceSimplex& set) {
    if (set.empty()) throw EmptySetError();

    Vector x0 = project_simplex(z);
    if (std::isinf(set.b) && set.b < 0) return x0;
    const double g0 = set.mu_hat.dot(x0) - set.b;
    if (g0 >= 0.0) return x0;

    const auto g = [&](double lambda) -> double {
        Vector x = project_simplex(z + lambda * set.mu_hat);
        return set.mu_hat.dot(x) - set.b;
    };

    // Bracket the root: g is nondecreasing, g(0) < 0, and g reaches
    // max(mu_hat) - b >= 0 at finite lambda.
    double lo = 0.0, glo = g0;
    double hi = 1.0, ghi = g(hi);
    int grow = 0;
    while (ghi < 0.0 && grow < 200) {
        lo = hi;
        glo = ghi;
        hi *= 2.0;
        ghi = g(hi);
        ++grow;
    }

    // Close the bracket; on success take the converged multiplier, on
    // exhaustion or interval collapse take the feasible end (g >= 0).
    double lambda = hi;
    for (int iter = 0; iter < 200; ++iter) {
        double next;
        if (std::abs(ghi - glo) > 0.0) {
            next = hi - ghi * (hi - lo) / (ghi - glo);  // secant
        } else {
            next = 0.5 * (lo + hi);
        }
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
        const double gn = g(next);
        if (std::abs(gn) <= 1e-12) {
            lambda = next;
            break;
        }
        if (gn < 0.0) {
            lo = next;
            glo = gn;
        } else {
            hi = next;
            ghi = gn;
        }
        lambda = hi;
        if (hi - lo <= 1e-17 * (1.0 + hi)) break;  // collapsed onto a kink
    }

    Vector x = project_simplex(z + lambda * set.mu_hat);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0 && x[i] > -1e-14) x[i] = 0.0;
    }
    return x;
}

double moreau_env_l1(const Vector& z, double t) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double a = std::abs(z[i]);
        value += (a <= t) ? 0.5 * a * a : t * a - 0.5 * t * t;
    }
    return value;
}

double moreau_env_indicator_C(const Vector& z, double sigma, const HalfspaceSimplex& set) {
    const Vector p = project_C(z, set);
    return (z - p).squaredNorm() / (2.0 * sigma);
}

}  // namespace drmlsad
