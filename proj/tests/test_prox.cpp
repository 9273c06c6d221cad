#include "drmlsad/prox.hpp"

#include "drmlsad/oracle.hpp"

#include <doctest.h>

#include "test_helpers.hpp"

using namespace drmlsad;

TEST_CASE("soft threshold basics") {
    CHECK(soft_threshold(Vector::Zero(3), 0.5).isZero());

    Vector z(3);
    z << 3.0, -1.0, 0.2;
    const Vector out = soft_threshold(z, 0.5);
    CHECK(out(0) == doctest::Approx(2.5));
    CHECK(out(1) == doctest::Approx(-0.5));
    CHECK(out(2) == doctest::Approx(0.0));
}

namespace {

// Golden-section minimizer of t|y| + (y - z)^2 / 2, the scalar prox problem.
// A final parabolic step fixes the sqrt(eps) plateau of pure value
// comparisons on the smooth branches; the kink candidate y = 0 is kept.
double scalar_prox_oracle(double z, double t) {
    double lo = -std::abs(z) - t - 1.0, hi = std::abs(z) + t + 1.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto f = [&](double y) { return t * std::abs(y) + 0.5 * (y - z) * (y - z); };
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    for (int i = 0; i < 80; ++i) {
        if (f(a) < f(b)) {
            hi = b;
        } else {
            lo = a;
        }
        a = hi - gr * (hi - lo);
        b = lo + gr * (hi - lo);
    }
    const double mid = 0.5 * (lo + hi);
    // Quadratic branch vertex: y = z -+ t on the side of mid.
    const double vertex = mid > 0.0 ? z - t : z + t;
    double best = mid;
    for (double cand : {vertex, 0.0, mid}) {
        if (f(cand) < f(best)) best = cand;
    }
    return best;
}

}  // namespace

TEST_CASE("soft threshold agrees with the scalar minimization oracle") {
    testing::Uniform rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const double t = rng(0.01, 2.0);
        const Vector z = rng.vector(4, -3.0, 3.0);
        const Vector out = soft_threshold(z, t);
        for (Eigen::Index i = 0; i < z.size(); ++i)
            CHECK(out(i) == doctest::Approx(scalar_prox_oracle(z(i), t)).epsilon(1e-9));
    }
}

TEST_CASE("linf ball projection") {
    Vector inside(2);
    inside << 0.3, -0.7;
    CHECK((project_linf_ball(inside, 1.0) - inside).norm() == doctest::Approx(0.0));

    Vector z(2);
    z << 2.0, -3.0;
    const Vector out = project_linf_ball(z, 1.0);
    CHECK(out(0) == doctest::Approx(1.0));
    CHECK(out(1) == doctest::Approx(-1.0));
}

TEST_CASE("moreau decomposition identity") {
    testing::Uniform rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const double t = rng(0.01, 2.0);
        const Vector z = rng.vector(6, -4.0, 4.0);
        const Vector sum = soft_threshold(z, t) + project_linf_ball(z, t);
        CHECK((sum - z).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("simplex projection basics") {
    Vector feasible(2);
    feasible << 0.3, 0.7;
    CHECK((project_simplex(feasible) - feasible).norm() <= 1e-14);

    Vector vertex(2);
    vertex << 2.0, 0.0;
    const Vector out = project_simplex(vertex);
    CHECK(out(0) == doctest::Approx(1.0));
    CHECK(out(1) == doctest::Approx(0.0));
}

TEST_CASE("simplex projection matches the active-set oracle") {
    testing::Uniform rng(31);
    HalfspaceSimplex plain;  // b = -inf: plain simplex
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = static_cast<Eigen::Index>(2 + trial % 5);
        plain.mu_hat = Vector::Zero(m);
        const Vector z = rng.vector(m, -2.0, 2.0);
        const Vector got = project_simplex(z);
        const Vector want = oracle::activeset_project(z, plain);
        CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("projection onto C: fixed point and hand geometry") {
    HalfspaceSimplex set;
    set.mu_hat = Vector(2);
    set.mu_hat << 2.0, 1.0;
    set.b = 1.5;

    Vector inside(2);
    inside << 0.8, 0.2;  // mu'x = 1.8 >= 1.5
    CHECK((project_C(inside, set) - inside).cwiseAbs().maxCoeff() <= 1e-12);

    Vector z(2);
    z << 0.0, 1.0;
    const Vector proj = project_C(z, set);
    CHECK(proj(0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(proj(1) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("projection onto C matches the active-set oracle") {
    testing::Uniform rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = static_cast<Eigen::Index>(2 + trial % 5);
        HalfspaceSimplex set;
        set.mu_hat = rng.vector(m, -1.0, 2.0);
        // keep the set nonempty with room to spare
        set.b = set.mu_hat.maxCoeff() - rng(0.0, 1.0) - 1e-3;
        const Vector z = rng.vector(m, -2.0, 2.0);
        const Vector got = project_C(z, set);
        const Vector want = oracle::activeset_project(z, set);
        CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("projection onto C output invariants") {
    testing::Uniform rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = static_cast<Eigen::Index>(2 + trial % 8);
        HalfspaceSimplex set;
        set.mu_hat = rng.vector(m, -1.0, 2.0);
        set.b = set.mu_hat.maxCoeff() - rng(1e-4, 1.0);
        const Vector z = rng.vector(m, -3.0, 3.0);
        const Vector x = project_C(z, set);
        CHECK(std::abs(x.sum() - 1.0) <= 1e-12);
        CHECK(x.minCoeff() >= 0.0);
        CHECK(set.mu_hat.dot(x) >= set.b - 1e-10);
    }
}

TEST_CASE("projection is nonexpansive") {
    testing::Uniform rng(43);
    HalfspaceSimplex set;
    set.mu_hat = Vector(4);
    set.mu_hat << 1.0, 0.5, -0.2, 0.8;
    set.b = 0.6;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector a = rng.vector(4, -3.0, 3.0);
        const Vector b = rng.vector(4, -3.0, 3.0);
        CHECK((project_C(a, set) - project_C(b, set)).norm() <= (a - b).norm() + 1e-12);
        const double t = rng(0.01, 1.0);
        CHECK((soft_threshold(a, t) - soft_threshold(b, t)).norm() <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("dual function of the half-space multiplier is nondecreasing") {
    testing::Uniform rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        HalfspaceSimplex set;
        set.mu_hat = rng.vector(5, -1.0, 2.0);
        const Vector z = rng.vector(5, -2.0, 2.0);
        double prev = -std::numeric_limits<double>::infinity();
        for (double lambda = 0.0; lambda <= 5.0; lambda += 0.25) {
            const double val = set.mu_hat.dot(project_simplex(z + lambda * set.mu_hat));
            CHECK(val >= prev - 1e-12);
            prev = val;
        }
    }
}

TEST_CASE("empty set is rejected") {
    HalfspaceSimplex set;
    set.mu_hat = Vector(2);
    set.mu_hat << 0.5, 0.5;
    set.b = 0.6;
    CHECK_THROWS_AS(project_C(Vector::Zero(2), set), EmptySetError);
}

TEST_CASE("l1 moreau envelope values") {
    CHECK(moreau_env_l1(Vector::Zero(4), 0.7) == doctest::Approx(0.0));

    Vector at_kink(1);
    at_kink << 0.7;
    CHECK(moreau_env_l1(at_kink, 0.7) == doctest::Approx(0.7 * 0.7 / 2.0));

    testing::Uniform rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        const double t = rng(0.01, 2.0);
        const Vector z = rng.vector(5, -4.0, 4.0);
        const Vector p = soft_threshold(z, t);
        const double direct = t * p.lpNorm<1>() + 0.5 * (p - z).squaredNorm();
        CHECK(moreau_env_l1(z, t) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("indicator moreau envelope") {
    HalfspaceSimplex set;
    set.mu_hat = Vector(2);
    set.mu_hat << 2.0, 1.0;
    set.b = 1.5;

    Vector inside(2);
    inside << 0.8, 0.2;
    CHECK(moreau_env_indicator_C(inside, 1.0, set) == doctest::Approx(0.0));

    Vector z(2);
    z << 0.0, 1.0;
    CHECK(moreau_env_indicator_C(z, 1.0, set) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(moreau_env_indicator_C(z, 2.0, set) ==
          doctest::Approx(0.125).epsilon(1e-9));  // doubling sigma halves it
}
