#include "drmlsad/jacobian.hpp"

#include <doctest.h>

#include "test_helpers.hpp"

using namespace drmlsad;

namespace {

HalfspaceSimplex random_set(testing::Uniform& rng, Eigen::Index m, double slack) {
    HalfspaceSimplex set;
    set.mu_hat = rng.vector(m, -1.0, 2.0);
    set.b = set.mu_hat.maxCoeff() - slack;
    return set;
}

// Explicit rank-one/rank-two expressions restricted to the support, used as
// the dense reference for the projector construction.
Matrix dense_reference(const HsJacobian& jac, const HalfspaceSimplex& set) {
    Matrix n0 = Matrix::Zero(jac.m, jac.m);
    if (jac.k2.empty()) return n0;
    const double k = static_cast<double>(jac.k2.size());
    Vector e = Vector::Zero(jac.m), mu = Vector::Zero(jac.m);
    for (auto i : jac.k2) {
        n0(i, i) = 1.0;
        e[i] = 1.0;
        mu[i] = set.mu_hat[i];
    }
    if (jac.case_tag == HsJacobianCase::HalfspaceActiveGeneral) {
        const double q = mu.squaredNorm(), s = mu.sum();
        const double eta = q * k - s * s;
        n0 -= (k * mu * mu.transpose() - s * (mu * e.transpose() + e * mu.transpose()) +
               q * e * e.transpose()) /
              eta;
    } else {
        n0 -= e * e.transpose() / k;
    }
    return n0;
}

}  // namespace

TEST_CASE("interior point gives the centered projector") {
    HalfspaceSimplex set;
    set.mu_hat = Vector(2);
    set.mu_hat << 2.0, 1.0;
    set.b = 1.2;
    Vector z(2);
    z << 0.55, 0.45;  // already feasible with slack, support {0, 1}
    const HsJacobian jac = projC_hs_jacobian(z, set);
    CHECK(jac.case_tag == HsJacobianCase::HalfspaceInactive);
    const Matrix n0 = jac.dense();
    CHECK(n0(0, 0) == doctest::Approx(0.5));
    CHECK(n0(0, 1) == doctest::Approx(-0.5));
    CHECK(n0(1, 0) == doctest::Approx(-0.5));
    CHECK(n0(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("degenerate active case collapses to the rank-one form") {
    HalfspaceSimplex set;
    set.mu_hat = Vector::Constant(3, 1.0);  // mu proportional to e on any support
    set.b = 1.0;                            // active everywhere on the simplex
    Vector z(3);
    z << 0.2, 0.5, 0.3;
    const HsJacobian jac = projC_hs_jacobian(z, set);
    CHECK(jac.case_tag == HsJacobianCase::HalfspaceActiveDegenerate);
    const Matrix expected = dense_reference(jac, set);
    CHECK((jac.dense() - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("projector invariants on random points") {
    testing::Uniform rng(61);
    int active_general_seen = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = static_cast<Eigen::Index>(2 + trial % 6);
        // Alternate between generic sets and sets whose half-space ends up active.
        const double slack = (trial % 3 == 0) ? 1e-3 : rng(0.1, 1.0);
        HalfspaceSimplex set = random_set(rng, m, slack);
        const Vector z = rng.vector(m, -2.0, 2.0);
        const HsJacobian jac = projC_hs_jacobian(z, set);
        const Matrix n0 = jac.dense();

        CHECK((n0 - n0.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((n0 * n0 - n0).norm() <= 1e-10);  // idempotent

        Vector e_k2 = Vector::Zero(m), mu_k2 = Vector::Zero(m);
        for (auto i : jac.k2) {
            e_k2[i] = 1.0;
            mu_k2[i] = set.mu_hat[i];
        }
        CHECK((n0 * e_k2).cwiseAbs().maxCoeff() <= 1e-12);
        if (jac.case_tag == HsJacobianCase::HalfspaceActiveGeneral) {
            ++active_general_seen;
            CHECK((n0 * mu_k2).cwiseAbs().maxCoeff() <= 1e-10);
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            bool in_k2 = std::find(jac.k2.begin(), jac.k2.end(), i) != jac.k2.end();
            if (!in_k2) CHECK(n0.row(i).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
        }

        CHECK((n0 - dense_reference(jac, set)).norm() <= 1e-10);
    }
    CHECK(active_general_seen > 10);
}

TEST_CASE("directional finite differences of the projection match N0") {
    testing::Uniform rng(67);
    const double h = 1e-6;
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 200; ++trial) {
        const auto m = static_cast<Eigen::Index>(3 + trial % 5);
        HalfspaceSimplex set = random_set(rng, m, rng(0.1, 1.0));
        const Vector z = rng.vector(m, -2.0, 2.0);
        const Vector p = project_C(z, set);

        // Skip near-degenerate points where the projection is not smooth:
        // components at the boundary or a half-space on the verge of switching.
        bool degenerate = std::abs(set.mu_hat.dot(p) - set.b) < 1e-4;
        for (Eigen::Index i = 0; i < m; ++i)
            if (p[i] != 0.0 && p[i] < 1e-4) degenerate = true;
        if (degenerate) continue;

        const HsJacobian jac = projC_hs_jacobian(z, set);
        for (int dir = 0; dir < 20; ++dir) {
            Vector d = rng.vector(m, -1.0, 1.0);
            d /= d.norm();
            const Vector fd = (project_C(z + h * d, set) - p) / h;
            const Vector jd = apply_N0(jac, d);
            CHECK((fd - jd).norm() <= 1e-5 * (1.0 + jd.norm()));
        }
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("l1 prox jacobian") {
    const double t = 0.3;
    Vector z(3);
    z << 2.0 * t, 0.0, -3.0 * t;
    const L1ProxJacobian jac = l1_prox_jacobian(z, t);
    CHECK(jac.active(0) == 1.0);
    CHECK(jac.active(1) == 0.0);
    CHECK(jac.active(2) == 1.0);

    const Vector small = Vector::Constant(4, 0.2);
    CHECK(l1_prox_jacobian(small, 0.5).active.sum() == 0.0);
}

TEST_CASE("l1 prox jacobian matches finite differences away from kinks") {
    testing::Uniform rng(71);
    const double h = 1e-7;
    for (int trial = 0; trial < 100; ++trial) {
        const double t = rng(0.1, 1.0);
        Vector z = rng.vector(5, -3.0, 3.0);
        bool near_kink = false;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            if (std::abs(std::abs(z[i]) - t) < 1e-4) near_kink = true;
        if (near_kink) continue;
        const L1ProxJacobian jac = l1_prox_jacobian(z, t);
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            Vector zp = z;
            zp[i] += h;
            const double fd = (soft_threshold(zp, t)(i) - soft_threshold(z, t)(i)) / h;
            CHECK(fd == doctest::Approx(jac.active(i)).epsilon(1e-8));
        }
    }
}

TEST_CASE("apply_N0 structure") {
    testing::Uniform rng(73);
    HalfspaceSimplex set = random_set(rng, 6, 0.5);
    const Vector z = rng.vector(6, -2.0, 2.0);
    const HsJacobian jac = projC_hs_jacobian(z, set);

    Vector e_k2 = Vector::Zero(6);
    for (auto i : jac.k2) e_k2[i] = 1.0;
    CHECK(apply_N0(jac, e_k2).cwiseAbs().maxCoeff() <= 1e-12);

    Vector on_k1 = Vector::Zero(6);
    for (Eigen::Index i = 0; i < 6; ++i)
        if (std::find(jac.k2.begin(), jac.k2.end(), i) == jac.k2.end()) on_k1[i] = 1.0;
    CHECK(apply_N0(jac, on_k1).cwiseAbs().maxCoeff() <= 1e-12);

    const Matrix n0 = jac.dense();
    for (int trial = 0; trial < 100; ++trial) {
        const Vector d = rng.vector(6, -2.0, 2.0);
        CHECK((apply_N0(jac, d) - n0 * d).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("assemble_ANAt matches the dense product and stays PSD") {
    testing::Uniform rng(79);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 8, m = 5;
        Matrix A(n, m);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j) A(i, j) = rng(-1.0, 1.0);
        HalfspaceSimplex set = random_set(rng, m, rng(0.05, 0.5));
        const Vector z = rng.vector(m, -2.0, 2.0);
        const HsJacobian jac = projC_hs_jacobian(z, set);

        const Matrix got = assemble_ANAt(A, jac);
        const Matrix want = A * jac.dense() * A.transpose();
        CHECK((got - want).norm() <= 1e-10 * (1.0 + want.norm()));

        Eigen::SelfAdjointEigenSolver<Matrix> eig(got);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }

    // Empty support gives the zero matrix.
    HsJacobian empty;
    empty.m = 5;
    empty.basis = Matrix::Zero(5, 0);
    const Matrix zero = assemble_ANAt(Matrix::Random(4, 5), empty);
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}
