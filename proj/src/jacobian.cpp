#include "drmlsad/jacobian.hpp"

#include <cmath>

namespace drmlsad {

Matrix HsJacobian::dense() const {
    Matrix n0 = Matrix::Zero(m, m);
    for (Eigen::Index i : k2) n0(i, i) = 1.0;
    if (basis.cols() > 0) n0 -= basis * basis.transpose();
    return n0;
}

HsJacobian projC_hs_jacobian(const Vector& z, const HalfspaceSimplex& set) {
    return projC_hs_jacobian_at(project_C(z, set), set);
}

HsJacobian projC_hs_jacobian_at(const Vector& p, const HalfspaceSimplex& set) {
    if (set.empty()) throw EmptySetError();

    HsJacobian jac;
    jac.m = p.size();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] != 0.0) jac.k2.push_back(i);
    }
    const auto k = static_cast<double>(jac.k2.size());
    if (jac.k2.empty()) {
        jac.basis = Matrix::Zero(jac.m, 0);
        return jac;
    }

    Vector e_k2 = Vector::Zero(jac.m);
    for (Eigen::Index i : jac.k2) e_k2[i] = 1.0;

    const bool active = std::abs(set.mu_hat.dot(p) - set.b) <= kHalfspaceActiveTol;
    if (!active) {
        jac.case_tag = HsJacobianCase::HalfspaceInactive;
        jac.basis = e_k2 / std::sqrt(k);
        return jac;
    }

    Vector mu_k2 = Vector::Zero(jac.m);
    for (Eigen::Index i : jac.k2) mu_k2[i] = set.mu_hat[i];
    const double q = mu_k2.squaredNorm();
    const double s = mu_k2.sum();
    const double eta = q * k - s * s;

    if (eta > 1e-12 * q * k) {
        jac.case_tag = HsJacobianCase::HalfspaceActiveGeneral;
        // Gram-Schmidt on {e_K2, mu_K2}: the second direction is mu centered
        // on the support, which stays supported on K2.
        Vector b1 = e_k2 / std::sqrt(k);
        Vector b2 = mu_k2 - (s / k) * e_k2;
        b2 /= b2.norm();
        jac.basis = Matrix(jac.m, 2);
        jac.basis.col(0) = b1;
        jac.basis.col(1) = b2;
    } else {
        jac.case_tag = HsJacobianCase::HalfspaceActiveDegenerate;
        jac.basis = e_k2 / std::sqrt(k);
    }
    return jac;
}

L1ProxJacobian l1_prox_jacobian(const Vector& z, double t) {
    L1ProxJacobian jac;
    jac.active = (z.array().abs() > t).cast<double>();
    return jac;
}

Vector apply_N0(const HsJacobian& j, const Vector& d) {
    Vector out = Vector::Zero(j.m);
    for (Eigen::Index i : j.k2) out[i] = d[i];
    if (j.basis.cols() > 0) out -= j.basis * (j.basis.transpose() * d);
    return out;
}

Matrix assemble_ANAt(const Matrix& A, const HsJacobian& j) {
    const Eigen::Index n = A.rows();
    if (j.k2.empty()) return Matrix::Zero(n, n);

    Matrix a_k2(n, static_cast<Eigen::Index>(j.k2.size()));
    for (size_t c = 0; c < j.k2.size(); ++c) a_k2.col(static_cast<Eigen::Index>(c)) = A.col(j.k2[c]);

    Matrix result(n, n);
    result.setZero();
    result.selfadjointView<Eigen::Lower>().rankUpdate(a_k2);
    if (j.basis.cols() > 0) {
        const Matrix ab = A * j.basis;  // n x (1 or 2)
        result.selfadjointView<Eigen::Lower>().rankUpdate(ab, -1.0);
    }
    result.triangularView<Eigen::StrictlyUpper>() = result.transpose();
    return result;
}

}  // namespace drmlsad
