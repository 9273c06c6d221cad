#pragma once

#include "drmlsad/prox.hpp"
#include "drmlsad/types.hpp"

namespace drmlsad {

enum class HsJacobianCase {
    HalfspaceInactive,
    HalfspaceActiveGeneral,
    HalfspaceActiveDegenerate,  // mu_hat restricted to the support is a multiple of e
};

// Low-rank element N0 of the generalized HS-Jacobian of Pi_C at a point:
// N0 = Diag(w) - B*B', with w the 0/1 indicator of the support K2 of the
// projection and B an orthonormal basis (1 or 2 columns, supported on K2).
// N0 is the orthogonal projector onto
//   { d | d_{K1} = 0, e'd_{K2} = 0 [, mu_hat'd_{K2} = 0] },
// which coincides with the explicit rank-one/rank-two expressions.
struct HsJacobian {
    std::vector<Eigen::Index> k2;
    HsJacobianCase case_tag = HsJacobianCase::HalfspaceInactive;
    Matrix basis;  // m x (1 or 2), orthonormal columns, zero outside K2
    Eigen::Index m = 0;

    Matrix dense() const;  // m x m, for tests and small problems
};

// Clarke Jacobian of the l1 proximal map: Diag(active) with
// active_i = 1 iff |z_i| > t.
struct L1ProxJacobian {
    Eigen::ArrayXd active;
};

HsJacobian projC_hs_jacobian(const Vector& z, const HalfspaceSimplex& set);

// Variant reusing an already computed projection p = Pi_C(z).
HsJacobian projC_hs_jacobian_at(const Vector& p, const HalfspaceSimplex& set);

L1ProxJacobian l1_prox_jacobian(const Vector& z, double t);

// N0*d as w.*d - B(B'd), cost O(|K2|).
Vector apply_N0(const HsJacobian& j, const Vector& d);

// Dense A*N0*A' assembled from the K2 column block and the rank-<=2
// correction: A_{K2}A_{K2}' - (A B)(A B)'. Cost O(N^2 |K2|).
Matrix assemble_ANAt(const Matrix& A, const HsJacobian& j);

}  // namespace drmlsad
