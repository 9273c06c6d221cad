#pragma once

#include "drmlsad/ppdssn.hpp"
#include "drmlsad/types.hpp"

#include <cstdint>
#include <optional>

namespace drmlsad {

enum class RadiusScaling { Theorem, PaperLiteral };

// Output of the radius-selection procedure. epsilon carries the chosen
// scaling; both scalings of the quantile are recoverable from eta_quantile
// (theorem: eta/sqrt(N), literal: sqrt(N)*eta).
struct RadiusEstimate {
    double epsilon = 0.0;
    double eta_quantile = 0.0;
    double alpha_bar = 0.05;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vector lambda3;
    long k_samples = 0;
    std::uint64_t seed = 0;
    RadiusScaling scaling = RadiusScaling::Theorem;
    bool degenerate_covariance = false;  // all moment vectors identical; epsilon = 0
};

// Target return rho_bar = mu_hat' x_N where x_N solves the plain SAA problem
// over the simplex (no mean-return floor, epsilon = 0).
double choose_target_return(const ReturnsDataset& data, double tol = 1e-9);

// Empirical-risk-minimizing portfolio at return level exactly rho_bar:
// min (1/N) sum max(0, a_i'x) s.t. e'x = 1, x >= 0, mu_hat'x = rho_bar.
// Requires min mu_hat <= rho_bar <= max mu_hat; the equality is reached by a
// projected-subgradient refinement of the inequality-constrained solve and
// verified to 1e-8.
Vector solve_erm(const ReturnsDataset& data, double rho_bar, double tol = 1e-9);

struct MultiplierEstimates {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vector lambda3;
};

// Empirical limit multipliers of the return-constrained risk problem. The
// per-support-index lambda1 values are averaged (indices with
// |mu_hat_i - rho_bar| <= 1e-10 are skipped; if all are skipped,
// DegenerateDenominatorError). lambda3 is clamped at 0 from below.
MultiplierEstimates estimate_multipliers(const ReturnsDataset& data, const Vector& x_erm,
                                         double rho_bar);

struct RwpiOptions {
    double alpha_bar = 0.05;
    std::optional<long> k;  // default floor(0.2 N)
    std::uint64_t seed = 0;
    RadiusScaling scaling = RadiusScaling::Theorem;
};

// Empirical (1-alpha)-quantile of ||H||_inf over k draws H ~ N(0, cov),
// sampled through the eigendecomposition square root with negative
// eigenvalues floored at 0. Seeded and bit-reproducible.
double gaussian_maxnorm_quantile(const Matrix& cov, double alpha_bar, long k, std::uint64_t seed);

// Radius selection: moment vectors h = (1+|l1|)|xi| + |l2|e + l3 over the
// sample, their covariance, k Gaussian draws through the eigendecomposition
// square root (negative eigenvalues floored at 0), and the empirical
// (1-alpha)-quantile of the max norm.
RadiusEstimate rwpi_radius(const ReturnsDataset& data, double rho_bar, const RwpiOptions& options = {});

// Default cross-validation grid 0.01, 0.03, ..., 0.15.
std::vector<double> default_cv_grid();

// k-fold cross-validation over contiguous blocks: train the robust model at
// each grid epsilon (rho = rho_bar - epsilon on the training folds), score
// the held-out lower semi-absolute deviation, return the argmin epsilon
// (ties resolved to the smallest).
double cv_radius(const ReturnsDataset& data, const std::vector<double>& grid, int folds = 5,
                 double tol = 1e-7);

}  // namespace drmlsad
