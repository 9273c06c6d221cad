#include "drmlsad/rwpi.hpp"

#include "drmlsad/data.hpp"
#include "drmlsad/prox.hpp"

#include <algorithm>
#include <cmath>

namespace drmlsad {

double choose_target_return(const ReturnsDataset& data, double tol) {
    ScenarioModel model = build_scenario_model(data);
    const Vector mu_hat = model.mu_hat;
    DrMlsadProblem saa = DrMlsadProblem::without_return_floor(std::move(model), 0.0);
    auto [it, report] = ppa_solve(saa, tol);
    return mu_hat.dot(it.x);
}

namespace {

// Projection onto {e'x = 1, x >= 0, mu_hat'x = rho_bar}: root of the
// piecewise-linear nondecreasing map lambda -> mu_hat'proj_simplex(z + lambda mu_hat)
// over the whole real line (the half-space version restricts to lambda >= 0).
Vector project_equality_simplex(const Vector& z, const Vector& mu_hat, double rho_bar) {
    const auto g = [&](double lambda) {
        return mu_hat.dot(project_simplex(z + lambda * mu_hat)) - rho_bar;
    };
    double lo = 0.0, hi = 0.0, glo = g(0.0), ghi = glo;
    if (glo < 0.0) {
        hi = 1.0;
        ghi = g(hi);
        for (int i = 0; ghi < 0.0 && i < 200; ++i) {
            lo = hi;
            glo = ghi;
            hi *= 2.0;
            ghi = g(hi);
        }
    } else {
        lo = -1.0;
        glo = g(lo);
        for (int i = 0; glo > 0.0 && i < 200; ++i) {
            hi = lo;
            ghi = glo;
            lo *= 2.0;
            glo = g(lo);
        }
    }
    double lambda = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        double next = (std::abs(ghi - glo) > 0.0) ? hi - ghi * (hi - lo) / (ghi - glo)
                                                  : 0.5 * (lo + hi);
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        const double gn = g(next);
        lambda = next;
        if (std::abs(gn) <= 1e-13) break;
        if (gn < 0.0) {
            lo = next;
            glo = gn;
        } else {
            hi = next;
            ghi = gn;
        }
        if (hi - lo <= 1e-16 * (1.0 + std::abs(hi))) break;
    }
    return project_simplex(z + lambda * mu_hat);
}

}  // namespace

Vector solve_erm(const ReturnsDataset& data, double rho_bar, double tol) {
    ScenarioModel model = build_scenario_model(data);
    const Vector mu_hat = model.mu_hat;
    if (rho_bar < mu_hat.minCoeff() - 1e-12 || rho_bar > mu_hat.maxCoeff() + 1e-12)
        throw InfeasibleTargetError("target return outside [min mean, max mean]");

    const Matrix& A = model.A;
    const double n = static_cast<double>(A.rows());

    // Inequality-constrained solve first; the floor is active at the optimum
    // whenever rho_bar is at or above the unconstrained optimal return.
    DrMlsadProblem prob(model, 0.0, rho_bar);
    auto [it, report] = ppa_solve(prob, tol);
    Vector x = it.x;

    if (std::abs(mu_hat.dot(x) - rho_bar) > 1e-8) {
        // Refine on the equality set by projected subgradient.
        x = project_equality_simplex(x, mu_hat, rho_bar);
        Vector best_x = x;
        double best_val = std::numeric_limits<double>::infinity();
        double row_scale = 0.0;
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            row_scale = std::max(row_scale, A.row(i).norm());
        const double c = std::sqrt(2.0) / (1.0 + row_scale);
        const long iters = 20000;
        for (long k = 1; k <= iters; ++k) {
            const Vector dev = A * x;
            Vector sub = Vector::Zero(x.size());
            double val = 0.0;
            for (Eigen::Index i = 0; i < dev.size(); ++i)
                if (dev[i] > 0.0) {
                    sub += A.row(i).transpose();
                    val += dev[i];
                }
            val /= n;
            if (val < best_val) {
                best_val = val;
                best_x = x;
            }
            x = project_equality_simplex(x - (c / std::sqrt(double(k))) * sub, mu_hat, rho_bar);
        }
        x = best_x;
    }

    if (std::abs(mu_hat.dot(x) - rho_bar) > 1e-8)
        throw InfeasibleTargetError("equality refinement failed to reach the target return");
    return x;
}

MultiplierEstimates estimate_multipliers(const ReturnsDataset& data, const Vector& x_erm,
                                         double rho_bar) {
    const Matrix& xi = data.returns();
    const Eigen::Index n = xi.rows(), m = xi.cols();
    const double nn = static_cast<double>(n);
    const Vector mu_hat = xi.colwise().mean();

    // Strict-inequality indicator events {xi'x - rho_bar < 0}.
    Vector e_xi_ind = Vector::Zero(m);
    for (Eigen::Index t = 0; t < n; ++t)
        if (xi.row(t).dot(x_erm) - rho_bar < 0.0) e_xi_ind += xi.row(t).transpose();
    e_xi_ind /= nn;

    const double xs = x_erm.dot(e_xi_ind);

    MultiplierEstimates est;
    double lambda1_sum = 0.0;
    long lambda1_count = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (x_erm[i] == 0.0) continue;
        const double denom = mu_hat[i] - rho_bar;
        if (std::abs(denom) <= 1e-10) continue;
        lambda1_sum += (-e_xi_ind[i] + xs) / denom;
        ++lambda1_count;
    }
    if (lambda1_count == 0)
        throw DegenerateDenominatorError(
            "every support index has mean return equal to the target");
    est.lambda1 = lambda1_sum / static_cast<double>(lambda1_count);
    est.lambda2 = xs - est.lambda1 * rho_bar;
    est.lambda3 = (e_xi_ind - est.lambda1 * mu_hat).array() - est.lambda2;
    est.lambda3 = est.lambda3.cwiseMax(0.0);
    return est;
}

double gaussian_maxnorm_quantile(const Matrix& cov, double alpha_bar, long k,
                                 std::uint64_t seed) {
    if (k < 1) throw SolverError("quantile estimation needs at least one draw");
    // Square root through the symmetric eigendecomposition, eigenvalues
    // floored at 0 (the covariance is frequently rank-deficient).
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector sqrt_eval = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix root = eig.eigenvectors() * sqrt_eval.asDiagonal();

    NormalSampler rng(seed);
    std::vector<double> max_norms(static_cast<size_t>(k));
    Vector gauss(cov.rows());
    for (long s = 0; s < k; ++s) {
        for (Eigen::Index j = 0; j < gauss.size(); ++j) gauss[j] = rng.normal();
        max_norms[static_cast<size_t>(s)] = (root * gauss).cwiseAbs().maxCoeff();
    }
    std::sort(max_norms.begin(), max_norms.end());
    const auto idx = static_cast<size_t>(std::min<double>(
        std::ceil((1.0 - alpha_bar) * static_cast<double>(k)), static_cast<double>(k)));
    return max_norms[idx == 0 ? 0 : idx - 1];
}

RadiusEstimate rwpi_radius(const ReturnsDataset& data, double rho_bar, const RwpiOptions& options) {
    const Matrix& xi = data.returns();
    const Eigen::Index n = xi.rows(), m = xi.cols();
    if (n < 5) throw SolverError("radius selection needs at least 5 samples");

    const Vector x_erm = solve_erm(data, rho_bar);
    const MultiplierEstimates mult = estimate_multipliers(data, x_erm, rho_bar);

    RadiusEstimate est;
    est.alpha_bar = options.alpha_bar;
    est.seed = options.seed;
    est.scaling = options.scaling;
    est.lambda1 = mult.lambda1;
    est.lambda2 = mult.lambda2;
    est.lambda3 = mult.lambda3;
    est.k_samples = options.k.value_or(static_cast<long>(n / 5));

    // Moment vectors h(xi_t) = (1+|l1|)|xi_t| + |l2| e + l3 and their
    // covariance (unbiased normalization).
    Matrix h(n, m);
    for (Eigen::Index t = 0; t < n; ++t)
        h.row(t) = ((1.0 + std::abs(mult.lambda1)) * xi.row(t).cwiseAbs()).array() +
                   std::abs(mult.lambda2) + mult.lambda3.transpose().array();
    const Vector h_mean = h.colwise().mean();
    Matrix centered = h.rowwise() - h_mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);

    // Identical moment vectors leave a covariance that is zero up to the
    // rounding of the column means.
    const double h_scale = h.cwiseAbs().maxCoeff();
    const double cov_floor = std::pow(1e-13 * (1.0 + h_scale), 2);
    if (cov.cwiseAbs().maxCoeff() <= cov_floor) {
        est.degenerate_covariance = true;
        est.eta_quantile = 0.0;
        est.epsilon = 0.0;
        return est;
    }

    est.eta_quantile =
        gaussian_maxnorm_quantile(cov, options.alpha_bar, est.k_samples, options.seed);

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    est.epsilon = options.scaling == RadiusScaling::Theorem ? est.eta_quantile / sqrt_n
                                                            : sqrt_n * est.eta_quantile;
    return est;
}

std::vector<double> default_cv_grid() {
    std::vector<double> grid;
    for (double e = 0.01; e <= 0.15 + 1e-12; e += 0.02) grid.push_back(e);
    return grid;
}

namespace {

// Lower semi-absolute deviation of the portfolio under the held-out block's
// own empirical distribution.
double holdout_lsad(const ReturnsDataset& fold, const Vector& x) {
    const Vector r = fold.returns() * x;
    const double mean = r.mean();
    double risk = 0.0;
    for (Eigen::Index t = 0; t < r.size(); ++t) risk += std::max(0.0, mean - r[t]);
    return risk / static_cast<double>(r.size());
}

}  // namespace

double cv_radius(const ReturnsDataset& data, const std::vector<double>& grid, int folds,
                 double tol) {
    if (folds < 2) throw SolverError("cross-validation needs at least 2 folds");
    if (grid.empty()) throw SolverError("cross-validation grid is empty");
    if (grid.size() == 1) return grid.front();

    const Eigen::Index n = data.periods();
    if (n < 2 * folds) throw SolverError("not enough rows for the requested folds");

    // Contiguous blocks; fold f gets rows [bounds[f], bounds[f+1]).
    std::vector<Eigen::Index> bounds(folds + 1);
    for (int f = 0; f <= folds; ++f)
        bounds[f] = static_cast<Eigen::Index>(f) * n / folds;

    double best_eps = grid.front();
    double best_risk = std::numeric_limits<double>::infinity();
    for (double eps : grid) {
        double risk_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            const Eigen::Index lo = bounds[f], hi = bounds[f + 1];
            Matrix train(n - (hi - lo), data.assets());
            train.topRows(lo) = data.returns().topRows(lo);
            train.bottomRows(n - hi) = data.returns().bottomRows(n - hi);
            ReturnsDataset train_data(train, data.asset_names(), {}, data.unit());

            const double rho_bar = choose_target_return(train_data, tol);
            DrMlsadProblem prob(build_scenario_model(train_data), eps, rho_bar - eps);
            auto [it, report] = ppa_solve(prob, tol);
            risk_sum += holdout_lsad(data.window(lo, hi - lo), it.x);
        }
        const double risk = risk_sum / folds;
        if (risk < best_risk - 1e-15) {
            best_risk = risk;
            best_eps = eps;
        }
    }
    return best_eps;
}

}  // namespace drmlsad
