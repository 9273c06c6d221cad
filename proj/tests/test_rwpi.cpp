#include "drmlsad/rwpi.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_helpers.hpp"

using namespace drmlsad;

TEST_CASE("target return of the hand instance") {
    const double rho_bar = choose_target_return(testing::hand_instance_data());
    CHECK(rho_bar == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("target return of a constant panel is the common mean value") {
    Matrix r(4, 2);
    r << 0.3, 0.1, 0.3, 0.1, 0.3, 0.1, 0.3, 0.1;
    const ReturnsDataset data(r, {"a", "b"});
    const double rho_bar = choose_target_return(data);
    // Any simplex point is optimal; the value lies between the asset means.
    CHECK(rho_bar >= 0.1 - 1e-9);
    CHECK(rho_bar <= 0.3 + 1e-9);
}

TEST_CASE("target return lies between the extreme asset means") {
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
        const auto data = testing::random_panel(40, 6, seed);
        const Vector mu = data.returns().colwise().mean();
        const double rho_bar = choose_target_return(data);
        CHECK(rho_bar >= mu.minCoeff() - 1e-8);
        CHECK(rho_bar <= mu.maxCoeff() + 1e-8);
    }
}

TEST_CASE("erm at the unconstrained target keeps the unconstrained optimum") {
    const auto data = testing::hand_instance_data();
    const double rho_bar = choose_target_return(data);
    const Vector x = solve_erm(data, rho_bar);
    const Vector mu = data.returns().colwise().mean();
    CHECK(mu.dot(x) == doctest::Approx(rho_bar).epsilon(1e-7));
    // Objective equals the unconstrained value 0 at x = (1/2, 1/2).
    const ScenarioModel model = build_scenario_model(data);
    const Vector dev = model.A * x;
    double risk = 0.0;
    for (Eigen::Index i = 0; i < dev.size(); ++i) risk += std::max(0.0, dev[i]);
    CHECK(risk / 2.0 <= 1e-7);
}

TEST_CASE("erm at the maximal mean lands on the vertex") {
    const auto data = testing::random_panel(30, 5, 55);
    const Vector mu = data.returns().colwise().mean();
    Eigen::Index best;
    mu.maxCoeff(&best);
    const Vector x = solve_erm(data, mu.maxCoeff());
    CHECK(x(best) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("erm rejects unattainable targets") {
    const auto data = testing::random_panel(20, 4, 56);
    const Vector mu = data.returns().colwise().mean();
    CHECK_THROWS_AS(solve_erm(data, mu.maxCoeff() + 1.0), InfeasibleTargetError);
}

TEST_CASE("multipliers vanish when no sample falls below the target") {
    Matrix r(3, 2);
    r << 1.0, 1.0, 1.2, 1.1, 1.4, 1.3;
    const ReturnsDataset data(r, {"a", "b"});
    Vector x(2);
    x << 0.5, 0.5;
    const auto est = estimate_multipliers(data, x, 0.9);  // all returns >= 1 > 0.9
    CHECK(est.lambda1 == 0.0);
    CHECK(est.lambda2 == 0.0);
    CHECK(est.lambda3.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-asset multipliers cancel algebraically") {
    Matrix r(4, 1);
    r << 0.1, 0.5, 0.9, 1.3;
    const ReturnsDataset data(r, {"only"});
    Vector x(1);
    x << 1.0;
    const auto est = estimate_multipliers(data, x, 0.6);
    CHECK(est.lambda1 == doctest::Approx(0.0).epsilon(1e-14));
    // lambda2 = E(xi 1{xi < rho_bar}) = (0.1 + 0.5)/4
    CHECK(est.lambda2 == doctest::Approx(0.15));
    CHECK(est.lambda3(0) == doctest::Approx(0.0));
}

TEST_CASE("crafted panel reproduces the hand-computed multipliers") {
    Matrix r(3, 2);
    r << 0.2, 0.0, 1.0, 0.4, 0.6, 0.8;
    const ReturnsDataset data(r, {"a", "b"});
    Vector x(2);
    x << 0.5, 0.5;
    const auto est = estimate_multipliers(data, x, 0.45);
    CHECK(est.lambda1 == doctest::Approx(-4.0 / 9.0).epsilon(1e-12));
    CHECK(est.lambda2 == doctest::Approx(7.0 / 30.0).epsilon(1e-12));
    CHECK(est.lambda3(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(est.lambda3(1) == doctest::Approx(0.0));
}

TEST_CASE("multipliers are invariant to sample reordering") {
    const auto data = testing::random_panel(25, 4, 57);
    Vector x = Vector::Constant(4, 0.25);
    const Vector mu = data.returns().colwise().mean();
    const double rho_bar = mu.mean();

    Matrix shuffled = data.returns();
    std::vector<Eigen::Index> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index i = 0; i < 25; ++i) shuffled.row(i) = data.returns().row(perm[i]);
    const ReturnsDataset reordered(shuffled, data.asset_names());

    const auto a = estimate_multipliers(data, x, rho_bar);
    const auto b = estimate_multipliers(reordered, x, rho_bar);
    CHECK(a.lambda1 == doctest::Approx(b.lambda1).epsilon(1e-12));
    CHECK(a.lambda2 == doctest::Approx(b.lambda2).epsilon(1e-12));
    CHECK((a.lambda3 - b.lambda3).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gaussian max-norm quantile matches the standard normal") {
    Matrix cov = Matrix::Identity(1, 1);
    const double eta = gaussian_maxnorm_quantile(cov, 0.05, 1000000, 12345);
    CHECK(std::abs(eta - 1.959964) <= 0.02 * 1.959964);
}

TEST_CASE("quantile is nonincreasing in alpha on a fixed stream") {
    Matrix cov = Matrix::Identity(2, 2);
    cov(0, 1) = cov(1, 0) = 0.3;
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.4}) {
        const double eta = gaussian_maxnorm_quantile(cov, alpha, 20000, 99);
        CHECK(eta <= prev + 1e-12);
        prev = eta;
    }
}

TEST_CASE("radius estimation is reproducible and scales as documented") {
    const auto data = testing::random_panel(60, 4, 58);
    const double rho_bar = choose_target_return(data);

    RwpiOptions opts;
    opts.seed = 7;
    const RadiusEstimate a = rwpi_radius(data, rho_bar, opts);
    const RadiusEstimate b = rwpi_radius(data, rho_bar, opts);
    CHECK(a.epsilon == b.epsilon);  // bit-identical
    CHECK(a.eta_quantile == b.eta_quantile);
    CHECK(a.epsilon >= 0.0);
    CHECK(a.k_samples == 12);  // floor(0.2 * 60)

    opts.scaling = RadiusScaling::PaperLiteral;
    const RadiusEstimate c = rwpi_radius(data, rho_bar, opts);
    CHECK(c.epsilon ==
          doctest::Approx(a.epsilon * 60.0).epsilon(1e-12));  // ratio sqrt(N)*sqrt(N)
}

TEST_CASE("degenerate panels give a zero radius with a warning") {
    Matrix r(6, 2);
    for (int i = 0; i < 6; ++i) {
        r(i, 0) = 0.2;
        r(i, 1) = 0.1;
    }
    const ReturnsDataset data(r, {"a", "b"});
    const double rho_bar = choose_target_return(data);
    const RadiusEstimate est = rwpi_radius(data, rho_bar, {});
    CHECK(est.degenerate_covariance);
    CHECK(est.epsilon == 0.0);
}

TEST_CASE("radius is positive with high probability at scale") {
    const auto data = testing::random_panel(50, 3, 59);
    const double rho_bar = choose_target_return(data);
    RwpiOptions opts;
    opts.k = 100000;
    opts.seed = 3;
    const RadiusEstimate est = rwpi_radius(data, rho_bar, opts);
    CHECK(est.epsilon > 0.0);
}

TEST_CASE("default cross-validation grid") {
    const auto grid = default_cv_grid();
    REQUIRE(grid.size() == 8);
    CHECK(grid.front() == doctest::Approx(0.01));
    CHECK(grid.back() == doctest::Approx(0.15));
    for (size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i] - grid[i - 1] == doctest::Approx(0.02));
}

TEST_CASE("cv with a single grid point returns it") {
    const auto data = testing::random_panel(30, 3, 60);
    CHECK(cv_radius(data, {0.07}) == doctest::Approx(0.07));
}

TEST_CASE("cv ties resolve to the smallest epsilon") {
    // Constant panel: every portfolio has zero deviation risk for every
    // epsilon, so all grid points tie.
    Matrix r(20, 2);
    for (int i = 0; i < 20; ++i) {
        r(i, 0) = 0.3;
        r(i, 1) = 0.1;
    }
    const ReturnsDataset data(r, {"a", "b"});
    CHECK(cv_radius(data, {0.01, 0.05, 0.09}) == doctest::Approx(0.01));
}
