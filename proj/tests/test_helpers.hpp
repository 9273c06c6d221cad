#pragma once

#include "drmlsad/data.hpp"
#include "drmlsad/types.hpp"

#include <random>

namespace drmlsad::testing {

// The 2x2 instance solvable by hand: returns [[1,0],[0,1]], so
// mu_hat = (0.5, 0.5) and A = [[-0.5, 0.5], [0.5, -0.5]]. With eps = 0.1,
// rho = 0.3 the optimal objective is 0.1, attained for x1 in [0.4, 0.6];
// (x, y, u) = ((0.5, 0.5), (-0.1, -0.1), 0) satisfies the optimality system.
inline ReturnsDataset hand_instance_data() {
    Matrix r(2, 2);
    r << 1.0, 0.0, 0.0, 1.0;
    return ReturnsDataset(r, {"a", "b"});
}

inline DrMlsadProblem hand_instance() {
    return DrMlsadProblem(build_scenario_model(hand_instance_data()), 0.1, 0.3);
}

inline ReturnsDataset random_panel(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_samples = n;
    spec.n_assets = m;
    spec.seed = seed;
    return gen_synthetic(spec);
}

// Plain uniform helper for property tests.
struct Uniform {
    std::mt19937_64 engine;
    explicit Uniform(std::uint64_t seed) : engine(seed) {}
    double operator()(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(engine() >> 11) * 0x1.0p-53);
    }
    Vector vector(Eigen::Index n, double lo, double hi) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = (*this)(lo, hi);
        return v;
    }
};

}  // namespace drmlsad::testing
