#pragma once

#include "drmlsad/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace drmlsad {

// Standard-normal sampler built from mt19937_64 with an explicit 53-bit
// uniform and Box-Muller, so seeded streams are bit-identical across
// platforms (std::normal_distribution is implementation-defined).
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // in [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

enum class ScaleInterpretation { StdDev, Variance };

// Factor-model panel: per period a common factor phi plus an idiosyncratic
// term per asset whose mean and scale grow linearly in the asset index.
struct SyntheticSpec {
    Eigen::Index n_samples = 0;
    Eigen::Index n_assets = 0;
    double phi_mean = 0.0;
    double phi_scale = 0.02;
    double zeta_mean_slope = 0.03;   // asset i (1-based) has mean i * slope
    double zeta_scale_slope = 0.025; // and scale i * slope
    ScaleInterpretation scale_interpretation = ScaleInterpretation::StdDev;
    std::uint64_t seed = 0;
};

ReturnsDataset gen_synthetic(const SyntheticSpec& spec);

struct CsvOptions {
    ReturnUnit unit = ReturnUnit::Percent;
    bool drop_assets_with_missing = false;  // otherwise missing sentinels are an error
};

// Sentinel cell values marking missing observations.
bool is_missing_sentinel(double v);

ReturnsDataset load_returns_csv(const std::string& path, const CsvOptions& options = {});
void save_returns_csv(const ReturnsDataset& data, const std::string& path);

// Benchmark target return 0.2/N * sum_i mu_hat_i, exposed separately so the
// formula is testable without constructing a (possibly infeasible) problem.
double bench_target_return(const ReturnsDataset& data);

// Benchmark instance with epsilon = 0.15 and rho = bench_target_return;
// throws InfeasibleError when max_i mu_hat_i < rho + epsilon.
DrMlsadProblem bench_defaults(const ReturnsDataset& data);

}  // namespace drmlsad
