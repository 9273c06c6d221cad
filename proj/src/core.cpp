#include "drmlsad/types.hpp"
#include "drmlsad/prox.hpp"

#include <cmath>
#include <sstream>

namespace drmlsad {

ReturnsDataset::ReturnsDataset(Matrix returns, std::vector<std::string> asset_names,
                               std::vector<std::string> period_labels, ReturnUnit unit)
    : returns_(std::move(returns)),
      asset_names_(std::move(asset_names)),
      period_labels_(std::move(period_labels)),
      unit_(unit) {
    if (returns_.rows() < 2) throw SolverError("dataset needs at least 2 periods");
    if (returns_.cols() < 1) throw SolverError("dataset needs at least 1 asset");
    if (!returns_.allFinite()) throw SolverError("dataset contains non-finite entries");
    if (asset_names_.size() != static_cast<size_t>(returns_.cols()))
        throw SolverError("asset name count does not match column count");
    if (!period_labels_.empty() &&
        period_labels_.size() != static_cast<size_t>(returns_.rows()))
        throw SolverError("period label count does not match row count");
}

ReturnsDataset ReturnsDataset::window(Eigen::Index first, Eigen::Index count) const {
    if (first < 0 || count < 2 || first + count > periods())
        throw SolverError("window out of range");
    std::vector<std::string> labels;
    if (!period_labels_.empty())
        labels.assign(period_labels_.begin() + first, period_labels_.begin() + first + count);
    return ReturnsDataset(returns_.middleRows(first, count), asset_names_, std::move(labels),
                          unit_);
}

ScenarioModel build_scenario_model(const ReturnsDataset& data) {
    ScenarioModel model;
    model.mu_hat = data.returns().colwise().mean();
    model.A = (-data.returns()).rowwise() + model.mu_hat.transpose();
    return model;
}

bool check_feasible(const Vector& mu_hat, double b) { return mu_hat.maxCoeff() >= b; }

bool check_feasible(const DrMlsadProblem& prob) {
    return check_feasible(prob.scenario().mu_hat, prob.b());
}

DrMlsadProblem::DrMlsadProblem(ScenarioModel scenario, double epsilon, double rho)
    : scenario_(std::move(scenario)), epsilon_(epsilon), rho_(rho), b_(rho + epsilon) {
    if (!(epsilon_ >= 0.0)) throw SolverError("epsilon must be nonnegative");
    if (!check_feasible(scenario_.mu_hat, b_)) {
        std::ostringstream msg;
        msg << "infeasible problem: max mean return " << scenario_.mu_hat.maxCoeff()
            << " < rho + epsilon = " << b_;
        throw InfeasibleError(msg.str());
    }
}

DrMlsadProblem DrMlsadProblem::without_return_floor(ScenarioModel scenario, double epsilon) {
    if (!(epsilon >= 0.0)) throw SolverError("epsilon must be nonnegative");
    DrMlsadProblem prob;
    prob.scenario_ = std::move(scenario);
    prob.epsilon_ = epsilon;
    prob.rho_ = -std::numeric_limits<double>::infinity();
    prob.b_ = -std::numeric_limits<double>::infinity();
    return prob;
}

double objective_value(const Vector& x, const DrMlsadProblem& prob) {
    const Vector dev = prob.scenario().A * x;
    const double n = static_cast<double>(prob.samples());
    const double eps = prob.epsilon();
    double abs_sum = 0.0, lin_sum = 0.0;
    for (Eigen::Index i = 0; i < dev.size(); ++i) {
        abs_sum += std::abs(dev[i] - eps);
        lin_sum += dev[i] - eps;
    }
    return (abs_sum + lin_sum) / (2.0 * n) + eps;
}

double kkt_residual(const PrimalDualIterate& it, const DrMlsadProblem& prob) {
    const Matrix& A = prob.scenario().A;
    const double n = static_cast<double>(prob.samples());
    const double eps = prob.epsilon();
    const HalfspaceSimplex set = feasible_set(prob);

    const Vector Ax = A * it.x;
    const double res1x =
        (it.x - project_C(it.x + A.transpose() * it.u, set)).norm() /
        (1.0 + it.x.norm() + it.u.norm());
    const Vector prox_arg = it.y.array() - 1.0 / (2.0 * n) - it.u.array();
    const double res1y =
        (it.y - soft_threshold(prox_arg, 1.0 / (2.0 * n))).norm() /
        (1.0 + it.y.norm() + it.u.norm());
    const double res2 =
        (it.y - Ax + Vector::Constant(it.y.size(), eps)).norm() /
        (1.0 + it.y.norm() + Ax.norm());

    return std::max({res1x, res1y, res2});
}

}  // namespace drmlsad
