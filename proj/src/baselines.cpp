#include "sgcal/baselines.hpp"

#include "sgcal/errors.hpp"

#include <cmath>

namespace sgcal {

std::string_view to_string(BaselineMethod m) noexcept { return m == BaselineMethod::L2 ? "l2" : "ls"; }

namespace {

double zero_simulator(std::span<const double>, std::span<const double>) { return 0.0; }

// Zero-mean GaSP regression of `y` on the design of `prob`.
CalibrationProblem regression_problem(const CalibrationProblem& prob, linalg::Vector y) {
    CalibrationProblem reg{prob.design, std::move(y), zero_simulator, Bounds{}, prob.kernel, ModelKind::GaSP,
                           LambdaZPolicy::fixed(0.0)};
    return reg;
}

linalg::Vector as_vector(const std::vector<double>& v) {
    return Eigen::Map<const linalg::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

BaselineFit fit_l2(const CalibrationProblem& prob, std::size_t resolution, const OptimizerConfig& config) {
    prob.validate();
    CalibrationProblem reg = regression_problem(prob, prob.observations);
    FittedCalibration step1 = fit(reg, config);

    const DesignSet grid = midpoint_grid(prob.p(), resolution);
    const linalg::Vector reality = predict_mean(step1, reg, grid);
    const Objective objective = [&](std::span<const double> theta) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = reality[static_cast<Eigen::Index>(i)] - prob.simulator(grid.point(i), theta);
            s += d * d;
        }
        return s / static_cast<double>(grid.size());
    };
    const MinimizeResult r = multistart_minimize(objective, prob.theta_bounds, config);
    return BaselineFit{BaselineMethod::L2, as_vector(r.argmin), std::move(reg), std::move(step1), r.value};
}

BaselineFit fit_ls(const CalibrationProblem& prob, const OptimizerConfig& config) {
    prob.validate();
    const Objective objective = [&](std::span<const double> theta) {
        return prob.residual(theta).squaredNorm() / static_cast<double>(prob.n());
    };
    const MinimizeResult r = multistart_minimize(objective, prob.theta_bounds, config);
    CalibrationProblem reg = regression_problem(prob, prob.residual(r.argmin));
    FittedCalibration step2 = fit(reg, config);
    return BaselineFit{BaselineMethod::LS, as_vector(r.argmin), std::move(reg), std::move(step2), r.value};
}

linalg::Vector baseline_predict_mean(const BaselineFit& fit, const CalibrationProblem& prob, const DesignSet& xstar) {
    linalg::Vector mean = predict_mean(fit.auxiliary, fit.auxiliary_problem, xstar);
    if (fit.method == BaselineMethod::LS) {
        const std::span<const double> theta(fit.theta.data(), static_cast<std::size_t>(fit.theta.size()));
        mean += simulate_at(prob.simulator, xstar, theta);
    }
    return mean;
}

}  // namespace sgcal
