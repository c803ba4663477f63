#pragma once

#include "sgcal/estimation.hpp"
#include "sgcal/models.hpp"

#include <cstddef>
#include <string_view>

namespace sgcal {

enum class BaselineMethod { L2, LS };

[[nodiscard]] std::string_view to_string(BaselineMethod m) noexcept;

/// Result of a two-step calibration. `auxiliary` is a GaSP regression with a
/// zero mean: for L2 it models the reality itself, for LS the residuals
/// y - f^M(., theta).
struct BaselineFit {
    BaselineMethod method = BaselineMethod::L2;
    linalg::Vector theta;
    CalibrationProblem auxiliary_problem;
    FittedCalibration auxiliary;
    /// Value of the step-2 objective (L2: grid mean square, LS: mean square residual).
    double objective = 0.0;
};

/// Two-step L2 calibration. Step 1 fits a zero-mean GaSP regression to the
/// field data; step 2 minimizes the midpoint-grid mean of
/// (step-1 mean - f^M(., theta))^2 with `resolution` points per axis.
[[nodiscard]] BaselineFit fit_l2(const CalibrationProblem& prob, std::size_t resolution, const OptimizerConfig& config);

/// Least-squares calibration followed by a zero-mean GaSP on the residuals.
[[nodiscard]] BaselineFit fit_ls(const CalibrationProblem& prob, const OptimizerConfig& config);

/// Reality prediction. L2 ignores the simulator and returns the step-1 mean;
/// LS returns f^M(x, theta) plus the residual mean.
[[nodiscard]] linalg::Vector baseline_predict_mean(const BaselineFit& fit, const CalibrationProblem& prob,
                                                   const DesignSet& xstar);

}  // namespace sgcal
