#pragma once

#include "sgcal/models.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgcal {

struct OptimizerConfig {
    std::size_t starts = 10;
    std::size_t max_iterations = 200;
    /// Central-difference step is gradient_step * (1 + |x_i|).
    double gradient_step = 1e-5;
    double objective_tolerance = 1e-10;
    double parameter_tolerance = 1e-8;
    /// Number of stored (s, y) pairs in the quasi-Newton update.
    std::size_t memory = 7;
    std::uint64_t seed = 0;

    /// Throws DomainError unless starts >= 1, gradient_step > 0, tolerances > 0.
    void validate() const;
};

/// Objective over a box; returns +infinity where it cannot be evaluated.
using Objective = std::function<double(std::span<const double>)>;

struct StartTrace {
    std::size_t index = 0;
    std::vector<double> initial;
    double initial_value = 0.0;
    std::vector<double> argmin;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool used_simplex = false;
    bool failed = false;
    std::string message;
    /// Objective after each accepted step, starting at initial_value.
    std::vector<double> accepted;
};

struct MinimizeResult {
    std::vector<double> argmin;
    double value = 0.0;
    std::size_t best_start = 0;
    std::vector<StartTrace> trace;
};

/// Best of config.starts bounded quasi-Newton runs. The first start is the box
/// center, the rest a seeded Latin hypercube over the box. Gradients are
/// central differences (one-sided at the bounds). A start whose line search
/// stalls finishes with a bounded Nelder-Mead simplex. Ties go to the lowest
/// start index. Throws OptimizationFailed when no start reaches a finite value.
[[nodiscard]] MinimizeResult multistart_minimize(const Objective& objective, const Bounds& box,
                                                 const OptimizerConfig& config);

/// Single bounded quasi-Newton run from `x0`, exposed for testing.
[[nodiscard]] StartTrace minimize_from(const Objective& objective, const Bounds& box, std::vector<double> x0,
                                       const OptimizerConfig& config);

/// Search box for log range: [log(0.01 w), log(100 w)] with w the domain width (1).
inline constexpr double kLogRangeLower = -4.605170185988091;  // log 0.01
inline constexpr double kLogRangeUpper = 4.605170185988091;   // log 100
/// Search box for log lambda: [log 1e-12, log 1e2].
inline constexpr double kLogLambdaLower = -27.631021115928547;
inline constexpr double kLogLambdaUpper = 4.605170185988092;

/// Which parameters `fit` holds fixed.
struct FitOptions {
    /// Use these ranges instead of estimating them.
    std::optional<std::vector<double>> fixed_range;
    /// Use this lambda instead of estimating it.
    std::optional<double> fixed_lambda;
};

/// Maximizes the profile likelihood jointly over (theta, log gamma, log lambda),
/// minus whatever `options` fixes, applying the problem's lambda_z policy.
[[nodiscard]] FittedCalibration fit(const CalibrationProblem& prob, const OptimizerConfig& config,
                                    const FitOptions& options = {});

/// Estimates theta alone with a prebuilt covariance whose ranges are those of
/// `kernel`. Replicates sharing a design and fixed (gamma, lambda, lambda_z)
/// can then share one factorization.
[[nodiscard]] FittedCalibration fit_theta(const CalibrationProblem& prob,
                                          std::shared_ptr<const EffectiveCovariance> covariance,
                                          const KernelSpec& kernel, const OptimizerConfig& config);

/// Independent oracle for theta_L2 = argmin integral (y^R - f^M(., theta))^2.
struct L2Oracle {
    std::function<double(std::span<const double>)> truth;
    Simulator simulator;
    Bounds theta_bounds;
    std::size_t dims = 1;
    /// Midpoint-rule points per dimension; >= 64 for p <= 2 and >= 16 otherwise.
    std::size_t resolution = 128;
    OptimizerConfig optimizer;

    void validate() const;
};

struct L2Result {
    std::vector<double> theta;
    /// sqrt of the grid-mean squared distance at theta, the attainable
    /// AvgRMSE_{f^M} floor.
    double rmse = 0.0;
};

/// Minimizes the tensor-grid midpoint approximation of the L2 distance.
[[nodiscard]] L2Result l2_minimizer(const L2Oracle& oracle);

/// Midpoints (k + 1/2) / resolution of a tensor grid over [0, 1]^p.
[[nodiscard]] DesignSet midpoint_grid(std::size_t dims, std::size_t resolution);

}  // namespace sgcal
