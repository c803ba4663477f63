#pragma once

#include "sgcal/design.hpp"
#include "sgcal/linalg.hpp"
#include "sgcal/models.hpp"

#include <functional>
#include <span>
#include <vector>

namespace sgcal {

/// sqrt(mean((a - b)^2))
[[nodiscard]] double rmse(const linalg::Vector& a, const linalg::Vector& b);

/// Mean over replicates of the per-replicate RMSE between predictions and
/// the reality. `truth` holds one vector per replicate, or a single vector
/// shared by all replicates.
[[nodiscard]] double avg_rmse_pred(const std::vector<linalg::Vector>& predictions,
                                   const std::vector<linalg::Vector>& truth);

/// Mean over replicates of the RMSE between f^M(., theta_i) and y^R on `test`.
[[nodiscard]] double avg_rmse_model(const std::vector<linalg::Vector>& theta,
                                    const std::function<double(std::span<const double>)>& reality,
                                    const Simulator& simulator, const DesignSet& test);

/// sqrt(mean_i ||theta_i - theta_L2||^2)
[[nodiscard]] double rmse_theta(const std::vector<linalg::Vector>& theta, const linalg::Vector& theta_l2);

/// Standard error of the mean of `values` (0 for fewer than two values).
[[nodiscard]] double standard_error(const std::vector<double>& values);

/// Least-squares slope of log(values) against log(sizes).
[[nodiscard]] double loglog_slope(const std::vector<double>& sizes, const std::vector<double>& values);

}  // namespace sgcal
