#include "sgcal/metrics.hpp"

#include "sgcal/errors.hpp"

#include <cmath>
#include <numeric>

namespace sgcal {

double rmse(const linalg::Vector& a, const linalg::Vector& b) {
    if (a.size() != b.size() || a.size() == 0) throw DomainError("rmse: vectors must be non-empty and equal length");
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double avg_rmse_pred(const std::vector<linalg::Vector>& predictions, const std::vector<linalg::Vector>& truth) {
    if (predictions.empty()) throw DomainError("avg_rmse_pred: no replicates");
    if (truth.size() != 1 && truth.size() != predictions.size()) {
        throw DomainError("avg_rmse_pred: need one truth vector or one per replicate");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        s += rmse(predictions[i], truth.size() == 1 ? truth[0] : truth[i]);
    }
    return s / static_cast<double>(predictions.size());
}

double avg_rmse_model(const std::vector<linalg::Vector>& theta,
                      const std::function<double(std::span<const double>)>& reality, const Simulator& simulator,
                      const DesignSet& test) {
    if (theta.empty()) throw DomainError("avg_rmse_model: no replicates");
    linalg::Vector y(static_cast<Eigen::Index>(test.size()));
    for (std::size_t j = 0; j < test.size(); ++j) y[static_cast<Eigen::Index>(j)] = reality(test.point(j));
    double s = 0.0;
    for (const linalg::Vector& t : theta) {
        s += rmse(simulate_at(simulator, test, std::span<const double>(t.data(), static_cast<std::size_t>(t.size()))), y);
    }
    return s / static_cast<double>(theta.size());
}

double rmse_theta(const std::vector<linalg::Vector>& theta, const linalg::Vector& theta_l2) {
    if (theta.empty()) throw DomainError("rmse_theta: no replicates");
    double s = 0.0;
    for (const linalg::Vector& t : theta) {
        if (t.size() != theta_l2.size()) throw DomainError("rmse_theta: parameter length mismatch");
        s += (t - theta_l2).squaredNorm();
    }
    return std::sqrt(s / static_cast<double>(theta.size()));
}

double standard_error(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0) / n);
}

double loglog_slope(const std::vector<double>& sizes, const std::vector<double>& values) {
    if (sizes.size() != values.size() || sizes.size() < 2) throw DomainError("loglog_slope: need two or more pairs");
    const double m = static_cast<double>(sizes.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(sizes[i] > 0.0) || !(values[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
        const double x = std::log(sizes[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    if (!(denom > 0.0)) throw DomainError("loglog_slope: sizes must not all be equal");
    return (m * sxy - sx * sy) / denom;
}

}  // namespace sgcal
