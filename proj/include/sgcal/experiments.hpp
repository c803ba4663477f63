#pragma once

#include "sgcal/estimation.hpp"
#include "sgcal/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgcal {

/// Worker threads for replicate loops: SGCAL_THREADS if set and positive,
/// otherwise the hardware concurrency (at least 1).
[[nodiscard]] std::size_t default_thread_count();

/// Calls body(i) for i in [0, count) on up to `threads` threads. Results must
/// be written to per-index slots, which keeps the output independent of the
/// thread count. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// One method at one sample size, with per-replicate values kept.
struct MethodResult {
    std::string method;
    std::size_t n = 0;
    std::vector<linalg::Vector> theta;
    std::vector<double> rmse_pred;   // per replicate RMSE of the reality prediction
    std::vector<double> rmse_model;  // per replicate RMSE of f^M(., theta_hat)
    double avg_rmse_pred = 0.0;
    double avg_rmse_model = 0.0;
    double se_pred = 0.0;
    double se_model = 0.0;
    double rmse_theta = 0.0;
    double seconds = 0.0;
};

struct ExperimentResult {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t replicates = 0;
    std::size_t test_points = 0;
    linalg::Vector theta_l2;
    /// RMSE of f^M(., theta_L2) against the reality, the attainable AvgRMSE_{f^M}.
    double l2_floor = 0.0;
    std::vector<MethodResult> methods;
    /// Log-log slope of AvgRMSE_{f^M+delta} against n per method (Example 1 only).
    std::vector<std::pair<std::string, double>> slopes;

    [[nodiscard]] const MethodResult& find(const std::string& method, std::size_t n = 0) const;
};

struct Example1Config {
    enum class Mode { Fixed, Mle };
    std::vector<std::size_t> sizes{150, 400, 1100, 3000};
    std::size_t replicates = 20;
    Mode mode = Mode::Fixed;
    std::size_t test_points = 3000;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0: default_thread_count()
    OptimizerConfig optimizer;

    /// 50 sizes log-spaced over [e^5, e^10], N = 100, n* = 30000.
    [[nodiscard]] static Example1Config full();
};

struct Example2Config {
    std::string case_name = "case-i";
    std::size_t n = 0;  // 0: 10 (p + 1)
    std::size_t replicates = 50;
    std::size_t test_points = 2000;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    /// Midpoint grid per axis for the theta_L2 oracle; 0 picks by dimension.
    std::size_t l2_resolution = 0;
    OptimizerConfig optimizer;

    [[nodiscard]] static Example2Config full(std::string case_name, std::size_t n);
};

struct Example3Config {
    std::size_t n = 30;
    std::size_t replicates = 50;
    std::size_t test_points = 2000;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    /// Grid per axis for the oracle and the L2 baseline's step 2.
    std::size_t l2_resolution = 64;
    bool baselines = true;
    OptimizerConfig optimizer;

    [[nodiscard]] static Example3Config full(std::size_t n);
};

/// Grid resolution used for theta_L2 when a config leaves it at 0.
[[nodiscard]] std::size_t default_l2_resolution(std::size_t dims);

/// GaSP and S-GaSP (lambda_z = lambda^{-1/2}) on the Example 1 series with an
/// equispaced design. Fixed mode pins gamma = 1 and lambda = n^{-6/7} 1e-4.
[[nodiscard]] ExperimentResult run_example1(const Example1Config& config);

/// GaSP, S-GaSP 1 (lambda_z = lambda^{-1/2}) and S-GaSP 2 (lambda_z = 100 n^{1/2})
/// on a maximin LHS design, tested on uniform points.
[[nodiscard]] ExperimentResult run_example2(const Example2Config& config);

/// As run_example2 plus the L2 and LS baselines.
[[nodiscard]] ExperimentResult run_example3(const Example3Config& config);

/// Full result, per-replicate values included, with round-trip floats.
[[nodiscard]] std::string to_json(const ExperimentResult& result, bool include_timing = true);

/// Long format: experiment,method,n,replicate,metric,value. Replicate-level
/// rows carry the replicate index; summary rows use "all".
void write_long_csv(const ExperimentResult& result, std::ostream& out, bool header = true);

/// Fixed-width table with one row per (method, n).
[[nodiscard]] std::string summary_table(const ExperimentResult& result);

}  // namespace sgcal
