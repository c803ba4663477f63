#include "doctest.h"
#include "helpers.hpp"

#include "sgcal/baselines.hpp"
#include "sgcal/design.hpp"
#include "sgcal/estimation.hpp"

#include <cmath>
#include <random>

using namespace sgcal;
using namespace testing;

namespace {

double constant_sim(std::span<const double>, std::span<const double> t) { return t[0]; }

CalibrationProblem regression(const DesignSet& x, const Vector& y, Simulator sim, Bounds b) {
    return CalibrationProblem{x, y, std::move(sim), std::move(b), KernelSpec::matern52(std::vector<double>(x.dims(), 0.3)),
                              ModelKind::GaSP, LambdaZPolicy::fixed(0.0)};
}

}  // namespace

TEST_CASE("L2 calibration recovers an in-family reality from noiseless data") {
    const DesignSet x = maximin_lhs(60, 1, 4);
    const std::vector<double> truth{0.4, 1.3};
    Vector y(60);
    for (std::size_t i = 0; i < 60; ++i) y[static_cast<Eigen::Index>(i)] = linear_sim(x.point(i), truth);
    const CalibrationProblem prob = regression(x, y, linear_sim, Bounds{{-5.0, -5.0}, {5.0, 5.0}});
    const BaselineFit f = fit_l2(prob, 64, OptimizerConfig{});
    CHECK(f.method == BaselineMethod::L2);
    CHECK(std::abs(f.theta[0] - truth[0]) <= 0.05);
    CHECK(std::abs(f.theta[1] - truth[1]) <= 0.05);
}

TEST_CASE("L2 calibration of a constant reality returns the constant") {
    const DesignSet x = maximin_lhs(60, 1, 5);
    std::mt19937_64 engine(6);
    std::normal_distribution<double> noise(0.0, 0.05);
    Vector y(60);
    for (Eigen::Index i = 0; i < 60; ++i) y[i] = 0.7 + noise(engine);
    const BaselineFit f = fit_l2(regression(x, y, constant_sim, Bounds{{-5.0}, {5.0}}), 64, OptimizerConfig{});
    CHECK(std::abs(f.theta[0] - 0.7) <= 0.02);
}

TEST_CASE("LS calibration on exact simulator data returns the generating theta") {
    const DesignSet x = maximin_lhs(25, 2, 8);
    const std::vector<double> truth{-0.6, 2.1};
    Vector y(25);
    for (std::size_t i = 0; i < 25; ++i) y[static_cast<Eigen::Index>(i)] = linear_sim(x.point(i), truth);
    const CalibrationProblem prob = regression(x, y, linear_sim, Bounds{{-5.0, -5.0}, {5.0, 5.0}});
    const BaselineFit f = fit_ls(prob, OptimizerConfig{});
    CHECK(f.method == BaselineMethod::LS);
    CHECK(std::abs(f.theta[0] - truth[0]) <= 1e-6);
    CHECK(std::abs(f.theta[1] - truth[1]) <= 1e-6);
    CHECK(f.auxiliary_problem.observations.cwiseAbs().maxCoeff() <= 1e-6);
    const Vector pred = baseline_predict_mean(f, prob, x);
    CHECK((pred - y).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("property: LS with a linear simulator matches ordinary least squares") {
    int failures = 0;
    OptimizerConfig config;
    config.starts = 2;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = pick(4, 12);
        const DesignSet x = random_design(n, 1);
        Vector y(static_cast<Eigen::Index>(n));
        Matrix a(static_cast<Eigen::Index>(n), 2);
        const double t0 = unif(-2.0, 2.0);
        const double t1 = unif(-2.0, 2.0);
        std::normal_distribution<double> noise(0.0, 0.1);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            a(ii, 0) = 1.0;
            a(ii, 1) = x.point(i)[0];
            y[ii] = t0 + t1 * a(ii, 1) + noise(rng());
        }
        const Vector ols = a.colPivHouseholderQr().solve(y);
        if (ols.cwiseAbs().maxCoeff() > 9.0) continue;  // keep the solution inside the search box
        config.seed = static_cast<std::uint64_t>(trial);
        const BaselineFit f = fit_ls(regression(x, y, linear_sim, Bounds{{-10.0, -10.0}, {10.0, 10.0}}), config);
        if ((f.theta - ols).cwiseAbs().maxCoeff() > 1e-6) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("property: the L2 estimate is no worse than the reality's L2 minimizer on its own surrogate") {
    int failures = 0;
    OptimizerConfig config;
    config.starts = 3;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = pick(5, 12);
        const DesignSet x = random_design(n, 1);
        const double freq = unif(1.0, 6.0);
        const auto reality = [freq](std::span<const double> z) { return std::sin(freq * z[0]) + z[0]; };
        Vector y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = reality(x.point(i)) + 0.05 * unif(-1, 1);
        const Bounds box{{-10.0, -10.0}, {10.0, 10.0}};
        config.seed = static_cast<std::uint64_t>(trial);
        const CalibrationProblem prob = regression(x, y, linear_sim, box);
        const BaselineFit f = fit_l2(prob, 64, config);
        const L2Result oracle = l2_minimizer(L2Oracle{reality, linear_sim, box, 1, 64, config});

        const DesignSet grid = midpoint_grid(1, 64);
        const Vector step1 = baseline_predict_mean(f, prob, grid);
        const Vector at_oracle = simulate_at(linear_sim, grid, oracle.theta);
        const double surrogate_at_oracle = (step1 - at_oracle).squaredNorm() / static_cast<double>(grid.size());
        if (f.objective > surrogate_at_oracle + 1e-12) ++failures;
    }
    CHECK(failures == 0);
}
