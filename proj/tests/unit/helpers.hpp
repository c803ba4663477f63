#pragma once

#include "sgcal/design.hpp"
#include "sgcal/kernel.hpp"
#include "sgcal/linalg.hpp"
#include "sgcal/models.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

using sgcal::linalg::Matrix;
using sgcal::linalg::Vector;

inline std::mt19937_64& rng() {
    static std::mt19937_64 engine(20240611);
    return engine;
}

inline double unif(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline std::size_t pick(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng());
}

inline Vector random_vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = unif(lo, hi);
    return v;
}

/// Random orthogonal Q times log-uniform eigenvalues in [1 / cond, 1] times Q^T.
inline Matrix random_spd(std::size_t n, double cond = 1e6) {
    Matrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = std::normal_distribution<double>()(rng());
    const Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector eig(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < eig.size(); ++i) eig[i] = std::pow(cond, -unif());
    Matrix a = q * eig.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

inline sgcal::DesignSet random_design(std::size_t n, std::size_t p) {
    sgcal::PointMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unif();
    return sgcal::DesignSet(std::move(x), sgcal::Provenance::Uniform);
}

inline sgcal::DesignSet design_1d(const std::vector<double>& xs) {
    sgcal::PointMatrix x(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i];
    return sgcal::DesignSet(std::move(x), sgcal::Provenance::File);
}

inline sgcal::KernelSpec random_kernel(std::size_t p, double nugget = sgcal::kDefaultNugget) {
    std::vector<double> range(p);
    for (double& g : range) g = std::exp(unif(std::log(0.05), std::log(1.0)));
    return sgcal::KernelSpec::matern52(range, nugget);
}

inline double linear_sim(std::span<const double> x, std::span<const double> t) {
    double v = t[0];
    for (std::size_t i = 1; i < t.size(); ++i) v += t[i] * x[(i - 1) % x.size()];
    return v;
}

/// Random calibration problem with a linear simulator theta_0 + sum theta_i x_i.
inline sgcal::CalibrationProblem random_problem(std::size_t n, std::size_t p, std::size_t q,
                                                sgcal::ModelKind kind = sgcal::ModelKind::SGaSP,
                                                double nugget = sgcal::kDefaultNugget) {
    sgcal::DesignSet x = random_design(n, p);
    Vector y = random_vector(n, -2.0, 2.0);
    sgcal::Bounds b{std::vector<double>(q, -5.0), std::vector<double>(q, 5.0)};
    return sgcal::CalibrationProblem{std::move(x), std::move(y), linear_sim, b, random_kernel(p, nugget), kind,
                                     sgcal::LambdaZPolicy::inverse_sqrt_lambda()};
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace testing
