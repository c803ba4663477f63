#pragma once

#include "sgcal/design.hpp"
#include "sgcal/kernel.hpp"
#include "sgcal/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sgcal {

enum class ModelKind { GaSP, SGaSP };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
/// "gasp" or "sgasp" (case-insensitive). Throws DomainError.
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);

/// How the S-GaSP scaling parameter lambda_z is set.
struct LambdaZPolicy {
    enum class Rule {
        Fixed,              // lambda_z = constant
        InverseSqrtLambda,  // lambda_z = constant * lambda^{-1/2}, re-evaluated whenever lambda changes
        ScaledSqrtN,        // lambda_z = constant * n^{1/2}
    };

    Rule rule = Rule::InverseSqrtLambda;
    double constant = 1.0;

    [[nodiscard]] double resolve(double lambda, std::size_t n) const;

    [[nodiscard]] static LambdaZPolicy fixed(double value) { return {Rule::Fixed, value}; }
    [[nodiscard]] static LambdaZPolicy inverse_sqrt_lambda() { return {Rule::InverseSqrtLambda, 1.0}; }
    [[nodiscard]] static LambdaZPolicy scaled_sqrt_n(double c) { return {Rule::ScaledSqrtN, c}; }
};

/// Computer model f^M(x, theta). Must be safe to call concurrently from
/// several threads; fits and benchmark replicates may run in parallel.
using Simulator = std::function<double(std::span<const double> x, std::span<const double> theta)>;

/// Axis-aligned box lower <= v <= upper.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::size_t size() const noexcept { return lower.size(); }
    /// Throws DomainError unless sizes agree and lower < upper, all finite.
    void validate() const;
    [[nodiscard]] bool contains(std::span<const double> v) const;
    [[nodiscard]] std::vector<double> center() const;
};

/// Field data, computer model, and model choice for one calibration.
struct CalibrationProblem {
    DesignSet design;
    linalg::Vector observations;
    Simulator simulator;
    Bounds theta_bounds;
    /// Smoothness and nugget are used as given; ranges are starting/fixed values.
    KernelSpec kernel;
    ModelKind kind = ModelKind::SGaSP;
    /// Ignored for GaSP.
    LambdaZPolicy lambda_z = LambdaZPolicy::inverse_sqrt_lambda();

    void validate() const;
    [[nodiscard]] std::size_t n() const noexcept { return design.size(); }
    [[nodiscard]] std::size_t p() const noexcept { return design.dims(); }
    [[nodiscard]] std::size_t q() const noexcept { return theta_bounds.size(); }
    /// lambda_z implied by the policy at this lambda; 0 for GaSP.
    [[nodiscard]] double lambda_z_for(double lambda) const;
    /// f^M(x_i, theta) at every design point.
    [[nodiscard]] linalg::Vector simulate(std::span<const double> theta) const;
    /// y^F - f^M(., theta) at the design.
    [[nodiscard]] linalg::Vector residual(std::span<const double> theta) const;
};

/// f^M(x*_i, theta) for each row of `xstar`.
[[nodiscard]] linalg::Vector simulate_at(const Simulator& f, const DesignSet& xstar, std::span<const double> theta);

/// Factorized field-data covariance (up to sigma0^2 / (n lambda)) for fixed
/// R, lambda >= 0 and lambda_z >= 0. With lambda' = lambda / (1 + lambda lambda_z)
/// and a = lambda_z / n the S-GaSP matrix factors as
///   R~_zd = (R^{-1} + a I)^{-1} + n lambda I = (1 + lambda lambda_z)(R + n lambda' I)(I + a R)^{-1},
/// where the factors commute. lambda_z = 0 is the GaSP matrix R + n lambda I.
class EffectiveCovariance {
public:
    /// Throws NotPositiveDefinite if R + n lambda' I cannot be factorized.
    EffectiveCovariance(linalg::Matrix r, double lambda, double lambda_z);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(r_.rows()); }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double lambda_z() const noexcept { return lambda_z_; }
    /// lambda / (1 + lambda lambda_z)
    [[nodiscard]] double effective_lambda() const noexcept { return lambda_eff_; }
    /// 1 / (1 + lambda lambda_z), the factor shrinking the mean toward f^M.
    [[nodiscard]] double shrinkage() const noexcept { return shrink_; }

    [[nodiscard]] const linalg::Matrix& correlation() const noexcept { return r_; }
    /// Cholesky factor of R + n lambda' I.
    [[nodiscard]] const linalg::CholFactor& factor() const noexcept { return m_; }

    /// log|R~_zd|
    [[nodiscard]] double logdet() const;
    /// e^T R~_zd^{-1} e
    [[nodiscard]] double quadratic(const linalg::Vector& e) const;
    /// (R + n lambda' I)^{-1} e
    [[nodiscard]] linalg::Vector krr_weights(const linalg::Vector& e) const;
    /// K*(x, x) - K(x, x) for each column r of `cross_t` (n x m): the posterior
    /// correlation reduction, always <= 0 up to rounding.
    [[nodiscard]] linalg::Vector variance_reduction(const linalg::Matrix& cross_t) const;

private:
    linalg::Matrix r_;
    double lambda_;
    double lambda_z_;
    double lambda_eff_;
    double shrink_;
    linalg::CholFactor m_;                     // R + n lambda' I
    std::optional<linalg::CholFactor> tilt_;   // I + (lambda_z / n) R, lambda_z > 0 only
};

inline constexpr double kMinResidualSquare = 1e-300;

/// Negative log profile likelihood, additive constants dropped:
///   1/2 log|R~_zd| + n/2 log S^2,  S^2 = e^T R~_zd^{-1} e.
struct ProfileValue {
    double objective = 0.0;
    double s2 = 0.0;
    /// S^2 fell below kMinResidualSquare and log S^2 was floored.
    bool degenerate = false;
};

[[nodiscard]] ProfileValue profile_value(const EffectiveCovariance& cov, const linalg::Vector& residual);

/// GaSP objective at (theta, log gamma, log lambda). Throws NotPositiveDefinite
/// when R + n lambda I is not numerically positive definite.
[[nodiscard]] double gasp_neg_profile_loglik(std::span<const double> theta, std::span<const double> log_range,
                                             double log_lambda, const CalibrationProblem& prob);

/// Discretized S-GaSP objective; lambda_z = 0 reproduces the GaSP value exactly.
[[nodiscard]] double sgasp_neg_profile_loglik(std::span<const double> theta, std::span<const double> log_range,
                                              double log_lambda, double lambda_z, const CalibrationProblem& prob);

/// sigma0^2 MLE, lambda * S^2 (S^2 of the S-GaSP matrix; GaSP when lambda_z = 0).
[[nodiscard]] double sigma0_mle(const EffectiveCovariance& cov, const linalg::Vector& residual);

/// (R + n lambda' I)^{-1} (y - f^M_theta), with lambda' = lambda for GaSP and
/// lambda / (1 + lambda lambda_z) for S-GaSP (lambda_z from the problem's policy).
[[nodiscard]] linalg::Vector krr_weights(std::span<const double> theta, std::span<const double> range, double lambda,
                                         const CalibrationProblem& prob);

/// Objective evaluator that caches the factorization for the last
/// (range, lambda, lambda_z), so sweeps over theta alone cost O(n^2).
/// Not thread-safe: give each optimization its own instance.
class ProfileLikelihood {
public:
    explicit ProfileLikelihood(const CalibrationProblem& prob);

    /// lambda_z defaults to the problem's policy at this lambda.
    [[nodiscard]] ProfileValue evaluate(std::span<const double> theta, std::span<const double> range, double lambda,
                                        std::optional<double> lambda_z = std::nullopt) const;

    [[nodiscard]] std::shared_ptr<const EffectiveCovariance> covariance(std::span<const double> range, double lambda,
                                                                        double lambda_z) const;

private:
    const CalibrationProblem* prob_;
    mutable std::vector<double> key_range_;
    mutable double key_lambda_ = -1.0;
    mutable double key_lambda_z_ = -1.0;
    mutable std::shared_ptr<const EffectiveCovariance> cached_;
};

/// Estimated parameters and cached quantities of a calibrated model.
struct FittedCalibration {
    ModelKind kind = ModelKind::SGaSP;
    linalg::Vector theta;
    KernelSpec kernel;  // ranges are the fitted gamma
    double lambda = 0.0;
    double lambda_z = 0.0;
    double sigma0_sq = 0.0;
    std::shared_ptr<const EffectiveCovariance> covariance;
    /// Discrepancy mean is r(x)^T weights (the S-GaSP shrinkage already applied).
    linalg::Vector weights;
    double objective = 0.0;
    bool degenerate = false;

    [[nodiscard]] std::vector<double> range() const { return kernel.range; }
    /// sigma^2 = sigma0^2 / (n lambda)
    [[nodiscard]] double signal_variance() const;
};

/// Builds a FittedCalibration at the given parameters. `lambda_z` overrides
/// the problem's policy when set.
[[nodiscard]] FittedCalibration assemble_fit(const CalibrationProblem& prob, std::span<const double> theta,
                                             std::span<const double> range, double lambda,
                                             std::optional<double> lambda_z = std::nullopt);

enum class PredictionTarget { Reality, Field };

struct PredictiveDistribution {
    linalg::Vector mean;
    linalg::Vector variance;
    PredictionTarget target = PredictionTarget::Reality;
};

/// Discrepancy posterior for explicit parameters. Unlike a fit this allows
/// lambda = 0 (noise-free interpolation) with the signal variance given directly.
class DiscrepancyPosterior {
public:
    DiscrepancyPosterior(DesignSet design, KernelSpec kernel, const linalg::Vector& residual, double lambda,
                         double lambda_z, double signal_variance);
    DiscrepancyPosterior(DesignSet design, const FittedCalibration& fit);

    /// r(x)^T w
    [[nodiscard]] linalg::Vector mean(const DesignSet& xstar) const;
    /// K*(x, x), the posterior correlation, clamped at 0.
    [[nodiscard]] linalg::Vector correlation(const DesignSet& xstar) const;
    /// signal_variance * K*(x, x)
    [[nodiscard]] linalg::Vector variance(const DesignSet& xstar) const;

    [[nodiscard]] const linalg::Vector& weights() const noexcept { return weights_; }
    [[nodiscard]] double signal_variance() const noexcept { return signal_variance_; }

private:
    DesignSet design_;
    KernelSpec kernel_;
    std::shared_ptr<const EffectiveCovariance> cov_;
    linalg::Vector weights_;
    double signal_variance_;
};

/// GaSP prediction of the reality (no noise) or field data (+ sigma0^2).
/// Throws DomainError if `fit` is not a GaSP fit.
[[nodiscard]] PredictiveDistribution gasp_predict(const FittedCalibration& fit, const CalibrationProblem& prob,
                                                  const DesignSet& xstar,
                                                  PredictionTarget target = PredictionTarget::Reality);

/// Discretized S-GaSP prediction with the design points as discretization.
/// The reality variance is the field variance minus sigma0^2.
[[nodiscard]] PredictiveDistribution sgasp_predict(const FittedCalibration& fit, const CalibrationProblem& prob,
                                                   const DesignSet& xstar,
                                                   PredictionTarget target = PredictionTarget::Reality);

/// Dispatches on fit.kind.
[[nodiscard]] PredictiveDistribution predict(const FittedCalibration& fit, const CalibrationProblem& prob,
                                             const DesignSet& xstar,
                                             PredictionTarget target = PredictionTarget::Reality);

/// Mean of the reality only; skips the O(n^2 m) variance work.
[[nodiscard]] linalg::Vector predict_mean(const FittedCalibration& fit, const CalibrationProblem& prob,
                                          const DesignSet& xstar);

/// `draws` x n matrix of draws of delta_zd at X from N(0, sigma^2 R_zd),
/// R_zd = (R^{-1} + (lambda_z / n) I)^{-1}. Throws NotPositiveDefinite if R_zd
/// cannot be factorized.
[[nodiscard]] linalg::Matrix sample_discrepancy(const DesignSet& x, const KernelSpec& spec, double lambda_z,
                                                double sigma_sq, std::uint64_t seed, std::size_t draws);

/// R_zd over the design points (the nugget stays in R).
[[nodiscard]] linalg::Matrix discretized_correlation(const DesignSet& x, const KernelSpec& spec, double lambda_z);

}  // namespace sgcal
