#include "sgcal/models.hpp"

#include "sgcal/errors.hpp"
#include "sgcal/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <string>

namespace sgcal {

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::GaSP ? "gasp" : "sgasp";
}

ModelKind parse_model_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "gasp") return ModelKind::GaSP;
    if (lower == "sgasp" || lower == "s-gasp") return ModelKind::SGaSP;
    throw DomainError("unknown model kind '" + std::string(text) + "' (expected gasp or sgasp)");
}

double LambdaZPolicy::resolve(double lambda, std::size_t n) const {
    switch (rule) {
        case Rule::Fixed: return constant;
        case Rule::InverseSqrtLambda: return constant / std::sqrt(lambda);
        case Rule::ScaledSqrtN: return constant * std::sqrt(static_cast<double>(n));
    }
    return constant;
}

void Bounds::validate() const {
    if (lower.size() != upper.size()) throw DomainError("bounds: lower and upper have different lengths");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
            throw DomainError("bounds: need finite lower < upper for coordinate " + std::to_string(i + 1));
        }
    }
}

bool Bounds::contains(std::span<const double> v) const {
    if (v.size() != lower.size()) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
    }
    return true;
}

std::vector<double> Bounds::center() const {
    std::vector<double> c(lower.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
    return c;
}

void CalibrationProblem::validate() const {
    if (static_cast<std::size_t>(observations.size()) != design.size()) {
        throw DomainError("problem: " + std::to_string(observations.size()) + " observations for " +
                          std::to_string(design.size()) + " design points");
    }
    if (!observations.allFinite()) throw DomainError("problem: observations must be finite");
    if (!simulator) throw DomainError("problem: simulator is not set");
    theta_bounds.validate();
    kernel.validate();
    if (kernel.dims() != design.dims()) throw DomainError("problem: kernel and design dimensions differ");
    if (kind == ModelKind::SGaSP && !(lambda_z.constant >= 0.0)) {
        throw DomainError("problem: lambda_z constant must be non-negative");
    }
}

double CalibrationProblem::lambda_z_for(double lambda) const {
    return kind == ModelKind::GaSP ? 0.0 : lambda_z.resolve(lambda, n());
}

linalg::Vector simulate_at(const Simulator& f, const DesignSet& xstar, std::span<const double> theta) {
    linalg::Vector out(static_cast<Eigen::Index>(xstar.size()));
    for (std::size_t i = 0; i < xstar.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(xstar.point(i), theta);
    return out;
}

linalg::Vector CalibrationProblem::simulate(std::span<const double> theta) const {
    return simulate_at(simulator, design, theta);
}

linalg::Vector CalibrationProblem::residual(std::span<const double> theta) const {
    return observations - simulate(theta);
}

// --- EffectiveCovariance ----------------------------------------------------

namespace {

linalg::Matrix shifted(linalg::Matrix r, double shift) {
    r.diagonal().array() += shift;
    return r;
}

void check_lambdas(double lambda, double lambda_z) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and non-negative");
    if (!(lambda_z >= 0.0) || !std::isfinite(lambda_z)) throw DomainError("lambda_z must be finite and non-negative");
}

double reduced_lambda(double lambda, double lambda_z) {
    check_lambdas(lambda, lambda_z);
    return lambda / (1.0 + lambda * lambda_z);
}

}  // namespace

EffectiveCovariance::EffectiveCovariance(linalg::Matrix r, double lambda, double lambda_z)
    : r_(std::move(r)),
      lambda_(lambda),
      lambda_z_(lambda_z),
      lambda_eff_(reduced_lambda(lambda, lambda_z)),
      shrink_(1.0 / (1.0 + lambda * lambda_z)),
      m_(shifted(r_, static_cast<double>(r_.rows()) * lambda_eff_)) {
    if (lambda_z_ > 0.0) {
        linalg::Matrix b = (lambda_z_ / static_cast<double>(r_.rows())) * r_;
        b.diagonal().array() += 1.0;
        tilt_.emplace(b);
    }
}

double EffectiveCovariance::logdet() const {
    if (!tilt_) return m_.logdet();
    const double n = static_cast<double>(r_.rows());
    return n * std::log1p(lambda_ * lambda_z_) + m_.logdet() - tilt_->logdet();
}

double EffectiveCovariance::quadratic(const linalg::Vector& e) const {
    const linalg::Vector u = m_.solve(e);
    double q = e.dot(u);
    if (tilt_) {
        const double a = lambda_z_ / static_cast<double>(r_.rows());
        q = shrink_ * (q + a * (r_ * e).dot(u));
    }
    return q;
}

linalg::Vector EffectiveCovariance::krr_weights(const linalg::Vector& e) const { return m_.solve(e); }

linalg::Vector EffectiveCovariance::variance_reduction(const linalg::Matrix& cross_t) const {
    // GaSP:   -r^T M^{-1} r
    // S-GaSP: -(lambda_z / n) r^T B^{-1} r - shrink * r^T M^{-1} B^{-1} r,  B = I + (lambda_z / n) R,
    // which is the closed-form K*_zd with (R + (n / lambda_z) I)^{-1} = (lambda_z / n) B^{-1}.
    const linalg::Matrix lr = m_.solve_lower(cross_t);
    if (!tilt_) return -lr.colwise().squaredNorm().transpose();
    const double a = lambda_z_ / static_cast<double>(r_.rows());
    const linalg::Matrix br = tilt_->solve(cross_t);
    const linalg::Matrix lbr = m_.solve_lower(br);
    linalg::Vector out(cross_t.cols());
    for (Eigen::Index j = 0; j < cross_t.cols(); ++j) {
        out[j] = -a * cross_t.col(j).dot(br.col(j)) - shrink_ * lr.col(j).dot(lbr.col(j));
    }
    return out;
}

// --- likelihood ---------------------------------------------------------------

ProfileValue profile_value(const EffectiveCovariance& cov, const linalg::Vector& residual) {
    if (static_cast<std::size_t>(residual.size()) != cov.size()) throw DomainError("profile: residual size mismatch");
    ProfileValue v;
    v.s2 = cov.quadratic(residual);
    double log_s2;
    if (!(v.s2 > kMinResidualSquare)) {
        v.degenerate = true;
        log_s2 = std::log(kMinResidualSquare);
    } else {
        log_s2 = std::log(v.s2);
    }
    v.objective = 0.5 * cov.logdet() + 0.5 * static_cast<double>(cov.size()) * log_s2;
    return v;
}

namespace {

std::vector<double> exp_all(std::span<const double> v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::exp(x); });
    return out;
}

void check_theta(std::span<const double> theta, const CalibrationProblem& prob) {
    if (theta.size() != prob.q()) throw DomainError("theta has wrong length");
}

}  // namespace

double gasp_neg_profile_loglik(std::span<const double> theta, std::span<const double> log_range, double log_lambda,
                               const CalibrationProblem& prob) {
    return sgasp_neg_profile_loglik(theta, log_range, log_lambda, 0.0, prob);
}

double sgasp_neg_profile_loglik(std::span<const double> theta, std::span<const double> log_range, double log_lambda,
                                double lambda_z, const CalibrationProblem& prob) {
    check_theta(theta, prob);
    const KernelSpec spec = prob.kernel.with_range(exp_all(log_range));
    const EffectiveCovariance cov(correlation_matrix(prob.design, spec), std::exp(log_lambda), lambda_z);
    return profile_value(cov, prob.residual(theta)).objective;
}

double sigma0_mle(const EffectiveCovariance& cov, const linalg::Vector& residual) {
    return cov.lambda() * cov.quadratic(residual);
}

linalg::Vector krr_weights(std::span<const double> theta, std::span<const double> range, double lambda,
                           const CalibrationProblem& prob) {
    check_theta(theta, prob);
    const KernelSpec spec = prob.kernel.with_range({range.begin(), range.end()});
    const EffectiveCovariance cov(correlation_matrix(prob.design, spec), lambda, prob.lambda_z_for(lambda));
    return cov.krr_weights(prob.residual(theta));
}

ProfileLikelihood::ProfileLikelihood(const CalibrationProblem& prob) : prob_(&prob) {}

std::shared_ptr<const EffectiveCovariance> ProfileLikelihood::covariance(std::span<const double> range, double lambda,
                                                                         double lambda_z) const {
    const bool hit = cached_ && lambda == key_lambda_ && lambda_z == key_lambda_z_ &&
                     std::equal(range.begin(), range.end(), key_range_.begin(), key_range_.end());
    if (!hit) {
        const KernelSpec spec = prob_->kernel.with_range({range.begin(), range.end()});
        cached_.reset();
        cached_ = std::make_shared<const EffectiveCovariance>(correlation_matrix(prob_->design, spec), lambda, lambda_z);
        key_range_.assign(range.begin(), range.end());
        key_lambda_ = lambda;
        key_lambda_z_ = lambda_z;
    }
    return cached_;
}

ProfileValue ProfileLikelihood::evaluate(std::span<const double> theta, std::span<const double> range, double lambda,
                                         std::optional<double> lambda_z) const {
    check_theta(theta, *prob_);
    const double lz = lambda_z.value_or(prob_->lambda_z_for(lambda));
    return profile_value(*covariance(range, lambda, lz), prob_->residual(theta));
}

// --- fitted model and prediction ----------------------------------------------

double FittedCalibration::signal_variance() const {
    if (!covariance) throw DomainError("fit has no covariance");
    return sigma0_sq / (static_cast<double>(covariance->size()) * lambda);
}

FittedCalibration assemble_fit(const CalibrationProblem& prob, std::span<const double> theta,
                               std::span<const double> range, double lambda, std::optional<double> lambda_z) {
    check_theta(theta, prob);
    if (!(lambda > 0.0)) throw DomainError("assemble_fit: lambda must be positive");
    FittedCalibration fit;
    fit.kind = prob.kind;
    fit.theta = Eigen::Map<const linalg::Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    fit.kernel = prob.kernel.with_range({range.begin(), range.end()});
    fit.lambda = lambda;
    fit.lambda_z = prob.kind == ModelKind::GaSP ? 0.0 : lambda_z.value_or(prob.lambda_z_for(lambda));
    fit.covariance = std::make_shared<const EffectiveCovariance>(correlation_matrix(prob.design, fit.kernel), lambda,
                                                                 fit.lambda_z);
    const linalg::Vector e = prob.residual(theta);
    const ProfileValue v = profile_value(*fit.covariance, e);
    fit.objective = v.objective;
    fit.degenerate = v.degenerate;
    fit.sigma0_sq = lambda * v.s2;
    fit.weights = fit.covariance->shrinkage() * fit.covariance->krr_weights(e);
    return fit;
}

DiscrepancyPosterior::DiscrepancyPosterior(DesignSet design, KernelSpec kernel, const linalg::Vector& residual,
                                           double lambda, double lambda_z, double signal_variance)
    : design_(std::move(design)), kernel_(std::move(kernel)), signal_variance_(signal_variance) {
    if (static_cast<std::size_t>(residual.size()) != design_.size()) {
        throw DomainError("posterior: residual size mismatch");
    }
    if (!(signal_variance_ >= 0.0)) throw DomainError("posterior: signal variance must be non-negative");
    cov_ = std::make_shared<const EffectiveCovariance>(correlation_matrix(design_, kernel_), lambda, lambda_z);
    weights_ = cov_->shrinkage() * cov_->krr_weights(residual);
}

DiscrepancyPosterior::DiscrepancyPosterior(DesignSet design, const FittedCalibration& fit)
    : design_(std::move(design)),
      kernel_(fit.kernel),
      cov_(fit.covariance),
      weights_(fit.weights),
      signal_variance_(fit.signal_variance()) {
    if (!cov_ || cov_->size() != design_.size()) throw DomainError("posterior: fit does not match the design");
}

linalg::Vector DiscrepancyPosterior::mean(const DesignSet& xstar) const {
    return cross_correlation_matrix(xstar, design_, kernel_) * weights_;
}

linalg::Vector DiscrepancyPosterior::correlation(const DesignSet& xstar) const {
    const linalg::Matrix cross_t = cross_correlation_matrix(xstar, design_, kernel_).transpose();
    linalg::Vector k = cov_->variance_reduction(cross_t);
    // K(x, x) carries the nugget, matching the diagonal of R.
    k.array() += 1.0 + kernel_.nugget;
    return k.cwiseMax(0.0);
}

linalg::Vector DiscrepancyPosterior::variance(const DesignSet& xstar) const {
    return signal_variance_ * correlation(xstar);
}

namespace {

void check_predict(const FittedCalibration& fit, const CalibrationProblem& prob, const DesignSet& xstar) {
    if (!fit.covariance) throw DomainError("predict: fit is empty");
    if (fit.covariance->size() != prob.n()) throw DomainError("predict: fit and problem sizes differ");
    if (xstar.dims() != prob.p()) {
        throw DomainError("predict: test points have " + std::to_string(xstar.dims()) + " inputs, model expects " +
                          std::to_string(prob.p()));
    }
}

PredictiveDistribution predict_impl(const FittedCalibration& fit, const CalibrationProblem& prob,
                                    const DesignSet& xstar, PredictionTarget target) {
    check_predict(fit, prob, xstar);
    const DiscrepancyPosterior post(prob.design, fit);
    const std::span<const double> theta(fit.theta.data(), static_cast<std::size_t>(fit.theta.size()));
    PredictiveDistribution out;
    out.target = target;
    out.mean = simulate_at(prob.simulator, xstar, theta) + post.mean(xstar);
    out.variance = post.variance(xstar);
    if (target == PredictionTarget::Field) out.variance.array() += fit.sigma0_sq;
    return out;
}

}  // namespace

PredictiveDistribution gasp_predict(const FittedCalibration& fit, const CalibrationProblem& prob,
                                    const DesignSet& xstar, PredictionTarget target) {
    if (fit.kind != ModelKind::GaSP) throw DomainError("gasp_predict: fit is not a GaSP fit");
    return predict_impl(fit, prob, xstar, target);
}

PredictiveDistribution sgasp_predict(const FittedCalibration& fit, const CalibrationProblem& prob,
                                     const DesignSet& xstar, PredictionTarget target) {
    if (fit.kind != ModelKind::SGaSP) throw DomainError("sgasp_predict: fit is not an S-GaSP fit");
    return predict_impl(fit, prob, xstar, target);
}

PredictiveDistribution predict(const FittedCalibration& fit, const CalibrationProblem& prob, const DesignSet& xstar,
                               PredictionTarget target) {
    return predict_impl(fit, prob, xstar, target);
}

linalg::Vector predict_mean(const FittedCalibration& fit, const CalibrationProblem& prob, const DesignSet& xstar) {
    check_predict(fit, prob, xstar);
    const std::span<const double> theta(fit.theta.data(), static_cast<std::size_t>(fit.theta.size()));
    return simulate_at(prob.simulator, xstar, theta) +
           cross_correlation_matrix(xstar, prob.design, fit.kernel) * fit.weights;
}

// --- sampling -------------------------------------------------------------------

linalg::Matrix discretized_correlation(const DesignSet& x, const KernelSpec& spec, double lambda_z) {
    check_lambdas(0.0, lambda_z);
    linalg::Matrix r = correlation_matrix(x, spec);
    if (lambda_z == 0.0) return r;
    // R_zd = (I + a R)^{-1} R, symmetric because the two factors commute.
    linalg::Matrix b = (lambda_z / static_cast<double>(x.size())) * r;
    b.diagonal().array() += 1.0;
    const linalg::CholFactor bf(b);
    linalg::Matrix rzd = bf.solve(r);
    return 0.5 * (rzd + rzd.transpose());
}

linalg::Matrix sample_discrepancy(const DesignSet& x, const KernelSpec& spec, double lambda_z, double sigma_sq,
                                  std::uint64_t seed, std::size_t draws) {
    if (!(sigma_sq > 0.0)) throw DomainError("sample_discrepancy: sigma^2 must be positive");
    const linalg::CholFactor f(discretized_correlation(x, spec, lambda_z));
    const auto n = static_cast<Eigen::Index>(x.size());
    Engine engine = make_engine(seed, {3});
    std::normal_distribution<double> normal;
    linalg::Matrix z(n, static_cast<Eigen::Index>(draws));
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < n; ++i) z(i, j) = normal(engine);
    const linalg::Matrix paths = std::sqrt(sigma_sq) * (f.lower() * z);
    return paths.transpose();
}

}  // namespace sgcal
