#include "sgcal/kernel.hpp"

#include "sgcal/errors.hpp"

#include <cmath>
#include <string>

namespace sgcal {

double smoothness_value(Smoothness nu) noexcept {
    switch (nu) {
        case Smoothness::Half: return 0.5;
        case Smoothness::ThreeHalves: return 1.5;
        case Smoothness::FiveHalves: return 2.5;
    }
    return 2.5;
}

Smoothness parse_smoothness(std::string_view text) {
    if (text == "0.5" || text == "1/2") return Smoothness::Half;
    if (text == "1.5" || text == "3/2") return Smoothness::ThreeHalves;
    if (text == "2.5" || text == "5/2") return Smoothness::FiveHalves;
    throw DomainError("smoothness must be one of 1/2, 3/2, 5/2 (got '" + std::string(text) + "')");
}

void KernelSpec::validate() const {
    if (range.empty()) throw DomainError("kernel: at least one input dimension required");
    if (smoothness.size() != range.size()) throw DomainError("kernel: smoothness and range lengths differ");
    for (double g : range) {
        if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("kernel: range parameters must be positive and finite");
    }
    if (!(nugget >= 0.0) || !std::isfinite(nugget)) throw DomainError("kernel: nugget must be non-negative");
}

KernelSpec KernelSpec::matern52(std::vector<double> range, double nugget) {
    KernelSpec spec{std::vector<Smoothness>(range.size(), Smoothness::FiveHalves), std::move(range), nugget};
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::with_range(std::vector<double> r) const {
    KernelSpec spec = *this;
    spec.range = std::move(r);
    spec.validate();
    return spec;
}

double matern_1d(double d, double gamma, Smoothness nu) {
    if (!std::isfinite(d) || d < 0.0) throw DomainError("matern_1d: distance must be finite and non-negative");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("matern_1d: range must be positive");
    const double t = d / gamma;
    switch (nu) {
        case Smoothness::Half: return std::exp(-t);
        case Smoothness::ThreeHalves: {
            const double s = std::sqrt(3.0) * t;
            return (1.0 + s) * std::exp(-s);
        }
        case Smoothness::FiveHalves: {
            const double s = std::sqrt(5.0) * t;
            return (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
    }
    throw DomainError("matern_1d: unknown smoothness");
}

namespace {

// Hot path for Gram construction; skips the argument checks of matern_1d.
inline double matern_unchecked(double d, double gamma, Smoothness nu) {
    const double t = d / gamma;
    switch (nu) {
        case Smoothness::Half: return std::exp(-t);
        case Smoothness::ThreeHalves: {
            const double s = 1.7320508075688772 * t;
            return (1.0 + s) * std::exp(-s);
        }
        case Smoothness::FiveHalves:
        default: {
            const double s = 2.23606797749979 * t;
            return (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
    }
}

inline double product_unchecked(const double* xa, const double* xb, const KernelSpec& spec) {
    double k = 1.0;
    for (std::size_t i = 0; i < spec.range.size(); ++i) {
        k *= matern_unchecked(std::abs(xa[i] - xb[i]), spec.range[i], spec.smoothness[i]);
    }
    return k;
}

void check_dims(std::size_t got, const KernelSpec& spec, const char* who) {
    if (got != spec.dims()) {
        throw DomainError(std::string(who) + ": point has " + std::to_string(got) + " coordinates, kernel expects " +
                          std::to_string(spec.dims()));
    }
}

}  // namespace

double product_correlation(std::span<const double> xa, std::span<const double> xb, const KernelSpec& spec) {
    check_dims(xa.size(), spec, "product_correlation");
    check_dims(xb.size(), spec, "product_correlation");
    double k = 1.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
        k *= matern_1d(std::abs(xa[i] - xb[i]), spec.range[i], spec.smoothness[i]);
    }
    return k;
}

linalg::Matrix correlation_matrix(const DesignSet& x, const KernelSpec& spec) {
    spec.validate();
    check_dims(x.dims(), spec, "correlation_matrix");
    const auto n = static_cast<Eigen::Index>(x.size());
    linalg::Matrix r(n, n);
    const double* base = x.points().data();
    const auto p = static_cast<Eigen::Index>(x.dims());
    for (Eigen::Index j = 0; j < n; ++j) {
        r(j, j) = 1.0 + spec.nugget;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double k = product_unchecked(base + i * p, base + j * p, spec);
            r(i, j) = k;
            r(j, i) = k;
        }
    }
    return r;
}

linalg::Matrix cross_correlation_matrix(const DesignSet& xstar, const DesignSet& x, const KernelSpec& spec) {
    spec.validate();
    check_dims(xstar.dims(), spec, "cross_correlation");
    check_dims(x.dims(), spec, "cross_correlation");
    const auto m = static_cast<Eigen::Index>(xstar.size());
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto p = static_cast<Eigen::Index>(x.dims());
    linalg::Matrix r(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double* xj = x.points().data() + j * p;
        for (Eigen::Index i = 0; i < m; ++i) {
            r(i, j) = product_unchecked(xstar.points().data() + i * p, xj, spec);
        }
    }
    return r;
}

GramMatrix::GramMatrix(linalg::Matrix r, std::shared_ptr<const DesignSet> design)
    : r_(std::move(r)), design_(std::move(design)) {}

const linalg::CholFactor& GramMatrix::factor() const {
    std::call_once(cache_->once, [this] {
        try {
            cache_->factor.emplace(r_);
        } catch (const NotPositiveDefinite& e) {
            throw IllConditionedKernel("gram_matrix: correlation matrix is singular after the nugget (pivot " +
                                           std::to_string(e.pivot()) + ")",
                                       e.pivot());
        }
    });
    return *cache_->factor;
}

GramMatrix gram_matrix(const DesignSet& x, const KernelSpec& spec) {
    GramMatrix g(correlation_matrix(x, spec), std::make_shared<const DesignSet>(x));
    (void)g.factor();
    return g;
}

linalg::Vector cross_correlation(std::span<const double> xstar, const DesignSet& x, const KernelSpec& spec) {
    spec.validate();
    check_dims(xstar.size(), spec, "cross_correlation");
    check_dims(x.dims(), spec, "cross_correlation");
    linalg::Vector r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = product_unchecked(x.point(i).data(), xstar.data(), spec);
    }
    return r;
}

TransformedKernel::TransformedKernel(DesignSet discretization, KernelSpec spec, double lambda_z)
    : disc_(std::move(discretization)), spec_(std::move(spec)), lambda_z_(lambda_z) {
    spec_.validate();
    if (!(lambda_z_ >= 0.0) || !std::isfinite(lambda_z_)) {
        throw DomainError("sgasp_kernel: lambda_z must be finite and non-negative");
    }
    if (lambda_z_ > 0.0) {
        linalg::Matrix shifted = correlation_matrix(disc_, spec_);
        shifted.diagonal().array() += static_cast<double>(disc_.size()) / lambda_z_;
        shifted_.emplace(shifted);
    }
}

double TransformedKernel::operator()(std::span<const double> xa, std::span<const double> xb) const {
    const double k = product_correlation(xa, xb, spec_);
    if (!shifted_) return k;
    const linalg::Vector ra = cross_correlation(xa, disc_, spec_);
    const linalg::Vector rb = cross_correlation(xb, disc_, spec_);
    return k - ra.dot(shifted_->solve(rb));
}

linalg::Matrix TransformedKernel::gram(const DesignSet& x) const {
    linalg::Matrix k = correlation_matrix(x, spec_);
    if (!shifted_) return k;
    const bool same = x.dims() == disc_.dims() && x.size() == disc_.size() && x.points() == disc_.points();
    const linalg::Matrix r = same ? k : cross_correlation_matrix(x, disc_, spec_);
    const linalg::Matrix half = shifted_->solve_lower(linalg::Matrix(r.transpose()));
    k.noalias() -= half.transpose() * half;
    return k;
}

linalg::Matrix TransformedKernel::cross(const DesignSet& xstar, const DesignSet& x) const {
    linalg::Matrix k = cross_correlation_matrix(xstar, x, spec_);
    if (!shifted_) return k;
    const linalg::Matrix ra = cross_correlation_matrix(xstar, disc_, spec_);
    const linalg::Matrix rb = cross_correlation_matrix(x, disc_, spec_);
    k.noalias() -= shifted_->solve_lower(linalg::Matrix(ra.transpose())).transpose() *
                   shifted_->solve_lower(linalg::Matrix(rb.transpose()));
    return k;
}

double sgasp_kernel(std::span<const double> xa, std::span<const double> xb, const DesignSet& discretization,
                    const KernelSpec& spec, double lambda_z) {
    return TransformedKernel(discretization, spec, lambda_z)(xa, xb);
}

}  // namespace sgcal
