#pragma once

#include "sgcal/design.hpp"
#include "sgcal/linalg.hpp"

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sgcal {

/// Matérn smoothness with a closed form.
enum class Smoothness { Half, ThreeHalves, FiveHalves };

[[nodiscard]] double smoothness_value(Smoothness nu) noexcept;
/// Accepts "0.5", "1.5", "2.5", "1/2", "3/2", "5/2". Throws DomainError.
[[nodiscard]] Smoothness parse_smoothness(std::string_view text);

inline constexpr double kDefaultNugget = 1e-8;

/// Product Matérn correlation over p input dimensions.
struct KernelSpec {
    std::vector<Smoothness> smoothness;
    std::vector<double> range;
    double nugget = kDefaultNugget;

    [[nodiscard]] std::size_t dims() const noexcept { return range.size(); }

    /// Throws DomainError unless p >= 1, all ranges > 0 and finite, nugget >= 0.
    void validate() const;

    /// Matérn-5/2 in every dimension.
    [[nodiscard]] static KernelSpec matern52(std::vector<double> range, double nugget = kDefaultNugget);
    [[nodiscard]] KernelSpec with_range(std::vector<double> range) const;
};

/// One-dimensional Matérn correlation at distance d >= 0 with range gamma > 0.
[[nodiscard]] double matern_1d(double d, double gamma, Smoothness nu);

/// prod_i matern_1d(|xa_i - xb_i|, gamma_i, nu_i). No nugget.
[[nodiscard]] double product_correlation(std::span<const double> xa, std::span<const double> xb,
                                         const KernelSpec& spec);

/// n x n correlation matrix R over a design with the nugget on the diagonal.
/// Built row by row; no factorization.
[[nodiscard]] linalg::Matrix correlation_matrix(const DesignSet& x, const KernelSpec& spec);

/// m x n matrix of product_correlation(xstar_i, x_j). No nugget.
[[nodiscard]] linalg::Matrix cross_correlation_matrix(const DesignSet& xstar, const DesignSet& x,
                                                     const KernelSpec& spec);

/// Immutable Gram matrix with a lazily computed, thread-safe Cholesky factor.
class GramMatrix {
public:
    GramMatrix(linalg::Matrix r, std::shared_ptr<const DesignSet> design);

    [[nodiscard]] const linalg::Matrix& matrix() const noexcept { return r_; }
    [[nodiscard]] const DesignSet& design() const noexcept { return *design_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(r_.rows()); }

    /// Throws IllConditionedKernel with the failing pivot.
    [[nodiscard]] const linalg::CholFactor& factor() const;

private:
    struct FactorCache {
        std::once_flag once;
        std::optional<linalg::CholFactor> factor;
    };

    linalg::Matrix r_;
    std::shared_ptr<const DesignSet> design_;
    std::shared_ptr<FactorCache> cache_ = std::make_shared<FactorCache>();
};

/// Builds R and factorizes it eagerly, so an ill-conditioned kernel surfaces here.
[[nodiscard]] GramMatrix gram_matrix(const DesignSet& x, const KernelSpec& spec);

/// r(xstar) = (K(x_1, xstar), ..., K(x_n, xstar)). No nugget.
[[nodiscard]] linalg::Vector cross_correlation(std::span<const double> xstar, const DesignSet& x,
                                               const KernelSpec& spec);

/// Covariance of the discretized S-GaSP discrepancy (unit variance):
///   K_zd(a, b) = K(a, b) - r(a)^T (R + (n / lambda_z) I)^{-1} r(b)
/// with R the Gram matrix (nugget included) over the discretization points.
/// lambda_z = 0 is the unconstrained process and returns K(a, b).
class TransformedKernel {
public:
    TransformedKernel(DesignSet discretization, KernelSpec spec, double lambda_z);

    [[nodiscard]] double operator()(std::span<const double> xa, std::span<const double> xb) const;
    /// Gram matrix of K_zd over `x` (nugget on the diagonal, as for the base kernel).
    /// When `x` is the discretization set, R itself stands in for r(x) so that
    /// the result equals (R^{-1} + (lambda_z / n) I)^{-1}.
    [[nodiscard]] linalg::Matrix gram(const DesignSet& x) const;
    /// Cross-covariance K_zd(xstar_i, x_j).
    [[nodiscard]] linalg::Matrix cross(const DesignSet& xstar, const DesignSet& x) const;

    [[nodiscard]] double lambda_z() const noexcept { return lambda_z_; }

private:
    DesignSet disc_;
    KernelSpec spec_;
    double lambda_z_;
    std::optional<linalg::CholFactor> shifted_;  // R + (n / lambda_z) I
};

/// One-off evaluation of K_zd(xa, xb); factorizes on every call.
[[nodiscard]] double sgasp_kernel(std::span<const double> xa, std::span<const double> xb,
                                  const DesignSet& discretization, const KernelSpec& spec, double lambda_z);

}  // namespace sgcal
