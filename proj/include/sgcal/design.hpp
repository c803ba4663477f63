#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace sgcal {

/// Row-major so that each design point is a contiguous span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Provenance { Grid, Lhs, Uniform, File };

[[nodiscard]] std::string_view to_string(Provenance p) noexcept;

/// n x p input design with every entry in [0, 1].
class DesignSet {
public:
    /// Throws DomainError on n == 0, p == 0, NaN, or entries outside [0, 1].
    DesignSet(PointMatrix points, Provenance provenance);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
    [[nodiscard]] std::size_t dims() const noexcept { return static_cast<std::size_t>(points_.cols()); }
    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * dims(), dims()};
    }
    [[nodiscard]] const PointMatrix& points() const noexcept { return points_; }
    [[nodiscard]] Provenance provenance() const noexcept { return provenance_; }

private:
    PointMatrix points_;
    Provenance provenance_;
};

/// 1-d: x_i = i/(n-1) (0.5 when n == 1). p > 1: tensor grid with n points per axis,
/// last coordinate varying fastest.
[[nodiscard]] DesignSet equispaced(std::size_t n, std::size_t p = 1);

/// One random Latin hypercube with stratum midpoints, drawn from `engine`.
template <class Engine>
[[nodiscard]] PointMatrix random_lhs(std::size_t n, std::size_t p, Engine& engine);

/// The unoptimized starting design maximin_lhs uses for restart `restart`.
[[nodiscard]] PointMatrix maximin_lhs_start(std::size_t n, std::size_t p, std::uint64_t seed, std::size_t restart);

/// Maximin Latin hypercube: `restarts` random midpoint LHS designs, each improved
/// by pairwise coordinate-exchange hill climbing; returns the design with the
/// largest minimum pairwise distance. Throws DomainError when n < 2.
[[nodiscard]] DesignSet maximin_lhs(std::size_t n, std::size_t p, std::uint64_t seed, std::size_t restarts = 20);

/// i.i.d. Unif[0,1]^p points.
[[nodiscard]] DesignSet uniform(std::size_t n, std::size_t p, std::uint64_t seed);

/// Smallest Euclidean distance between distinct rows.
[[nodiscard]] double min_pairwise_distance(const PointMatrix& x);

/// Every column has exactly one entry per stratum [k/n, (k+1)/n).
[[nodiscard]] bool is_latin_hypercube(const PointMatrix& x);

// ---------------------------------------------------------------------------

template <class Engine>
PointMatrix random_lhs(std::size_t n, std::size_t p, Engine& engine) {
    PointMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        // Fisher-Yates with an explicit uniform index so results do not depend
        // on the standard library's shuffle implementation.
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t k = static_cast<std::size_t>(engine() % i);
            std::swap(perm[i - 1], perm[k]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (static_cast<double>(perm[i]) + 0.5) / static_cast<double>(n);
        }
    }
    return x;
}

}  // namespace sgcal
