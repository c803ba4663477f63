#include "sgcal/design.hpp"

#include "sgcal/errors.hpp"
#include "sgcal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sgcal {

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::Grid: return "grid";
        case Provenance::Lhs: return "lhs";
        case Provenance::Uniform: return "uniform";
        case Provenance::File: return "file";
    }
    return "unknown";
}

DesignSet::DesignSet(PointMatrix points, Provenance provenance)
    : points_(std::move(points)), provenance_(provenance) {
    if (points_.rows() == 0 || points_.cols() == 0) throw DomainError("design: empty design");
    for (Eigen::Index i = 0; i < points_.size(); ++i) {
        const double v = points_.data()[i];
        if (std::isnan(v) || v < 0.0 || v > 1.0) {
            throw DomainError("design: entries must lie in [0, 1] (row " +
                              std::to_string(i / points_.cols() + 1) + ")");
        }
    }
}

DesignSet equispaced(std::size_t n, std::size_t p) {
    if (n == 0 || p == 0) throw DomainError("equispaced: n and p must be positive");
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) {
        axis[i] = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
    }
    std::size_t total = 1;
    for (std::size_t j = 0; j < p; ++j) {
        if (total > std::numeric_limits<std::size_t>::max() / n) throw DomainError("equispaced: grid too large");
        total *= n;
    }
    PointMatrix x(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(p));
    for (std::size_t row = 0; row < total; ++row) {
        std::size_t rest = row;
        for (std::size_t j = p; j-- > 0;) {
            x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = axis[rest % n];
            rest /= n;
        }
    }
    return DesignSet(std::move(x), Provenance::Grid);
}

double min_pairwise_distance(const PointMatrix& x) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = i + 1; k < x.rows(); ++k) {
            best = std::min(best, (x.row(i) - x.row(k)).squaredNorm());
        }
    }
    return std::sqrt(best);
}

bool is_latin_hypercube(const PointMatrix& x) {
    const auto n = static_cast<std::size_t>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::vector<bool> seen(n, false);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double v = x(i, j);
            if (!(v >= 0.0 && v <= 1.0)) return false;
            auto k = static_cast<std::size_t>(std::floor(v * static_cast<double>(n)));
            if (k == n) k = n - 1;
            if (seen[k]) return false;
            seen[k] = true;
        }
    }
    return true;
}

PointMatrix maximin_lhs_start(std::size_t n, std::size_t p, std::uint64_t seed, std::size_t restart) {
    Engine engine = make_engine(seed, {0, restart});
    return random_lhs(n, p, engine);
}

namespace {

// Morris-Mitchell phi_q with q = 15 drives acceptance; it breaks the ties that make the
// raw minimum distance a flat landscape for single swaps.

class ExchangeState {
public:
    explicit ExchangeState(PointMatrix x) : x_(std::move(x)), n_(x_.rows()), d2_(n_, n_), t_(n_, n_) {
        for (Eigen::Index i = 0; i < n_; ++i) {
            d2_(i, i) = 0.0;
            t_(i, i) = 0.0;
            for (Eigen::Index k = i + 1; k < n_; ++k) set(i, k, (x_.row(i) - x_.row(k)).squaredNorm());
        }
    }

    // Change in phi from swapping column j between rows a and b.
    [[nodiscard]] double swap_delta(Eigen::Index a, Eigen::Index b, Eigen::Index j) const {
        const double xa = x_(a, j);
        const double xb = x_(b, j);
        double delta = 0.0;
        for (Eigen::Index k = 0; k < n_; ++k) {
            if (k == a || k == b) continue;
            const double xk = x_(k, j);
            const double da = d2_(a, k) - (xa - xk) * (xa - xk) + (xb - xk) * (xb - xk);
            const double db = d2_(b, k) - (xb - xk) * (xb - xk) + (xa - xk) * (xa - xk);
            delta += term(da) - t_(a, k) + term(db) - t_(b, k);
        }
        return delta;
    }

    void apply_swap(Eigen::Index a, Eigen::Index b, Eigen::Index j) {
        std::swap(x_(a, j), x_(b, j));
        for (Eigen::Index k = 0; k < n_; ++k) {
            if (k != a) set(a, k, (x_.row(a) - x_.row(k)).squaredNorm());
            if (k != b) set(b, k, (x_.row(b) - x_.row(k)).squaredNorm());
        }
    }

    [[nodiscard]] double min_distance() const {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n_; ++i)
            for (Eigen::Index k = i + 1; k < n_; ++k) best = std::min(best, d2_(i, k));
        return std::sqrt(best);
    }

    [[nodiscard]] const PointMatrix& points() const noexcept { return x_; }

private:
    // d^-15 from the squared distance, without pow.
    static double term(double d2) {
        const double d4 = d2 * d2;
        const double d8 = d4 * d4;
        return 1.0 / (d8 * d4 * d2 * std::sqrt(d2));
    }

    void set(Eigen::Index i, Eigen::Index k, double d2) {
        d2_(i, k) = d2_(k, i) = d2;
        t_(i, k) = t_(k, i) = term(d2);
    }

    PointMatrix x_;
    Eigen::Index n_;
    Eigen::MatrixXd d2_;
    Eigen::MatrixXd t_;  // term(d2_) cached
};

}  // namespace

DesignSet maximin_lhs(std::size_t n, std::size_t p, std::uint64_t seed, std::size_t restarts) {
    if (n < 2) throw DomainError("maximin_lhs: need at least two points");
    if (p == 0) throw DomainError("maximin_lhs: p must be positive");
    if (restarts == 0) restarts = 1;

    PointMatrix best;
    double best_dist = -1.0;
    const std::size_t patience = 20 * n * p;
    const std::size_t max_attempts = 200 * n * p;

    for (std::size_t r = 0; r < restarts; ++r) {
        ExchangeState state(maximin_lhs_start(n, p, seed, r));
        Engine engine = make_engine(seed, {1, r});
        PointMatrix local_best = state.points();
        double local_dist = state.min_distance();
        std::size_t since_improvement = 0;
        for (std::size_t attempt = 0; attempt < max_attempts && since_improvement < patience; ++attempt) {
            const auto a = static_cast<Eigen::Index>(engine() % n);
            auto b = static_cast<Eigen::Index>(engine() % (n - 1));
            if (b >= a) ++b;
            const auto j = static_cast<Eigen::Index>(engine() % p);
            if (state.swap_delta(a, b, j) < 0.0) {
                state.apply_swap(a, b, j);
                since_improvement = 0;
                const double d = state.min_distance();
                if (d > local_dist) {
                    local_dist = d;
                    local_best = state.points();
                }
            } else {
                ++since_improvement;
            }
        }
        if (local_dist > best_dist) {
            best_dist = local_dist;
            best = std::move(local_best);
        }
    }
    return DesignSet(std::move(best), Provenance::Lhs);
}

DesignSet uniform(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (n == 0 || p == 0) throw DomainError("uniform: n and p must be positive");
    Engine engine = make_engine(seed, {2});
    PointMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
    return DesignSet(std::move(x), Provenance::Uniform);
}

}  // namespace sgcal
