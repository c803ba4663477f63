#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace sgcal::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower Cholesky factor L of a symmetric positive definite matrix, A = L L^T.
class CholFactor {
public:
    /// Factorizes `a`. Throws DomainError if `a` is not symmetric (to 1e-10,
    /// relative to its largest entry) and NotPositiveDefinite on a
    /// non-positive pivot.
    explicit CholFactor(const Matrix& a);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
    [[nodiscard]] const Matrix& lower() const noexcept { return lower_; }

    /// A^{-1} b via a forward and a backward triangular solve.
    [[nodiscard]] Vector solve(const Vector& b) const;
    [[nodiscard]] Matrix solve(const Matrix& b) const;

    /// L^{-1} b. Useful for quadratic forms b^T A^{-1} b = |L^{-1} b|^2.
    [[nodiscard]] Vector solve_lower(const Vector& b) const;
    [[nodiscard]] Matrix solve_lower(const Matrix& b) const;

    /// log|A| = 2 sum log L_ii.
    [[nodiscard]] double logdet() const;

private:
    Matrix lower_;
};

[[nodiscard]] CholFactor cholesky(const Matrix& a);
[[nodiscard]] Vector solve_spd(const CholFactor& f, const Vector& b);
[[nodiscard]] Matrix solve_spd(const CholFactor& f, const Matrix& b);
[[nodiscard]] double logdet(const CholFactor& f);

struct SymEigen {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns, vectors.col(i) pairs with values[i]
};

/// Eigendecomposition of a symmetric matrix. Throws DomainError otherwise.
[[nodiscard]] SymEigen sym_eigen(const Matrix& a);

/// max |a_ij - a_ji| <= tol * max(1, max |a_ij|)
[[nodiscard]] bool is_symmetric(const Matrix& a, double tol = 1e-10);

}  // namespace sgcal::linalg
