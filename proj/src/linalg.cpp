#include "sgcal/linalg.hpp"

#include "sgcal/errors.hpp"

#include <cmath>
#include <string>

namespace sgcal::linalg {

namespace {

// Eigen's LLT reports failure but not where. Rerun an unblocked
// factorization to find the first non-positive pivot (1-based).
std::size_t locate_failing_pivot(const Matrix& a) {
    const Eigen::Index n = a.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0)) return static_cast<std::size_t>(j + 1);
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return static_cast<std::size_t>(n);
}

}  // namespace

bool is_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
            if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
        }
    }
    return true;
}

CholFactor::CholFactor(const Matrix& a) {
    if (a.rows() != a.cols()) throw DomainError("cholesky: matrix is not square");
    if (!a.allFinite()) throw DomainError("cholesky: matrix has non-finite entries");
    if (!is_symmetric(a)) throw DomainError("cholesky: matrix is not symmetric");
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        const std::size_t pivot = locate_failing_pivot(a);
        throw NotPositiveDefinite(
            "cholesky: matrix is not positive definite (pivot " + std::to_string(pivot) + ")", pivot);
    }
    lower_ = llt.matrixL();
    // LLT accepts tiny positive pivots that underflow to zero in the factor.
    for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
        if (!(lower_(i, i) > 0.0) || !std::isfinite(lower_(i, i))) {
            const auto pivot = static_cast<std::size_t>(i + 1);
            throw NotPositiveDefinite(
                "cholesky: matrix is not positive definite (pivot " + std::to_string(pivot) + ")", pivot);
        }
    }
}

Vector CholFactor::solve(const Vector& b) const {
    if (b.size() != lower_.rows()) throw DomainError("solve_spd: size mismatch");
    Vector x = lower_.triangularView<Eigen::Lower>().solve(b);
    lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Matrix CholFactor::solve(const Matrix& b) const {
    if (b.rows() != lower_.rows()) throw DomainError("solve_spd: size mismatch");
    Matrix x = lower_.triangularView<Eigen::Lower>().solve(b);
    lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Vector CholFactor::solve_lower(const Vector& b) const {
    if (b.size() != lower_.rows()) throw DomainError("solve_lower: size mismatch");
    return lower_.triangularView<Eigen::Lower>().solve(b);
}

Matrix CholFactor::solve_lower(const Matrix& b) const {
    if (b.rows() != lower_.rows()) throw DomainError("solve_lower: size mismatch");
    return lower_.triangularView<Eigen::Lower>().solve(b);
}

double CholFactor::logdet() const {
    return 2.0 * lower_.diagonal().array().log().sum();
}

CholFactor cholesky(const Matrix& a) { return CholFactor(a); }

Vector solve_spd(const CholFactor& f, const Vector& b) { return f.solve(b); }

Matrix solve_spd(const CholFactor& f, const Matrix& b) { return f.solve(b); }

double logdet(const CholFactor& f) { return f.logdet(); }

SymEigen sym_eigen(const Matrix& a) {
    if (!is_symmetric(a)) throw DomainError("sym_eigen: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw DomainError("sym_eigen: decomposition did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace sgcal::linalg
