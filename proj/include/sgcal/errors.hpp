#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgcal {

/// Invalid argument: out-of-domain value, dimension mismatch, bad bounds.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cholesky hit a non-positive pivot. `pivot()` is 1-based.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(const std::string& what, std::size_t pivot)
        : std::runtime_error(what), pivot_(pivot) {}

    [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// A correlation matrix that stays singular after the nugget is added.
class IllConditionedKernel : public NotPositiveDefinite {
public:
    using NotPositiveDefinite::NotPositiveDefinite;
};

/// Every start of a multistart optimization failed.
class OptimizationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file could not be parsed. `row()` is the 1-based data row (0 for header).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row)
        : std::runtime_error(what), row_(row) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace sgcal
