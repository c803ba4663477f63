#include "sgcal/truth.hpp"

#include "sgcal/errors.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace sgcal {

namespace {

// sin(j) / j^3, computed once for the largest truncation ever requested.
const std::vector<double>& series_coefficients(std::size_t terms) {
    static thread_local std::vector<double> coef;
    if (coef.size() < terms) {
        const std::size_t start = coef.size();
        coef.resize(terms);
        for (std::size_t k = start; k < terms; ++k) {
            const double j = static_cast<double>(k + 1);
            coef[k] = std::sin(j) / (j * j * j);
        }
    }
    return coef;
}

}  // namespace

double truth_eg1(double x, std::size_t terms) {
    if (!std::isfinite(x)) throw DomainError("truth_eg1: x must be finite");
    if (terms == 0) throw DomainError("truth_eg1: need at least one term");
    const std::vector<double>& coef = series_coefficients(terms);
    double s = 0.0;
    // Sum from the smallest terms up to limit rounding.
    for (std::size_t k = terms; k-- > 0;) {
        const double j = static_cast<double>(k + 1);
        s += coef[k] * std::cos(std::numbers::pi * (j - 0.5) * x);
    }
    return 2.0 * s;
}

TruthFunction truth_library(std::string_view name) {
    if (name == "example1") {
        return {"example1", 1, 1, [](std::span<const double> x) { return truth_eg1(x[0]); },
                [](std::span<const double>, std::span<const double> t) { return t[0]; }, 0.05,
                Bounds{{-5.0}, {5.0}}};
    }
    if (name == "case-i") {
        return {"case-i", 1, 2,
                [](std::span<const double> x) { return std::exp(-1.4 * x[0]) * std::cos(3.5 * std::numbers::pi * x[0]); },
                [](std::span<const double> x, std::span<const double> t) { return t[0] + t[1] * x[0]; }, 0.05,
                Bounds{{-10.0, -10.0}, {10.0, 10.0}}};
    }
    if (name == "case-ii") {
        // Product x1 * x2 in the exponential, as in the simulation library.
        return {"case-ii", 2, 2,
                [](std::span<const double> x) { return std::cos(x[0] + x[1]) * std::exp(x[0] * x[1]); },
                [](std::span<const double> x, std::span<const double> t) { return t[0] + t[1] * x[0]; }, 0.05,
                Bounds{{-10.0, -10.0}, {10.0, 10.0}}};
    }
    if (name == "case-iii") {
        return {"case-iii", 3, 1,
                [](std::span<const double> x) {
                    return (64.0 / 27.0) * std::cbrt(x[0]) * std::cbrt(x[1]) * std::cbrt(x[2]);
                },
                [](std::span<const double>, std::span<const double> t) { return t[0]; }, 0.05,
                Bounds{{-10.0}, {10.0}}};
    }
    if (name == "case-iv") {
        // Low-fidelity version 1.2 * park(x) - 1 of the four-input function.
        return {"case-iv", 4, 3,
                [](std::span<const double> x) {
                    const double park = 2.0 / 3.0 * std::exp(x[0] + x[1]) + x[2] - x[3] * std::sin(x[2]);
                    return 1.2 * park - 1.0;
                },
                [](std::span<const double> x, std::span<const double> t) { return t[0] + t[1] * x[1] + t[2] * x[2]; },
                0.05, Bounds{{-10.0, -10.0, -10.0}, {10.0, 10.0, 10.0}}};
    }
    if (name == "example3") {
        return {"example3", 2, 2,
                [](std::span<const double> x) {
                    return std::sin(0.2 * std::numbers::pi * x[0]) * x[1] + std::sin(2.0 * std::numbers::pi * x[0]) * x[1] +
                           1.0;
                },
                [](std::span<const double> x, std::span<const double> t) { return std::sin(t[0] * x[0]) * x[1] + t[1]; },
                0.1, Bounds{{0.0, -2.0}, {8.0, 3.0}}};
    }
    throw DomainError("unknown truth function '" + std::string(name) +
                      "' (expected example1, case-i, case-ii, case-iii, case-iv or example3)");
}

std::vector<std::string> truth_names() { return {"example1", "case-i", "case-ii", "case-iii", "case-iv", "example3"}; }

}  // namespace sgcal
