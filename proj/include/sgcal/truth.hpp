#pragma once

#include "sgcal/models.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgcal {

/// Example 1 reality 2 sum_{j <= terms} j^-3 cos(pi (j - 1/2) x) sin(j). The
/// dropped tail is bounded by terms^-2.
[[nodiscard]] double truth_eg1(double x, std::size_t terms = 10000);

/// A reality y^R together with its paired simulator family and noise level.
struct TruthFunction {
    std::string name;
    std::size_t p = 1;
    std::size_t q = 1;
    std::function<double(std::span<const double>)> reality;
    Simulator simulator;
    double noise_sd = 0.0;
    /// Search box for theta used by the benchmark fits.
    Bounds theta_bounds;
};

/// Names: "example1", "case-i", "case-ii", "case-iii", "case-iv", "example3".
/// Throws DomainError for anything else.
[[nodiscard]] TruthFunction truth_library(std::string_view name);

[[nodiscard]] std::vector<std::string> truth_names();

}  // namespace sgcal
