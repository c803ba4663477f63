#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sgcal {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for the stream identified by a master seed and a path of indices,
/// e.g. stream_seed(master, {experiment, replicate}). Distinct paths give
/// statistically independent streams, so replicate r draws the same numbers
/// no matter which thread runs it or in what order.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

[[nodiscard]] Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> path);

}  // namespace sgcal
