#pragma once

#include <cstdint>
#include <vector>

#include "e2nn/emulator.hpp"

namespace e2nn {

/// Latin hypercube sample of n points in [-1, 1]^d: every dimension's n
/// strata each receive exactly one point.
std::vector<Point> lhs_design(std::size_t n, std::size_t d, std::uint64_t seed);

/// Halton sequence in [-1, 1]^d with a seeded Cranley-Patterson shift.
std::vector<Point> halton_points(std::size_t n, std::size_t d, std::uint64_t seed);

/// SplitMix64 step; derives independent child seeds from a parent seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace e2nn
