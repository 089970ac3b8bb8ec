#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "c3bv/core.hpp"

namespace c3bv {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Coordinate-based seed derivation: the result depends only on the master
/// seed and the coordinates, never on the order in which streams are created.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept;

/// Direction drawn uniformly on the full unit sphere S^{d-1}.
Vec random_unit_direction(Eigen::Index d, Rng& rng);

}  // namespace c3bv
