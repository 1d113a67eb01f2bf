#pragma once

#include <cstdint>
#include <random>

#include "m2e/tensor.hpp"

namespace m2e {

using Rng = std::mt19937_64;

/// Generator for one independent stream of a seeded run.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// rows x cols matrix of i.i.d. N(0, 1) draws, filled column by column.
Matrix standard_normal(Index rows, Index cols, Rng& rng);

}  // namespace m2e
