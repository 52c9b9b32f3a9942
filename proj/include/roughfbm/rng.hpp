#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, counter), so cells can be generated in any order or in parallel.

#include <array>
#include <cstdint>

namespace rfbm {

/// Philox4x32 with 10 rounds.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Standard normal variate addressed by (seed, a, b, stream).
double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint32_t b, std::uint32_t stream);

/// Independent per-task seed derived from a master seed (SplitMix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rfbm
