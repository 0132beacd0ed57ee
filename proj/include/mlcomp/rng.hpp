#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mlcomp {

/// Engine used by every randomized component. Its output sequence is fixed by
/// the standard, so runs replay identically across standard libraries as long
/// as draws go through the helpers below rather than std::*_distribution.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a base seed with a list of coordinates. For a fixed base the map is
/// injective over coordinates below 2^20 each (up to three of them).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords);

/// Uniform integer in [0, n). Rejection sampling on the top bits; n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform real in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

double uniform_real(Rng& rng, double lo, double hi);

/// Standard normal via Box-Muller (one value per call, second discarded).
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_index(rng, i);
        std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
    }
}

}  // namespace mlcomp
