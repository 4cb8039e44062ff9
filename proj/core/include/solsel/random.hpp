#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace solsel {

// All stochastic decisions go through this engine. The distribution helpers
// below are written out by hand because the standard distributions are
// implementation-defined, and traces must be byte-identical across toolchains.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    return k < n ? k : n - 1;
}

/// Standard normal via Box-Muller (one draw, the sine branch is discarded).
inline double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace solsel
