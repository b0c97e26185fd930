#pragma once

#include <cstdint>
#include <random>

namespace merplan {

// SplitMix64 finalizer. Bijective on 64-bit integers, good avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for an independent substream. Substreams keep scenario sampling
/// order-independent: stream i produces the same draws whether scenarios are
/// generated sequentially or split across workers.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream));
}

/// Uniform double in [0, 1) built from the top 53 bits of one mt19937_64
/// draw. Unlike std::uniform_real_distribution this is bit-exact across
/// standard library implementations.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(std::mt19937_64& gen, std::size_t n) {
    auto idx = static_cast<std::size_t>(uniform01(gen) * static_cast<double>(n));
    return idx < n ? idx : n - 1;
}

}  // namespace merplan
