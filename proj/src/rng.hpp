#pragma once

#include <cstdint>
#include <random>

namespace ccovar::rng {

using Engine = std::mt19937_64;

/// Uniform draw strictly inside (0, 1) with 53 random bits; unlike
/// std::uniform_real_distribution the mapping is identical on every platform.
inline double uniform_open(Engine& engine) { return (double(engine() >> 11) + 0.5) * 0x1.0p-53; }

/// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Engine for replicate `index` of the experiment seeded by `seed`.
inline Engine stream(std::uint64_t seed, std::uint64_t index) { return Engine(mix(mix(seed) ^ mix(index + 1))); }

}  // namespace ccovar::rng
