#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sdf {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for a path of indices below a root seed, e.g.
/// derive_seed(seed, {stream, level, slot, fold, tree}). Every unit of work
/// gets its own stream, so any subtree is reproducible in isolation.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t p : path) {
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Stream tags keep derived seeds of unrelated consumers apart.
namespace stream {
inline constexpr std::uint64_t pairs = 1;
inline constexpr std::uint64_t split = 2;
inline constexpr std::uint64_t validation = 3;
inline constexpr std::uint64_t folds = 4;
inline constexpr std::uint64_t forest = 5;
inline constexpr std::uint64_t scanning = 6;
inline constexpr std::uint64_t repetition = 7;
} // namespace stream

} // namespace sdf
