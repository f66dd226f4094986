#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ancreg {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a path of stream labels, e.g.
/// `derive_seed(study_seed, {size_index, run})`. Distinct paths give
/// statistically independent streams, so work can be split across threads in
/// any order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                                  std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t state = mix64(seed);
    for (std::uint64_t label : path) {
        state = mix64(state ^ mix64(label + 0x632be59bd9b4e019ULL));
    }
    return state;
}

[[nodiscard]] inline Engine make_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

}  // namespace ancreg
