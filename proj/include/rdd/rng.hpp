#pragma once

#include <cstdint>
#include <random>

namespace rdd {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent seeds for sub-streams.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Named sub-streams so two consumers of the same seed never share draws.
enum class Stream : std::uint64_t {
    Population = 1,
    UeMotion = 2,
    Split = 3,
    MessageBus = 4,
    Test = 99,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
    const std::uint64_t s =
        mix_seed(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(stream))) + index);
    return Rng(s);
}

}  // namespace rdd
