#pragma once

#include <cstdint>
#include <random>

namespace itw {

/// SplitMix64 finalizer; decorrelates derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of the counter-th substream of a master seed. Pure function, so any
/// (seed, counter) pair names the same stream regardless of scheduling.
constexpr std::uint64_t substream(std::uint64_t master, std::uint64_t counter) {
    return splitmix64(master ^ splitmix64(counter + 0x51ed2701u));
}

using RngEngine = std::mt19937_64;

inline RngEngine make_engine(std::uint64_t seed) { return RngEngine(splitmix64(seed)); }

}  // namespace itw
