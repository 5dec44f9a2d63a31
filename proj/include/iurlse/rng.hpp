#pragma once

#include <cstdint>
#include <random>

namespace iurlse::rng {

// Stream topology. Every random quantity is drawn from its own stream whose
// seed is derive(run_seed, purpose, a, b). The split is counter based: the
// derived seed is a pure function of its four arguments, so streams never
// depend on the order in which other streams were consumed.
//
//   Quadrature  a = trial,       b = candidate index
//   Outer       a = trial
//   Explore     a = trial
//   Perturb     a = trial        (initial design uses a = 0, b = point index)
//   Noise       a = trial        (initial design uses a = 0, b = point index)
//   Initial     a = point index
//   Oracle      a = candidate index
//   Acquire     a = trial        (random-baseline scores)
//   Replication a = replication index
//   Subsample / Truth / Split: harness-level draws
enum class Purpose : std::uint64_t {
    Quadrature = 1,
    Outer = 2,
    Explore = 3,
    Perturb = 4,
    Noise = 5,
    Initial = 6,
    Oracle = 7,
    Acquire = 8,
    Replication = 9,
    Subsample = 10,
    Truth = 11,
    Split = 12,
};

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, Purpose purpose, std::uint64_t a = 0,
                               std::uint64_t b = 0) {
    std::uint64_t h = mix(seed + kGoldenGamma * static_cast<std::uint64_t>(purpose));
    h = mix(h ^ (a + 2 * kGoldenGamma));
    h = mix(h ^ (b + 3 * kGoldenGamma));
    return h;
}

using Stream = std::mt19937_64;

inline Stream stream(std::uint64_t seed, Purpose purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
    return Stream(derive(seed, purpose, a, b));
}

/// Uniform double in [0, 1) from the top 53 bits; independent of the
/// standard library's distribution implementations.
inline double uniform01(Stream& s) {
    return static_cast<double>(s() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n) by rejection on the top bits.
inline std::uint64_t uniform_index(Stream& s, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t v;
    do {
        v = s();
    } while (v >= limit);
    return v % n;
}

}  // namespace iurlse::rng
