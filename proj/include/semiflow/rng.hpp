#pragma once

#include <cstdint>

namespace semiflow {

// Counter-based random numbers: every draw is a pure function of
// (seed, counter keys), so parallel and serial evaluation orders produce
// identical values.  The mixer is splitmix64.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t k0,
                                std::uint64_t k1 = 0, std::uint64_t k2 = 0) {
    std::uint64_t h = mix64(seed ^ 0x853c49e6748fea9bull);
    h = mix64(h ^ mix64(k0 + 0x9e3779b97f4a7c15ull));
    h = mix64(h ^ mix64(k1 + 0xd1b54a32d192ed03ull));
    h = mix64(h ^ mix64(k2 + 0x2545f4914f6cdd1dull));
    return h;
}

// Uniform double in [0, 1), keyed by up to three counters.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t k0,
                            std::uint64_t k1 = 0, std::uint64_t k2 = 0) {
    return static_cast<double>(keyed_bits(seed, k0, k1, k2) >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi].
inline double keyed_uniform(std::uint64_t seed, std::uint64_t k0, std::uint64_t k1,
                            std::uint64_t k2, double lo, double hi) {
    return lo + keyed_uniform(seed, k0, k1, k2) * (hi - lo);
}

} // namespace semiflow
