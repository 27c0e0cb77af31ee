#ifndef RWS_RNG_HPP
#define RWS_RNG_HPP

#include <cstdint>

namespace rws {

// Counter-based random numbers: every draw is a pure function of
// (seed, level, offset), so sampling is order-independent and two runs with
// the same key are bit-identical.  The mixer is the SplitMix64 finalizer
// applied to a chained key.

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// One 64-bit word for the child-pair draw of vertex (level, offset).
// level = -1 addresses the root-state draw.
inline std::uint64_t vertex_word(std::uint64_t seed, int level, std::uint64_t offset) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (static_cast<std::uint64_t>(level + 1) << 1));
    h = mix64(h ^ offset);
    return h;
}

// Uniform double in [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

inline double vertex_uniform(std::uint64_t seed, int level, std::uint64_t offset) {
    return to_unit(vertex_word(seed, level, offset));
}

// Independent per-replicate seed stream for Monte Carlo.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replicate) {
    return mix64(mix64(base) ^ (replicate * 0xD1342543DE82EF95ull + 1));
}

} // namespace rws

#endif
