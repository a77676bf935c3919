#pragma once

#include <cstdint>
#include <cmath>

// Counter-based random streams. Every draw is a pure function of the
// integers fed in, so results do not depend on how a loop is chunked
// or which replica runs first.

namespace trophic::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int r) {
    return (v << r) | (v >> (64 - r));
}

inline std::uint64_t mix2(std::uint64_t a, std::uint64_t b) {
    return mix(a ^ rotl(mix(b), 17));
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix2(a, b) ^ rotl(mix(c), 29));
}

// Uniform in (0, 1]; never returns 0 so it is safe under log().
inline double to_unit(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return to_unit(mix3(seed, a, b));
}

// Standard normal via Box-Muller on two derived uniforms.
inline double gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const std::uint64_t h1 = mix3(seed, a, b);
    const std::uint64_t h2 = mix(h1 ^ kGolden);
    const double u1 = to_unit(h1);
    const double u2 = to_unit(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace trophic::rng
