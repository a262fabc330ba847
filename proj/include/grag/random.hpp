// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace grag {

// std::uniform_real_distribution is implementation-defined, so every seeded
// draw in the project goes through these helpers instead. mt19937_64 output
// is pinned by the standard, which makes results bit-identical across
// platforms and compilers.

// Uniform double in [0, 1), 53 bits of precision.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// FNV-1a 64-bit, used to derive stable per-token seeds.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace grag
