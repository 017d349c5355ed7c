#pragma once

#include <cstdint>
#include <random>

// Sampling helpers with fully specified arithmetic. std::mt19937 itself is
// portable; the std distributions are not, so the few draws we need are
// spelled out here to keep seeded runs reproducible everywhere.

namespace gridcover {

using Rng = std::mt19937;

// Uniform over [0, n), unbiased via rejection.
inline std::uint32_t uniform_index(Rng& rng, std::uint32_t n) {
    const std::uint32_t limit = UINT32_MAX - UINT32_MAX % n;
    std::uint32_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

// Uniform over the closed interval [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(
                    uniform_index(rng, static_cast<std::uint32_t>(hi - lo + 1)));
}

// Uniform double in [0, 1) with 32-bit resolution.
inline double uniform_real01(Rng& rng) {
    return static_cast<double>(rng()) * 0x1p-32;
}

// Uniform float in (-a, a).
inline float uniform_symmetric(Rng& rng, float a) {
    return static_cast<float>((2.0 * uniform_real01(rng) - 1.0) * a);
}

}  // namespace gridcover
