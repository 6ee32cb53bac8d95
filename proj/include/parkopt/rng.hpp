#pragma once

// Deterministic sampling helpers. Draws go through fixed arithmetic on raw
// mt19937_64 words instead of std::uniform_real_distribution, whose output
// is not pinned down by the standard and differs across library versions.

#include <cstdint>
#include <random>

namespace parkopt {

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Uniform {
    double lo = 0.0, hi = 0.0;
};

inline double sample(const Uniform& u, std::mt19937_64& rng) {
    return u.lo + (u.hi - u.lo) * u01(rng);
}

} // namespace parkopt
