#pragma once

// Seeded corner data on the integer lattice. Every value is a pure function
// of (seed, octave, ix, iy), so any map region can be produced in isolation
// and chunks sharing lattice lines agree without communication.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "terrain/errors.hpp"

namespace terrain::lattice {

struct LatticeKey {
    std::uint64_t seed = 0;
    std::uint32_t octave = 0;
    std::int64_t ix = 0;
    std::int64_t iy = 0;
};

struct GradientWeight {
    double w = 0.0;

    explicit GradientWeight(double weight) : w(weight) {
        if (!(weight >= 0.0) || !std::isfinite(weight))
            throw ValidationError("gradient weight must be finite and non-negative");
    }
};

namespace detail {

// 64-bit finalizer-style avalanche (the murmur3 fmix64 constants).
inline std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xFF51AFD7ED558CCDULL;
    z ^= z >> 33;
    z *= 0xC4CEB9FE1A85EC53ULL;
    z ^= z >> 33;
    return z;
}

// Key fields packed by multiplication with fixed odd constants; exact
// values are part of the reproducibility contract.
inline std::uint64_t pack(const LatticeKey& key) {
    return key.seed * 0x9E3779B97F4A7C15ULL + std::uint64_t{key.octave} * 0xBF58476D1CE4E5B9ULL +
           static_cast<std::uint64_t>(key.ix) * 0x94D049BB133111EBULL +
           static_cast<std::uint64_t>(key.iy) * 0xD6E8FEB86659FD93ULL;
}

// Independent output lanes from one packed key.
inline constexpr std::uint64_t kAngleLane = 0xA0761D6478BD642FULL;
inline constexpr std::uint64_t kMagnitudeLane = 0xE7037ED1A0B428DBULL;

inline double to_unit(std::uint64_t z) {
    return static_cast<double>(z >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace detail

inline double corner_height(const LatticeKey& key) {
    return detail::to_unit(detail::mix(detail::pack(key))) * 2.0 - 1.0;
}

inline double corner_angle(const LatticeKey& key) {
    return detail::to_unit(detail::mix(detail::pack(key) ^ detail::kAngleLane)) * 2.0 *
           std::numbers::pi;
}

// Direction uniform in angle, magnitude uniform in [0, w].
inline std::array<double, 2> corner_gradient(const LatticeKey& key, GradientWeight weight) {
    const double angle = corner_angle(key);
    const double magnitude =
        detail::to_unit(detail::mix(detail::pack(key) ^ detail::kMagnitudeLane)) * weight.w;
    return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

// Unit direction for Perlin-style cells.
inline std::array<double, 2> corner_unit_gradient(const LatticeKey& key) {
    const double angle = corner_angle(key);
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace terrain::lattice
