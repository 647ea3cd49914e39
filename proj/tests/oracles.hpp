#pragma once

// Slow, obviously-correct reference implementations used to pin expected
// values in the test suites. Nothing here is used by the library itself.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "terrain/polycell.hpp"

namespace oracle {

// Plain monomial-sum evaluation with repeated multiplication.
inline double naive_poly_eval(const terrain::polycell::PolyCoefficients& poly,
                              std::span<const double> point) {
    double total = 0.0;
    for (std::size_t idx = 0; idx < poly.coeffs.size(); ++idx) {
        const auto a = poly.unflatten(idx);
        double term = poly.coeffs[idx];
        for (int k = 0; k < poly.config.dims; ++k)
            for (int rep = 0; rep < a[static_cast<std::size_t>(k)]; ++rep)
                term *= point[static_cast<std::size_t>(k)];
        total += term;
    }
    return total;
}

// Central finite difference for a scalar function of one packed argument.
template <typename F>
double central_diff(F&& f, std::vector<double> point, std::size_t axis, double h = 1e-5) {
    point[axis] += h;
    const double hi = f(point);
    point[axis] -= 2.0 * h;
    const double lo = f(point);
    return (hi - lo) / (2.0 * h);
}

// Second-order one-sided difference, usable at domain boundaries.
template <typename F>
double one_sided_diff(F&& f, std::vector<double> point, std::size_t axis, double h, int direction) {
    const double f0 = f(point);
    point[axis] += direction * h;
    const double f1 = f(point);
    point[axis] += direction * h;
    const double f2 = f(point);
    return direction * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline double uniform(std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

}  // namespace oracle
