#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "hyperfast/types.hpp"

namespace hyperfast {

/// Portable pseudorandom source: std::mt19937_64 (fully specified by the
/// standard) with explicit conversions, so streams match across standard
/// libraries.
///
///   uniform(): (u64 >> 11) * 2^-53, in [0, 1)
///   normal():  Box-Muller, one fresh pair of uniforms per call,
///              sqrt(-2 ln(1 - u1)) * cos(2 pi u2); the sine branch is discarded
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vector normal_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    /// Uniform direction scaled by a radius drawn uniformly in [0, max_radius].
    Vector in_ball(Eigen::Index n, double max_radius) {
        Vector v = normal_vector(n);
        const double nv = v.norm();
        if (nv == 0.0) return Vector::Zero(n);
        return v * (uniform() * max_radius / nv);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace hyperfast
