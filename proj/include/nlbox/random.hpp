// random.hpp
//
// Seeded draws used by the search routines and the property suites. All
// sampling is hand-rolled on top of mt19937_64 so that a fixed seed gives
// the same stream on every platform.

#pragma once

#include "nlbox/core.hpp"

#include <cstdint>
#include <random>

namespace nlbox {

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& gen) {
    return double(gen() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (cosine branch).
inline double gaussian(std::mt19937_64& gen) {
    const double u1 = (double(gen() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform_unit(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Derives an independent generator for worker `index` of a seeded run.
inline std::mt19937_64 subgenerator(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Haar-like uniform state: normalized complex Gaussian amplitudes.
template <typename Scalar = double>
TwoQubitState<Scalar> random_state(std::mt19937_64& gen) {
    Vector4c<Scalar> v;
    for (int i = 0; i < 4; ++i)
        v(i) = Complex<Scalar>(Scalar(gaussian(gen)), Scalar(gaussian(gen)));
    return TwoQubitState<Scalar>(v);
}

/// Product state |a> (x) |b> with each factor uniform on the Bloch sphere.
template <typename Scalar = double>
TwoQubitState<Scalar> random_product_state(std::mt19937_64& gen) {
    Vector2c<Scalar> f[2];
    for (auto& q : f) {
        q(0) = Complex<Scalar>(Scalar(gaussian(gen)), Scalar(gaussian(gen)));
        q(1) = Complex<Scalar>(Scalar(gaussian(gen)), Scalar(gaussian(gen)));
        q.normalize();
    }
    Vector4c<Scalar> v;
    v << f[0](0) * f[1](0), f[0](0) * f[1](1), f[0](1) * f[1](0),
        f[0](1) * f[1](1);
    return TwoQubitState<Scalar>(v);
}

/// Measurement direction uniform on the sphere.
template <typename Scalar = double>
QubitObservable<Scalar> random_observable(std::mt19937_64& gen) {
    const Scalar costh = Scalar(2) * Scalar(uniform_unit(gen)) - Scalar(1);
    const Scalar theta = std::acos(std::clamp(costh, Scalar(-1), Scalar(1)));
    const Scalar phi = Scalar(2 * M_PI) * Scalar(uniform_unit(gen));
    return QubitObservable<Scalar>(theta, phi);
}

}  // namespace nlbox
