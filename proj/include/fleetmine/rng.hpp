#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

// Seeded randomness used across the toolkit. All draws go through the helpers
// below rather than std::*_distribution, whose output is implementation
// defined; this keeps every pipeline stage bit-reproducible for a fixed seed.

namespace fleetmine::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Fan a master seed out to a named stage/entity. Stages re-run in isolation
// see the same stream as in a full pipeline run.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return splitmix64(master ^ fnv1a(label));
}

inline Engine make_engine(std::uint64_t seed) {
    return Engine(seed);
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Standard normal via Box-Muller; consumes exactly two engine words.
inline double normal(Engine& g) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform01(g);
    double u2 = uniform01(g);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Marsaglia-Tsang; shape < 1 boosted through Gamma(shape + 1).
inline double gamma(Engine& g, double shape) {
    if (shape < 1.0) {
        double u = uniform01(g);
        if (u < 1e-300) u = 1e-300;
        return gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal(g);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform01(g);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double beta(Engine& g, double a, double b) {
    const double x = gamma(g, a);
    const double y = gamma(g, b);
    return x / (x + y);
}

// Exact Poisson sampling. Knuth's product method for small means; larger
// means are split additively, which preserves the distribution exactly.
inline std::int64_t poisson(Engine& g, double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean > 30.0) {
        const double half = mean / 2.0;
        return poisson(g, half) + poisson(g, mean - half);
    }
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform01(g);
    } while (p > limit);
    return k - 1;
}

} // namespace fleetmine::rng
