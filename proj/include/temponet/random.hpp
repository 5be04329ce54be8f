#ifndef TEMPONET_RANDOM_HPP
#define TEMPONET_RANDOM_HPP

// Portable random number helpers.
//
// std::mt19937_64 is fully specified by the standard, but the std:: distributions
// are not, so every distribution used for generated data lives here. This keeps
// synthetic networks and solver initializations identical across toolchains.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace temponet {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to mix seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a child seed from a root seed, a stage name and an index.
// Stages can then be rerun in isolation and still see the same stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(mix64(root ^ h) + index);
}

// Uniform in [0, 1).
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1].
inline double uniform_open01(Rng& rng) {
    return 1.0 - uniform01(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [lo, hi], rejection sampled so it is unbiased.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(rng());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

// Poisson sample by sequential inversion; intended for small means (<~30).
inline std::int64_t poisson_small(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    const double u = uniform01(rng);
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u >= cdf && k < 10000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p == 0.0) break;
    }
    return k;
}

// Poisson sample conditioned on being >= 1.
inline std::int64_t poisson_positive(Rng& rng, double mean) {
    const double p0 = std::exp(-mean);
    const double u = p0 + (1.0 - p0) * uniform01(rng);
    double p = p0;
    double cdf = p0;
    std::int64_t k = 0;
    do {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    } while (u >= cdf && k < 10000 && p > 0.0);
    return k;
}

// Number of failures before the first success for success probability p in (0, 1].
inline std::uint64_t geometric_skip(Rng& rng, double p) {
    if (p >= 1.0) return 0;
    const double u = uniform_open01(rng);
    const double g = std::floor(std::log(u) / std::log1p(-p));
    if (!(g < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(g);
}

// Standard normal via Box-Muller (used only by test fixtures and tools).
inline double normal01(Rng& rng) {
    const double u1 = uniform_open01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

} // namespace temponet

#endif // TEMPONET_RANDOM_HPP
