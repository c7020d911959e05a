#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "sar3d/types.hpp"

namespace sar3d {

// All randomness in the toolkit flows through these helpers so that masks,
// noise and scene phases are reproducible from explicit integer seeds.
// Distributions are hand-rolled: std::*_distribution sequences are
// implementation-defined and would break replay across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % bound;
    }

    /// Standard normal pair via Box-Muller.
    void normal_pair(double& a, double& b) {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        a = r * std::cos(t);
        b = r * std::sin(t);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    cx complex_normal() {
        double a, b;
        normal_pair(a, b);
        return cx(a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0);
    }

    double uniform_angle() { return uniform() * 2.0 * std::numbers::pi; }

    /// First k entries of a random permutation of 0..n-1 (partial Fisher-Yates).
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::uint32_t>(uniform_below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace sar3d
