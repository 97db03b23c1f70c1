#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace uigen {

/// SplitMix64 (Steele, Lea, Flood 2014). The generator is pinned so corpora, parameter
/// initialisation and sampling are reproducible bit-for-bit on every platform.
///
/// Independent streams are derived with `split(k)`, which hashes the current seed with the
/// stream index; stream k of a given generator is always the same sequence, so work split
/// across threads reproduces the sequential result.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        return mix(z);
    }

    Rng split(std::uint64_t stream) const noexcept {
        return Rng(mix(state_ ^ mix(stream + 0xD1B54A32D192ED03ULL)));
    }

    /// Uniform integer in [0, n). Unbiased (rejection on the 64-bit range).
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % n;
    }

    /// Uniform integer in [lo, hi].
    int range(int lo, int hi) noexcept {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal via Box-Muller; one value per call (the pair's twin is discarded).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Index drawn proportionally to nonnegative weights. Weights must not all be zero.
    std::size_t weighted(std::span<const double> weights) noexcept {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        std::size_t last = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last = i;
            if (r < weights[i]) return i;
            r -= weights[i];
        }
        return last;
    }

    std::uint64_t state() const noexcept { return state_; }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace uigen
