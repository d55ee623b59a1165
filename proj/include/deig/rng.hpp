#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace deig {

// Seeded random source. Normal variates use an explicit Box-Muller transform on
// top of mt19937_64 so that a given seed produces the same stream on any
// standard library; gamma variates delegate to std::gamma_distribution, which
// is deterministic within a build, all the beta-moment tests need.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        // No pair caching: each call draws a fresh (u1, u2).
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    double gamma(double shape) {
        std::gamma_distribution<double> g(shape, 1.0);
        return g(engine_);
    }

    double beta(double alpha, double beta) {
        double x = gamma(alpha);
        double y = gamma(beta);
        return x / (x + y);
    }

    // Fisher-Yates index for shuffles: uniform integer on [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        // Rejection sampling keeps the draw exactly uniform.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace deig
