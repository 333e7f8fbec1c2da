#pragma once

// Deterministic random streams for reproducible experiments.
//
// Generator: SplitMix64. One 64-bit seed fully determines the stream, the
// state is a single counter-like word, and replicate streams are derived as
// seed_i = base_seed + i. Gaussian variates use the Box-Muller pair method.
// Both choices are recorded in run metadata by the experiment harness.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdemap {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0, 1); never returns 0 or 1, so it is
    // safe inside logs and inverse CDFs.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
    return base_seed + replicate;
}

// Gaussian stream caching the second member of each Box-Muller pair.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform();
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double uniform() {
        // Pass-through for non-Gaussian draws on the same stream (measurement
        // mixtures). Leaves any cached spare untouched.
        return rng_.uniform();
    }

private:
    SplitMix64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Correlated increment pair for strong order-1.5 integration of additive
// noise: dW = Brownian increment over a step h, dZ = the corresponding
// iterated integral with Cov = [[h, h^2/2], [h^2/2, h^3/3]].
struct BrownianPair {
    double dW;
    double dZ;
};

inline BrownianPair order15_increment(GaussianStream& g, double h) {
    const double xi1 = g.next();
    const double xi2 = g.next();
    const double sqrt_h = std::sqrt(h);
    const double dW = sqrt_h * xi1;
    const double dZ = 0.5 * h * (dW + sqrt_h * xi2 / std::sqrt(3.0));
    return {dW, dZ};
}

}  // namespace sdemap
