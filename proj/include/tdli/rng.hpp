#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

// Portable samplers on top of std::mt19937_64. The engine output must be
// bit-reproducible for a given seed across standard libraries, so the
// distributions are spelled out here instead of using <random>'s
// implementation-defined std::normal_distribution / std::poisson_distribution.

namespace tdli {

using rng_engine = std::mt19937_64;

// splitmix64 finalizer: decorrelates (seed, stream) pairs so independent
// work chunks can each get their own engine. Chunked generation is what
// keeps a stream reproducible no matter how many threads consume it.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_sample(rng_engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. Draws exactly two variates per call pair;
// the cached second value keeps the draw count deterministic.
class NormalSampler {
public:
    double operator()(rng_engine& rng) {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_sample(rng);
        while (u1 <= 0.0) u1 = uniform_sample(rng);
        const double u2 = uniform_sample(rng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline double normal_sample(rng_engine& rng, double mean = 0.0, double sigma = 1.0) {
    NormalSampler s;
    return mean + sigma * s(rng);
}

// Poisson counts by Knuth's product method. Exact in distribution; large
// means are split into chunks of <= 500 (Poisson additivity) so the
// exp(-lambda) threshold never underflows.
inline std::uint64_t poisson_sample(rng_engine& rng, double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("poisson_sample: lambda must be >= 0");
    std::uint64_t total = 0;
    while (lambda > 500.0) {
        const double chunk = 500.0;
        const double thresh = std::exp(-chunk);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform_sample(rng);
        } while (p > thresh);
        total += k - 1;
        lambda -= chunk;
    }
    const double thresh = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform_sample(rng);
    } while (p > thresh);
    return total + (k - 1);
}

} // namespace tdli
