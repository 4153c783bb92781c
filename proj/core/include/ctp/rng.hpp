#pragma once

#include <cmath>
#include <cstdint>

namespace ctp {

/// SplitMix64 finalizer.  Used both as the avalanche mixer that derives
/// independent stream seeds from (base seed, integer coordinates) and as the
/// state update of the stream itself.
inline uint64_t splitmix64_mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a stream seed from a base seed and up to three signed coordinates.
/// Feeding each word through the finalizer before xor-folding the next one
/// avalanches low-entropy inputs (cell indices, trajectory numbers) apart.
inline uint64_t derive_seed(uint64_t base, int64_t a = 0, int64_t b = 0, int64_t c = 0) {
    uint64_t h = splitmix64_mix(base);
    h = splitmix64_mix(h ^ static_cast<uint64_t>(a));
    h = splitmix64_mix(h ^ static_cast<uint64_t>(b));
    h = splitmix64_mix(h ^ static_cast<uint64_t>(c));
    return h;
}

/// Small deterministic SplitMix64 stream.  All sampling in the library goes
/// through this type so results are bit-reproducible across platforms and
/// thread counts (no implementation-defined std:: distributions).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform draw in (0, 1]; safe to feed into log().
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential() { return -std::log(uniform_pos()); }

    /// Poisson draw by Knuth's product method, halving the mean recursively so
    /// the running product never underflows.
    uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 500.0) return poisson(mean * 0.5) + poisson(mean - mean * 0.5);
        const double limit = std::exp(-mean);
        uint64_t n = 0;
        double prod = uniform_pos();
        while (prod > limit) {
            ++n;
            prod *= uniform_pos();
        }
        return n;
    }

private:
    uint64_t state_;
};

}  // namespace ctp
