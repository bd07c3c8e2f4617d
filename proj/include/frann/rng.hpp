#pragma once
// Deterministic randomness. All distributions are implemented on top of
// std::mt19937_64 (whose output sequence is fixed by the standard) so that
// index builds reproduce bit-identically for a given seed regardless of
// platform or thread count.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace frann {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from (seed, tag) pairs.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
    // draw unbiased and the consumed stream deterministic.
    std::uint64_t uniform(std::uint64_t bound) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform real in [0, 1).
    double uniform_real() {
        return double(eng_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform_real() - 1.0;
            v = 2.0 * uniform_real() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double mul = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * mul;
        has_spare_ = true;
        return u * mul;
    }

    // k distinct values from [0, n), ascending. Floyd's algorithm.
    std::vector<std::uint32_t> sample_distinct(std::uint32_t k, std::uint32_t n);

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace frann
