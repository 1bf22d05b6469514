#pragma once

#include <cstdint>

#include "dedup/bits.hpp"

namespace dedup {

/// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden
/// gamma 0x9E3779B97F4A7C15; each output is the finalizer
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27; z *= 0x94D049BB133111EB;
///   z ^= z >> 31;
/// The recurrence is fixed here so that instances are reproducible
/// across platforms and toolchains; do not swap in std::mt19937_64.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Unbiased uniform draw from [0, n) by masked rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("SplitMix64::next_below: n == 0");
        if (n == 1) return 0;
        std::uint64_t mask = ~0ull >> (63 - floor_log2_u64(n - 1));
        for (;;) {
            std::uint64_t r = next() & mask;
            if (r < n) return r;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    BitString next_bits(std::uint64_t len) {
        BitString out;
        out.reserve(len);
        std::uint64_t word = 0;
        unsigned have = 0;
        for (std::uint64_t i = 0; i < len; ++i) {
            if (have == 0) {
                word = next();
                have = 64;
            }
            out.push_back((word >> 63) & 1u);
            word <<= 1;
            --have;
        }
        return out;
    }

private:
    std::uint64_t state_;
};

/// SplitMix64 output function applied to a bare value; used to spread
/// trial indices into seed space.
inline std::uint64_t hash_u64(std::uint64_t x) {
    std::uint64_t z = x + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Per-trial stream seed: master seed XOR the hashed trial index.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    return master_seed ^ hash_u64(trial_index + 1);
}

} // namespace dedup
