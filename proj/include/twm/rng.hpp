#pragma once

#include "twm/common.hpp"

namespace twm {

// Deterministic splitmix64 generator. Bit-identical across platforms, which
// std::uniform_int_distribution is not; seed 0 is fine.
struct Rng {
    u64 state;

    explicit Rng(u64 seed = 0) : state(seed + 0x9e3779b97f4a7c15ull) {}

    u64 next() {
        u64 z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound), bound >= 1. Rejection sampling keeps it unbiased.
    u64 below(u64 bound) {
        if (bound <= 1) return 0;
        u64 threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            u64 r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [lo, hi] inclusive.
    i64 range(i64 lo, i64 hi) { return lo + static_cast<i64>(below(static_cast<u64>(hi - lo + 1))); }

    // True with probability num/den.
    bool chance(u64 num, u64 den) { return below(den) < num; }

    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace twm
