#pragma once

#include <vector>

#include "twm/common.hpp"

namespace twm {

// Residues are kept reduced in [0, p). p is a prime < 2^15 so products fit
// in u32 comfortably and labels fit in u16.
using Fe = u16;

constexpr u32 kMaxPrime = 32749;

inline bool is_prime_u32(u32 x) {
    if (x < 2) return false;
    for (u32 d = 2; d * d <= x; ++d)
        if (x % d == 0) return false;
    return true;
}

// Arithmetic context shared by the scalar and the saturating (boolean)
// interpretation of labels. In saturating mode add = or, mul = and and the
// cardinality scalar collapses to presence; p is forced to 2 there.
struct Arith {
    u32 p = 2;
    bool saturating = false;

    static Arith mod(u32 prime) {
        check(is_prime_u32(prime) && prime <= kMaxPrime,
              "modulus must be a prime <= " + std::to_string(kMaxPrime));
        return Arith{prime, false};
    }
    static Arith sat() { return Arith{2, true}; }

    Fe add(Fe a, Fe b) const {
        if (saturating) return (a | b) ? 1 : 0;
        if (p == 2) return a ^ b;
        u32 s = static_cast<u32>(a) + b;
        if (s >= p) s -= p;
        return static_cast<Fe>(s);
    }
    Fe sub(Fe a, Fe b) const {
        if (saturating) return a;  // no subtraction in the saturating semiring
        if (p == 2) return a ^ b;
        u32 s = static_cast<u32>(a) + p - b;
        if (s >= p) s -= p;
        return static_cast<Fe>(s);
    }
    Fe mul(Fe a, Fe b) const {
        if (saturating) return (a && b) ? 1 : 0;
        if (p == 2) return a & b;
        return static_cast<Fe>((static_cast<u32>(a) * b) % p);
    }
    Fe neg(Fe a) const {
        if (saturating) return a;
        return a ? static_cast<Fe>(p - a) : 0;
    }
    // Part-size scalar: |part| reduced, or presence in saturating mode.
    Fe size_scalar(u64 count) const {
        if (saturating) return count ? 1 : 0;
        return static_cast<Fe>(count % p);
    }
    Fe reduce(u64 v) const {
        if (saturating) return v ? 1 : 0;
        return static_cast<Fe>(v % p);
    }
    bool valid_residue(u32 v) const { return v < p; }

    Fe inv(Fe a) const {
        check(!saturating, "no inverses in saturating mode");
        check(a != 0, "division by zero");
        // extended euclid
        i64 t = 0, nt = 1, r = p, nr = a;
        while (nr != 0) {
            i64 q = r / nr;
            t -= q * nt; std::swap(t, nt);
            r -= q * nr; std::swap(r, nr);
        }
        require(r == 1, "inverse of a nonunit");
        if (t < 0) t += p;
        return static_cast<Fe>(t);
    }
};

// Row-reduce a dense matrix over F_p in place; returns the rank.
// rows x cols, row-major.
inline int rank_fp(std::vector<Fe> m, int rows, int cols, const Arith& ar) {
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (m[static_cast<size_t>(r) * cols + c] != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        for (int j = 0; j < cols; ++j)
            std::swap(m[static_cast<size_t>(pivot) * cols + j], m[static_cast<size_t>(rank) * cols + j]);
        Fe piv_inv = ar.inv(m[static_cast<size_t>(rank) * cols + c]);
        for (int j = c; j < cols; ++j)
            m[static_cast<size_t>(rank) * cols + j] = ar.mul(m[static_cast<size_t>(rank) * cols + j], piv_inv);
        for (int r = 0; r < rows; ++r) {
            if (r == rank) continue;
            Fe f = m[static_cast<size_t>(r) * cols + c];
            if (f == 0) continue;
            for (int j = c; j < cols; ++j)
                m[static_cast<size_t>(r) * cols + j] =
                    ar.sub(m[static_cast<size_t>(r) * cols + j], ar.mul(f, m[static_cast<size_t>(rank) * cols + j]));
        }
        ++rank;
    }
    return rank;
}

}  // namespace twm
