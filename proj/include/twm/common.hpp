#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace twm {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Thrown on semantically invalid inputs (bad files, broken decompositions,
// out-of-domain arguments). CLI maps this to exit code 1.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an internal invariant fails. CLI maps this to exit code 3.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

inline void check(bool ok, const std::string& msg) {
    if (!ok) throw validation_error(msg);
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw internal_error(msg);
}

// Unordered pair key for hash maps; a < b is normalized by the caller or here.
inline u64 pair_key(u32 a, u32 b) {
    if (a > b) std::swap(a, b);
    return (static_cast<u64>(a) << 32) | b;
}

inline u32 pair_key_lo(u64 k) { return static_cast<u32>(k & 0xffffffffu); }
inline u32 pair_key_hi(u64 k) { return static_cast<u32>(k >> 32); }

}  // namespace twm
