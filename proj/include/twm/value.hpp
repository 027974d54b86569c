#pragma once

#include <cassert>
#include <string>

#include "twm/field.hpp"

namespace twm {

// Directed edge label: f is the value along the stored orientation (x -> y
// for an edge kept as (x, y)), g the value against it. Undirected labels are
// plain Fe; the engine is generic over both through the vt<> traits below.
struct Dv {
    Fe f = 0, g = 0;
    friend bool operator==(const Dv&, const Dv&) = default;
};

template <class V>
struct vt;

template <>
struct vt<Fe> {
    static constexpr bool directed = false;
    static Fe zero() { return 0; }
    static bool is_zero(Fe v) { return v == 0; }
    static Fe fwd(Fe v) { return v; }
    static Fe bwd(Fe v) { return v; }
    // Both component expressions must agree for undirected labels.
    static Fe make(Fe f, [[maybe_unused]] Fe g) {
        assert(f == g);
        return f;
    }
    static Fe flip(Fe v) { return v; }
    static Fe add(const Arith& ar, Fe a, Fe b) { return ar.add(a, b); }
    static Fe scale(const Arith& ar, Fe s, Fe v) { return ar.mul(s, v); }
    static std::string str(Fe v) { return std::to_string(v); }
};

template <>
struct vt<Dv> {
    static constexpr bool directed = true;
    static Dv zero() { return {}; }
    static bool is_zero(Dv v) { return v.f == 0 && v.g == 0; }
    static Fe fwd(Dv v) { return v.f; }
    static Fe bwd(Dv v) { return v.g; }
    static Dv make(Fe f, Fe g) { return {f, g}; }
    static Dv flip(Dv v) { return {v.g, v.f}; }
    static Dv add(const Arith& ar, Dv a, Dv b) { return {ar.add(a.f, b.f), ar.add(a.g, b.g)}; }
    static Dv scale(const Arith& ar, Fe s, Dv v) { return {ar.mul(s, v.f), ar.mul(s, v.g)}; }
    static std::string str(Dv v) { return std::to_string(v.f) + "," + std::to_string(v.g); }
};

}  // namespace twm
