#pragma once

#include <tuple>
#include <vector>

#include "twm/dense.hpp"

namespace twm {

// Contraction sequence over n0 initial vertices: triples (u, v, z) where z is
// the fresh vertex replacing u and v. Canonical ids give the k-th triple
// z = n0 + k.
struct ContractionSeq {
    int n0 = 0;
    std::vector<std::array<int, 3>> steps;
};

// Dense replay of a contraction process over a labeled (tri)graph. Vertex ids
// run over 0..2*n0-2; contracted pairs keep their rows so late queries about
// dead vertices still see the final black values they had.
//
// An alive pair is red when its parts are non-homogeneously joined; black
// pairs carry a label oriented row -> column. The replay reports, per
// contraction, the black pairs that cease to be black ("disappearing"), which
// is exactly where a canonical decomposition attaches its biclique edges.
template <class V>
struct SeqReplay {
    using T = vt<V>;

    int n0 = 0, cap = 0;
    Arith ar;
    std::vector<V> lab;        // cap x cap, valid where not red
    std::vector<u8> red_;      // cap x cap
    std::vector<u8> alive;
    std::vector<int> red_deg;
    std::vector<u64> part_size;
    int next_id = 0;
    int width = 0;
    int alive_count = 0;
    // Output of the latest contract(): (c, w, value oriented c -> w). The
    // identification pair (u, v), when black, appears here too.
    std::vector<std::tuple<int, int, V>> disappeared;

    SeqReplay(int n, const Arith& arith) : n0(n), cap(2 * n - 1), ar(arith) {
        check(n >= 1, "need at least one vertex");
        lab.assign(static_cast<size_t>(cap) * cap, T::zero());
        red_.assign(static_cast<size_t>(cap) * cap, 0);
        alive.assign(cap, 0);
        red_deg.assign(cap, 0);
        part_size.assign(cap, 0);
        for (int v = 0; v < n; ++v) alive[v] = 1, part_size[v] = 1;
        next_id = n;
        alive_count = n;
    }

    size_t idx(int u, int v) const { return static_cast<size_t>(u) * cap + v; }
    bool is_red(int u, int v) const { return red_[idx(u, v)] != 0; }
    const V& label(int u, int v) const { return lab[idx(u, v)]; }

    // Load initial adjacency; for undirected labels the table must be
    // symmetric. Diagonal must be zero.
    void load(const Mat& g) {
        check(g.rows == n0 && g.cols == n0, "adjacency size mismatch");
        for (int u = 0; u < n0; ++u) {
            check(g.at(u, u) == 0, "nonzero diagonal in adjacency");
            for (int v = 0; v < n0; ++v) {
                if (u == v) continue;
                check(ar.valid_residue(g.at(u, v)), "adjacency entry out of range");
                if constexpr (!T::directed)
                    check(g.at(u, v) == g.at(v, u), "undirected adjacency must be symmetric");
                lab[idx(u, v)] = T::make(g.at(u, v), g.at(v, u));
            }
        }
    }

    void set_label(int u, int v, V val) {
        lab[idx(u, v)] = val;
        lab[idx(v, u)] = T::flip(val);
    }

    int contract(int u, int v) {
        check(u >= 0 && u < next_id && v >= 0 && v < next_id && u != v, "bad contraction pair");
        check(alive[u] && alive[v], "contracting a dead vertex");
        check(next_id < cap, "too many contractions");
        int z = next_id++;
        disappeared.clear();
        for (int w = 0; w < z; ++w) {
            if (!alive[w] || w == u || w == v) continue;
            bool ru = is_red(u, w), rv = is_red(v, w);
            V a = lab[idx(u, w)], b = lab[idx(v, w)];
            bool now_red = ru || rv || !(a == b);
            int deg_delta = -(ru ? 1 : 0) - (rv ? 1 : 0);
            if (now_red) {
                red_[idx(z, w)] = red_[idx(w, z)] = 1;
                ++red_deg[z];
                ++deg_delta;
                if (!ru && !T::is_zero(a)) disappeared.emplace_back(u, w, a);
                if (!rv && !T::is_zero(b)) disappeared.emplace_back(v, w, b);
            } else if (!T::is_zero(a)) {
                set_label(z, w, a);
            }
            red_deg[w] += deg_delta;
            if (red_deg[w] > width) width = red_deg[w];
        }
        if (!is_red(u, v) && !T::is_zero(lab[idx(u, v)]))
            disappeared.emplace_back(u, v, lab[idx(u, v)]);
        if (red_deg[z] > width) width = red_deg[z];
        alive[u] = alive[v] = 0;
        alive[z] = 1;
        part_size[z] = part_size[u] + part_size[v];
        --alive_count;
        return z;
    }
};

// Replay a full sequence over an initial adjacency; returns the width.
// Triples must use canonical fresh ids (n0 + k for the k-th step).
template <class V>
int replay_width(const Mat& g, const ContractionSeq& seq, const Arith& ar) {
    check(seq.n0 == g.rows, "sequence and adjacency disagree on n");
    SeqReplay<V> rp(seq.n0, ar);
    rp.load(g);
    check(static_cast<int>(seq.steps.size()) == seq.n0 - 1, "sequence must contract down to one part");
    for (auto [u, v, z] : seq.steps) {
        int got = rp.contract(u, v);
        check(got == z, "non-canonical fresh id in sequence");
    }
    return rp.width;
}

}  // namespace twm
