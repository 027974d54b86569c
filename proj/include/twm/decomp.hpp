#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "twm/trigraph.hpp"

namespace twm {

inline bool guardrails_off() {
    const char* v = std::getenv("TWINMUL_GUARDRAILS");
    return v != nullptr && std::string(v) == "off";
}

// Biclique edge between two tree nodes; val is oriented x -> y.
template <class V>
struct Bedge {
    int x = 0, y = 0;
    V val{};
};

// Ranked binary tree over n leaves plus labeled biclique edges. Canonical
// ids: leaves 0..n-1, internal node with label l sits at id n + (n-1-l), so
// internal ids ascend as labels descend and the root is the last id. The
// label of a leaf is n by convention (leaves outrank every internal label).
template <class V>
struct Decomposition {
    int n = 0;
    u32 p = 2;
    std::vector<int> parent;                // -1 at the root
    std::vector<std::array<int, 2>> kids;   // {-1, -1} at leaves
    std::vector<Bedge<V>> bedges;

    int node_count() const { return n <= 1 ? n : 2 * n - 1; }
    bool is_leaf(int id) const { return id < n; }
    int label(int id) const { return id < n ? n : 2 * n - 1 - id; }
    int internal_of_label(int l) const { return n + (n - 1 - l); }
    int root() const { return n <= 1 ? 0 : 2 * n - 2; }
    int parent_label(int id) const { return parent[id] < 0 ? 0 : label(parent[id]); }
    // Step at which a biclique edge's pair ceases to exist.
    int bedge_step(const Bedge<V>& e) const { return std::max(parent_label(e.x), parent_label(e.y)); }
};

// Cheap per-node / per-edge checks; no replay. Throws validation_error.
template <class V>
void structure_check(const Decomposition<V>& D, const Arith& ar) {
    check(D.n >= 1, "decomposition needs at least one leaf");
    check(ar.p == D.p, "arithmetic context does not match decomposition modulus");
    int N = D.node_count();
    check(static_cast<int>(D.parent.size()) == N && static_cast<int>(D.kids.size()) == N,
          "node array size mismatch");
    if (D.n == 1) {
        check(D.parent[0] == -1 && D.bedges.empty(), "single-leaf decomposition must be bare");
        return;
    }
    std::vector<int> refs(N, 0);
    for (int id = 0; id < N; ++id) {
        if (D.is_leaf(id)) {
            check(D.kids[id][0] == -1 && D.kids[id][1] == -1, "leaf with children");
        } else {
            auto [a, b] = D.kids[id];
            check(a >= 0 && a < N && b >= 0 && b < N && a != b, "bad children");
            // Ranked: children carry strictly larger labels, i.e. smaller
            // internal ids or leaves.
            check(D.is_leaf(a) || a < id, "child label not larger than parent label");
            check(D.is_leaf(b) || b < id, "child label not larger than parent label");
            check(D.parent[a] == id && D.parent[b] == id, "parent link mismatch");
            ++refs[a], ++refs[b];
        }
    }
    for (int id = 0; id < N; ++id) {
        if (id == D.root()) {
            check(D.parent[id] == -1 && refs[id] == 0, "root must be unreferenced");
        } else {
            check(refs[id] == 1, "node referenced by " + std::to_string(refs[id]) + " parents");
            check(D.parent[id] >= 0, "non-root without parent");
        }
    }
    for (const auto& e : D.bedges) {
        check(e.x >= 0 && e.x < N && e.y >= 0 && e.y < N && e.x != e.y, "bad biclique endpoint");
        check(!vt<V>::is_zero(e.val), "biclique edge with zero label");
        check(ar.valid_residue(vt<V>::fwd(e.val)) && ar.valid_residue(vt<V>::bwd(e.val)),
              "biclique label out of range");
        // Coexistence: neither endpoint may die before the other is born.
        check(D.parent_label(e.x) <= D.label(e.y) && D.parent_label(e.y) <= D.label(e.x),
              "biclique edge crosses a border");
    }
}

// Euler intervals and leaf ranges; leaves_inorder[i] is the i-th leaf in
// traversal order and node x covers leaf indices [leaf_lo[x], leaf_hi[x]).
struct TreeInfo {
    std::vector<int> tin, tout;
    std::vector<int> leaf_lo, leaf_hi;
    std::vector<int> leaves_inorder;
    std::vector<u64> subtree_leaves;

    bool anc_or_self(int a, int b) const { return tin[a] <= tin[b] && tout[b] <= tout[a]; }
};

template <class V>
TreeInfo tree_info(const Decomposition<V>& D) {
    int N = D.node_count();
    TreeInfo t;
    t.tin.assign(N, 0);
    t.tout.assign(N, 0);
    t.leaf_lo.assign(N, 0);
    t.leaf_hi.assign(N, 0);
    t.subtree_leaves.assign(N, 0);
    t.leaves_inorder.reserve(D.n);
    int timer = 0;
    // Iterative DFS; second visit closes the interval.
    std::vector<std::pair<int, int>> stack{{D.root(), 0}};
    while (!stack.empty()) {
        auto& [id, phase] = stack.back();
        if (phase == 0) {
            t.tin[id] = timer++;
            t.leaf_lo[id] = static_cast<int>(t.leaves_inorder.size());
            phase = 1;
            if (D.is_leaf(id)) {
                t.leaves_inorder.push_back(id);
            } else {
                int a = D.kids[id][0], b = D.kids[id][1];
                stack.push_back({b, 0});
                stack.push_back({a, 0});
            }
        } else {
            t.tout[id] = timer++;
            t.leaf_hi[id] = static_cast<int>(t.leaves_inorder.size());
            t.subtree_leaves[id] = static_cast<u64>(t.leaf_hi[id] - t.leaf_lo[id]);
            stack.pop_back();
        }
    }
    require(static_cast<int>(t.leaves_inorder.size()) == D.n, "tree does not cover all leaves");
    return t;
}

// Observer hooks for the validation replay. Called after each contraction
// step with the frame index and the merged node; red partner lists are read
// through the replay state passed alongside.
template <class V>
struct DecReplayState {
    // rel[a][w]: relation of alive pair (a, w); red when flagged, otherwise
    // black with the stored value oriented a -> w.
    struct Rel {
        u8 red = 0;
        V val{};
    };
    std::vector<std::unordered_map<int, Rel>> rel;
    std::vector<int> red_count;
    std::vector<u8> alive;

    std::vector<int> red_partners(int a) const {
        std::vector<int> out;
        for (const auto& [w, r] : rel[a])
            if (r.red) out.push_back(w);
        std::sort(out.begin(), out.end());
        return out;
    }
};

struct DecReport {
    int width = 0;
    u64 bedge_count = 0;
};

// Full validation: structure, border crossings, ancestor pairs, duplicate or
// overlapping bicliques, and an exact width replay. The replay walks frames
// n-1 .. 1 merging the children of the node labeled i; biclique edges
// activate once both endpoints exist and any activation on a pair that
// already has a relation is an overlap.
//
// step_cb, when set, is called as step_cb(frame, z_node, state) after each
// step (frame = label of the merged node).
template <class V, class StepCb>
DecReport validate_twd_cb(const Decomposition<V>& D, const Arith& ar, StepCb&& step_cb) {
    using T = vt<V>;
    structure_check(D, ar);
    DecReport rep;
    rep.bedge_count = D.bedges.size();
    if (D.n == 1) return rep;
    TreeInfo info = tree_info(D);

    std::unordered_set<u64> seen_pairs;
    seen_pairs.reserve(D.bedges.size() * 2);
    int n = D.n;
    std::vector<std::vector<int>> activate(n + 1);  // by frame min(l(x), l(y))
    for (size_t i = 0; i < D.bedges.size(); ++i) {
        const auto& e = D.bedges[i];
        check(!info.anc_or_self(e.x, e.y) && !info.anc_or_self(e.y, e.x),
              "biclique edge joins a node to its ancestor");
        check(seen_pairs.insert(pair_key(e.x, e.y)).second, "duplicate biclique edge");
        activate[std::min(D.label(e.x), D.label(e.y))].push_back(static_cast<int>(i));
    }

    DecReplayState<V> st;
    int N = D.node_count();
    st.rel.resize(N);
    st.red_count.assign(N, 0);
    st.alive.assign(N, 0);
    for (int v = 0; v < n; ++v) st.alive[v] = 1;

    auto do_activate = [&](int frame) {
        for (int i : activate[frame]) {
            const auto& e = D.bedges[i];
            require(st.alive[e.x] && st.alive[e.y], "activation on a dead node");
            check(!st.rel[e.x].count(e.y), "overlapping biclique edges");
            st.rel[e.x][e.y] = {0, e.val};
            st.rel[e.y][e.x] = {0, T::flip(e.val)};
        }
    };

    do_activate(n);
    for (int i = n - 1; i >= 1; --i) {
        int z = D.internal_of_label(i);
        auto [u, v] = D.kids[z];
        // Merge u and v into z over the tracked sparse relations.
        auto& mu = st.rel[u];
        auto& mv = st.rel[v];
        for (int side = 0; side < 2; ++side) {
            auto& own = side == 0 ? mu : mv;
            for (auto& [w, r] : own) {
                if (w == u || w == v) continue;
                if (st.rel[z].count(w)) continue;  // already merged via the other child
                auto itu = mu.find(w);
                auto itv = mv.find(w);
                bool ru = itu != mu.end() && itu->second.red;
                bool rv = itv != mv.end() && itv->second.red;
                V a = itu != mu.end() ? itu->second.val : T::zero();
                V b = itv != mv.end() ? itv->second.val : T::zero();
                bool now_red = ru || rv || !(a == b);
                auto& mw = st.rel[w];
                int died = (itu != mu.end() && ru ? 1 : 0) + (itv != mv.end() && rv ? 1 : 0);
                mw.erase(u);
                mw.erase(v);
                if (now_red) {
                    st.rel[z][w] = {1, T::zero()};
                    mw[z] = {1, T::zero()};
                    ++st.red_count[z];
                    st.red_count[w] += 1 - died;
                } else {
                    // a == b nonzero here: zero-zero pairs are never tracked.
                    st.rel[z][w] = {0, a};
                    mw[z] = {0, T::flip(a)};
                    st.red_count[w] -= died;
                }
                rep.width = std::max(rep.width, st.red_count[w]);
            }
        }
        mu.clear();
        mv.clear();
        st.alive[u] = st.alive[v] = 0;
        st.alive[z] = 1;
        rep.width = std::max(rep.width, st.red_count[z]);
        do_activate(i);
        step_cb(i, z, st);
    }
    require(st.rel[D.root()].empty(), "root with leftover relations");
    return rep;
}

template <class V>
DecReport validate_twd(const Decomposition<V>& D, const Arith& ar) {
    return validate_twd_cb(D, ar, [](int, int, const DecReplayState<V>&) {});
}

// Per-frame red partner lists (sorted, keyed by alive node id), frames
// n-1 .. 1. Row k describes the frame after step n-1-k.
template <class V>
std::vector<std::vector<std::pair<int, std::vector<int>>>> red_lists(const Decomposition<V>& D,
                                                                     const Arith& ar) {
    std::vector<std::vector<std::pair<int, std::vector<int>>>> out;
    validate_twd_cb(D, ar, [&](int, int, const DecReplayState<V>& st) {
        std::vector<std::pair<int, std::vector<int>>> frame;
        for (int a = 0; a < static_cast<int>(st.alive.size()); ++a)
            if (st.alive[a] && st.red_count[a] > 0) frame.emplace_back(a, st.red_partners(a));
        out.push_back(std::move(frame));
    });
    return out;
}

// Merge sibling biclique edges with equal labels to a common partner into a
// parent edge, bottom-up, whenever the parent and the partner coexist.
// Skipped merges are exactly the pairs that die on the partner's side first.
template <class V>
Decomposition<V> lift_up(const Decomposition<V>& D) {
    Decomposition<V> out = D;
    if (D.n <= 1) return out;
    int N = D.node_count();
    std::vector<std::unordered_map<int, int>> inc(N);  // partner -> edge index
    std::vector<u8> dead(out.bedges.size(), 0);
    for (size_t i = 0; i < out.bedges.size(); ++i) {
        inc[out.bedges[i].x][out.bedges[i].y] = static_cast<int>(i);
        inc[out.bedges[i].y][out.bedges[i].x] = static_cast<int>(i);
    }
    auto oriented_from = [&](int node, int idx) {
        const auto& e = out.bedges[idx];
        return e.x == node ? e.val : vt<V>::flip(e.val);
    };
    for (int z = D.n; z < N; ++z) {  // ascending id = descending label
        int a = out.kids[z][0], b = out.kids[z][1];
        for (auto& [w, ia] : inc[a]) {
            if (w == b) continue;
            auto itb = inc[b].find(w);
            if (itb == inc[b].end()) continue;
            if (dead[ia] || dead[itb->second]) continue;
            if (out.parent_label(w) > out.label(z)) continue;  // would cross a border
            V va = oriented_from(a, ia);
            V vb = oriented_from(b, itb->second);
            if (!(va == vb)) continue;
            dead[ia] = dead[itb->second] = 1;
            inc[w].erase(a);
            inc[w].erase(b);
            int ni = static_cast<int>(out.bedges.size());
            out.bedges.push_back({z, w, va});
            dead.push_back(0);
            inc[z][w] = ni;
            inc[w][z] = ni;
        }
    }
    std::vector<Bedge<V>> kept;
    kept.reserve(out.bedges.size());
    for (size_t i = 0; i < out.bedges.size(); ++i)
        if (!dead[i]) kept.push_back(out.bedges[i]);
    std::sort(kept.begin(), kept.end(), [](const Bedge<V>& l, const Bedge<V>& r) {
        return std::tie(l.x, l.y) < std::tie(r.x, r.y);
    });
    out.bedges = std::move(kept);
    return out;
}

// Contraction sequence of a decomposition: merge the children of the node
// labeled i at step i, using canonical ids throughout.
template <class V>
ContractionSeq twd_to_seq(const Decomposition<V>& D) {
    ContractionSeq seq;
    seq.n0 = D.n;
    for (int z = D.n; z < D.node_count(); ++z) {
        int a = D.kids[z][0], b = D.kids[z][1];
        if (a > b) std::swap(a, b);
        seq.steps.push_back({a, b, z});
    }
    return seq;
}

// Decomposition of a labeled graph from one of its contraction sequences:
// biclique edges attach exactly where black pairs disappear, including the
// identification pair, which lands the result in lifted canonical form.
template <class V>
Decomposition<V> seq_to_twd(const Mat& g, const ContractionSeq& seq, const Arith& ar) {
    check(g.rows == g.cols, "adjacency table must be square");
    check(seq.n0 == g.rows, "sequence and adjacency disagree on n");
    int n = seq.n0;
    Decomposition<V> D;
    D.n = n;
    D.p = ar.p;
    D.parent.assign(D.node_count(), -1);
    D.kids.assign(D.node_count(), {-1, -1});
    if (n == 1) return D;
    check(static_cast<int>(seq.steps.size()) == n - 1, "sequence must contract down to one part");
    SeqReplay<V> rp(n, ar);
    rp.load(g);
    for (auto [u, v, z] : seq.steps) {
        int got = rp.contract(u, v);
        check(got == z, "non-canonical fresh id in sequence");
        check(D.kids[z][0] == -1, "fresh id reused");
        D.kids[z] = {std::min(u, v), std::max(u, v)};
        D.parent[u] = D.parent[v] = z;
        for (auto& [c, w, val] : rp.disappeared) D.bedges.push_back({c, w, val});
    }
    std::sort(D.bedges.begin(), D.bedges.end(), [](const Bedge<V>& l, const Bedge<V>& r) {
        return std::tie(l.x, l.y) < std::tie(r.x, r.y);
    });
    return D;
}

// Dense adjacency of the graph a decomposition describes. Entry (u, v) is
// the value from u toward v. Rejects overlapping bicliques.
template <class V>
Mat materialize(const Decomposition<V>& D, const TreeInfo& info) {
    constexpr int kDefaultLimit = 4096;
    check(guardrails_off() || D.n <= kDefaultLimit,
          "materialize beyond " + std::to_string(kDefaultLimit) +
              " leaves needs TWINMUL_GUARDRAILS=off");
    Mat m(D.n, D.n);
    std::vector<u8> seen(static_cast<size_t>(D.n) * D.n, 0);
    for (const auto& e : D.bedges) {
        for (int i = info.leaf_lo[e.x]; i < info.leaf_hi[e.x]; ++i)
            for (int j = info.leaf_lo[e.y]; j < info.leaf_hi[e.y]; ++j) {
                int u = info.leaves_inorder[i], v = info.leaves_inorder[j];
                auto& s = seen[static_cast<size_t>(u) * D.n + v];
                check(!s, "overlapping biclique edges");
                s = 1;
                seen[static_cast<size_t>(v) * D.n + u] = 1;
                m.at(u, v) = vt<V>::fwd(e.val);
                m.at(v, u) = vt<V>::bwd(e.val);
            }
    }
    return m;
}

template <class V>
Mat materialize(const Decomposition<V>& D) {
    TreeInfo info = tree_info(D);
    return materialize(D, info);
}

// Point lookups without materializing. Each biclique edge is stored at the
// endpoint that dies first, so per-node lists stay short (at most width+1
// entries die per side per step).
template <class V>
struct DecIndex {
    const Decomposition<V>* D;
    TreeInfo info;
    std::vector<std::vector<std::pair<int, V>>> out;  // value oriented holder -> partner
    mutable std::vector<int> mark_u, mark_v;
    mutable int stamp = 0;

    explicit DecIndex(const Decomposition<V>& dec) : D(&dec), info(tree_info(dec)) {
        int N = dec.node_count();
        out.resize(N);
        mark_u.assign(N, 0);
        mark_v.assign(N, 0);
        for (const auto& e : dec.bedges) {
            int px = dec.parent_label(e.x), py = dec.parent_label(e.y);
            bool at_x = px > py || (px == py && e.x < e.y);
            if (at_x)
                out[e.x].push_back({e.y, e.val});
            else
                out[e.y].push_back({e.x, vt<V>::flip(e.val)});
        }
    }

    // Value from leaf u toward leaf v; zero when no biclique covers the pair.
    V query(int u, int v) const {
        check(u >= 0 && u < D->n && v >= 0 && v < D->n && u != v, "query needs two distinct leaves");
        ++stamp;
        for (int a = u; a != -1; a = D->parent[a]) mark_u[a] = stamp;
        for (int b = v; b != -1; b = D->parent[b]) mark_v[b] = stamp;
        int found = 0;
        V res = vt<V>::zero();
        for (int a = u; a != -1; a = D->parent[a])
            for (const auto& [w, val] : out[a])
                if (mark_v[w] == stamp) ++found, res = val;
        for (int b = v; b != -1; b = D->parent[b])
            for (const auto& [w, val] : out[b])
                if (mark_u[w] == stamp) ++found, res = vt<V>::flip(val);
        check(found <= 1, "overlapping biclique edges at queried pair");
        return res;
    }
};

}  // namespace twm
