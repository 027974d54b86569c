#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "twm/decomp.hpp"
#include "twm/rng.hpp"

namespace twm {

struct GenSpec {
    int n = 4;
    int d = 2;
    u32 p = 2;
    double density = 0.5;
    u64 seed = 1;
};

template <class V>
struct GenOut {
    Decomposition<V> dec;
    Mat graph;         // materialization, when within the dense guardrail
    bool graph_built = false;
    int width = 0;
};

inline Fe rand_nonzero(Rng& rng, const Arith& ar) {
    return static_cast<Fe>(1 + rng.below(ar.p - 1));
}

template <class V>
V rand_label(Rng& rng, const Arith& ar) {
    if constexpr (vt<V>::directed) {
        u64 v = 1 + rng.below(static_cast<u64>(ar.p) * ar.p - 1);
        return vt<V>::make(static_cast<Fe>(v / ar.p), static_cast<Fe>(v % ar.p));
    } else {
        return rand_nonzero(rng, ar);
    }
}

namespace detail {

// One bottom-up growth pass. Joins random active parts into a ranked tree and
// injects biclique edges only at the step where they disappear: the dying
// child keeps the edge, which turns the surviving pair red from here to the
// endpoints' join. Rejection keeps every red degree within the budget at
// insertion time; join unions can still overshoot, which the caller handles
// by validating and retrying.
template <class V>
Decomposition<V> grow(int n, const std::vector<int>& leaf_side, const Arith& ar, int d,
                      double density, bool block_mode, Rng& rng) {
    Decomposition<V> D;
    D.n = n;
    D.p = ar.p;
    D.parent.assign(D.node_count(), -1);
    D.kids.assign(D.node_count(), {-1, -1});
    if (n == 1) return D;

    int N = D.node_count();
    std::vector<int> side(N, 0), pos(N, -1);
    std::vector<std::vector<int>> pool(2);
    for (int v = 0; v < n; ++v) {
        side[v] = block_mode ? leaf_side[v] : 0;
        pos[v] = static_cast<int>(pool[side[v]].size());
        pool[side[v]].push_back(v);
    }
    auto pool_remove = [&](int id) {
        auto& P = pool[side[id]];
        int i = pos[id];
        P[i] = P.back();
        pos[P[i]] = i;
        P.pop_back();
    };
    auto pool_add = [&](int id, int s) {
        side[id] = s;
        pos[id] = static_cast<int>(pool[s].size());
        pool[s].push_back(id);
    };
    std::vector<std::set<int>> red(N);
    auto dense_chance = [&] { return rng.real() < density; };

    for (int z = n; z < N; ++z) {
        int u = -1, v = -1, s = 0;
        if (block_mode && pool[0].size() == 1 && pool[1].size() == 1) {
            u = pool[0][0];
            v = pool[1][0];
        } else {
            if (block_mode) {
                bool a2 = pool[0].size() >= 2, b2 = pool[1].size() >= 2;
                s = a2 && b2 ? static_cast<int>(rng.below(2)) : (b2 ? 1 : 0);
            }
            const auto& act = pool[s];
            // candidate pairs, scored by the size of the merged red set
            size_t best = static_cast<size_t>(-1);
            for (int t = 0; t < 64 && best != 0; ++t) {
                int a = act[rng.below(act.size())];
                int b = a;
                if (!block_mode && !red[a].empty() && rng.chance(1, 2)) {
                    auto it = red[a].begin();
                    std::advance(it, static_cast<long>(rng.below(red[a].size())));
                    b = *it;
                } else {
                    while (b == a) b = act[rng.below(act.size())];
                }
                std::set<int> uni = red[a];
                uni.insert(red[b].begin(), red[b].end());
                uni.erase(a);
                uni.erase(b);
                if (uni.size() < best) {
                    best = uni.size();
                    u = a;
                    v = b;
                }
            }
        }
        require(u >= 0 && v >= 0 && u != v, "generator failed to pick a join pair");

        std::set<int> zred = red[u];
        zred.insert(red[v].begin(), red[v].end());
        zred.erase(u);
        zred.erase(v);

        // identification edge: the pair itself goes black and dies here
        if (!block_mode && !red[u].count(v) && dense_chance())
            D.bedges.push_back({std::min(u, v), std::max(u, v), rand_label<V>(rng, ar)});

        // edges toward live partners; at most one per partner and step
        std::set<int> used;
        for (int t = 0; t < 3; ++t) {
            if (!dense_chance()) continue;
            int c = rng.chance(1, 2) ? u : v;
            int ws = block_mode ? 1 - side[c] : 0;
            const auto& others = pool[ws];
            if (others.empty()) continue;
            int w = others[rng.below(others.size())];
            if (w == u || w == v || used.count(w)) continue;
            if (red[c].count(w)) continue;  // pair already refuted, edge would overlap
            if (!zred.count(w)) {
                if (static_cast<int>(zred.size()) >= d) continue;
                if (static_cast<int>(red[w].size()) >= d) continue;
                zred.insert(w);
            }
            used.insert(w);
            D.bedges.push_back({c, w, rand_label<V>(rng, ar)});
        }

        for (int w : red[u]) red[w].erase(u);
        for (int w : red[v]) red[w].erase(v);
        for (int w : zred) red[w].insert(z);
        red[z] = std::move(zred);
        D.kids[z] = {std::min(u, v), std::max(u, v)};
        D.parent[u] = D.parent[v] = z;
        int zs = side[u];
        pool_remove(u);
        pool_remove(v);
        pool_add(z, zs);
    }
    std::sort(D.bedges.begin(), D.bedges.end(), [](const Bedge<V>& l, const Bedge<V>& r) {
        return std::tie(l.x, l.y) < std::tie(r.x, r.y);
    });
    return D;
}

template <class V>
GenOut<V> gen_with_retry(int n, const std::vector<int>& leaf_side, const Arith& ar, int d,
                         double density, bool block_mode, u64 seed) {
    for (int attempt = 0;; ++attempt) {
        require(attempt < 200, "generator failed to meet the width budget");
        double dens = density * (attempt < 20 ? 1.0 : std::max(0.0, 1.0 - 0.05 * (attempt - 20)));
        Rng rng(seed + 1000003ULL * static_cast<u64>(attempt));
        Decomposition<V> D = grow<V>(n, leaf_side, ar, d, dens, block_mode, rng);
        DecReport rep = validate_twd(D, ar);
        if (rep.width > d) continue;
        GenOut<V> out;
        out.dec = std::move(D);
        out.width = rep.width;
        if (n <= 4096 || guardrails_off()) {
            out.graph = materialize(out.dec);
            out.graph_built = true;
        }
        return out;
    }
}

}  // namespace detail

// Random decomposition with certified width at most d; deterministic in the
// seed. The companion graph is its materialization when small enough.
inline GenOut<Fe> random_twd(const GenSpec& spec) {
    check(spec.n >= 1 && spec.d >= 0, "need n >= 1 and d >= 0");
    Arith ar = Arith::mod(spec.p);
    std::vector<int> side(spec.n, 0);
    return detail::gen_with_retry<Fe>(spec.n, side, ar, spec.d, spec.density, false, spec.seed);
}

// Random decomposition of a directed two-block structure: leaves 0..rows-1
// form one block, rows..rows+inner-1 the other, and every biclique edge goes
// across, so the materialization is [[0, A], [B, 0]] for some A, B.
struct BlockSpec {
    int rows = 4;
    int inner = 4;
    int d = 2;
    u32 p = 2;
    double density = 0.5;
    u64 seed = 1;
};

inline GenOut<Dv> random_block_twd(const BlockSpec& spec) {
    check(spec.rows >= 1 && spec.inner >= 1 && spec.d >= 0, "bad block dimensions");
    Arith ar = Arith::mod(spec.p);
    int n = spec.rows + spec.inner;
    std::vector<int> side(n, 0);
    for (int v = spec.rows; v < n; ++v) side[v] = 1;
    return detail::gen_with_retry<Dv>(n, side, ar, spec.d, spec.density, true, spec.seed);
}

inline Mat random_mat(int rows, int cols, const Arith& ar, double density, Rng& rng) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (rng.real() < density) m.at(i, j) = rand_nonzero(rng, ar);
    return m;
}

struct GreedyResult {
    bool ok = false;
    ContractionSeq seq;
    int width = 0;
};

// Best-effort contraction heuristic: at each step pick, among red-adjacent
// and sampled pairs, the merge minimizing the worst red degree it creates.
// Aborts as soon as no candidate stays within the budget.
template <class V>
GreedyResult greedy_contract(const Mat& g, const Arith& ar, int budget, u64 seed, int pool = 64) {
    check(g.rows == g.cols, "adjacency table must be square");
    check(guardrails_off() || g.rows <= 1024,
          "greedy contraction beyond 1024 vertices needs TWINMUL_GUARDRAILS=off");
    int n = g.rows;
    GreedyResult res;
    res.seq.n0 = n;
    if (n <= 1) {
        res.ok = true;
        return res;
    }
    SeqReplay<V> rp(n, ar);
    rp.load(g);
    Rng rng(seed);
    std::vector<int> active(n);
    for (int i = 0; i < n; ++i) active[i] = i;

    auto score = [&](int a, int b) {
        int sz = 0, worst = 0;
        for (int w : active) {
            if (w == a || w == b) continue;
            bool ra = rp.is_red(a, w), rb = rp.is_red(b, w);
            bool now_red = ra || rb || !(rp.label(a, w) == rp.label(b, w));
            int wd = rp.red_deg[w] - (ra ? 1 : 0) - (rb ? 1 : 0) + (now_red ? 1 : 0);
            if (now_red) ++sz;
            if (wd > worst) worst = wd;
        }
        return std::max(sz, worst);
    };

    while (active.size() > 1) {
        size_t m = active.size();
        int bu = -1, bv = -1, bs = n + 1;
        if (m * (m - 1) / 2 <= static_cast<size_t>(pool)) {
            for (size_t i = 0; i < m; ++i)
                for (size_t j = i + 1; j < m; ++j) {
                    int s = score(active[i], active[j]);
                    if (s < bs) bs = s, bu = active[i], bv = active[j];
                }
        } else {
            int seen = 0;
            for (size_t i = 0; i < m && seen < 4 * pool; ++i)
                for (size_t j = i + 1; j < m && seen < 4 * pool; ++j) {
                    if (!rp.is_red(active[i], active[j])) continue;
                    ++seen;
                    int s = score(active[i], active[j]);
                    if (s < bs) bs = s, bu = active[i], bv = active[j];
                }
            for (int t = 0; t < pool; ++t) {
                int a = active[rng.below(m)], b = active[rng.below(m)];
                if (a == b) continue;
                int s = score(a, b);
                if (s < bs) bs = s, bu = std::min(a, b), bv = std::max(a, b);
            }
        }
        if (bu < 0 || bs > budget) {
            res.ok = false;
            res.width = std::max(rp.width, bs == n + 1 ? 0 : bs);
            res.seq.steps.clear();
            return res;
        }
        int z = rp.contract(bu, bv);
        res.seq.steps.push_back({std::min(bu, bv), std::max(bu, bv), z});
        active.erase(std::find(active.begin(), active.end(), bu));
        active.erase(std::find(active.begin(), active.end(), bv));
        active.push_back(z);
    }
    res.ok = rp.width <= budget;
    res.width = rp.width;
    return res;
}

}  // namespace twm
