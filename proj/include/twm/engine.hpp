#pragma once

#include <map>
#include <unordered_set>

#include "twm/decomp.hpp"

namespace twm {

template <class V>
using PairMap = std::unordered_map<u64, V>;

// Comparison on label values; pairs compare (forward, backward) lex.
template <class V>
int vcmp(const V& a, const V& b) {
    using T = vt<V>;
    if (T::fwd(a) != T::fwd(b)) return T::fwd(a) < T::fwd(b) ? -1 : 1;
    if (T::bwd(a) != T::bwd(b)) return T::bwd(a) < T::bwd(b) ? -1 : 1;
    return 0;
}

template <class V>
struct SigLess {
    bool operator()(const std::vector<V>& a, const std::vector<V>& b) const {
        size_t m = std::min(a.size(), b.size());
        for (size_t i = 0; i < m; ++i) {
            int c = vcmp(a[i], b[i]);
            if (c != 0) return c < 0;
        }
        return a.size() < b.size();
    }
};

// Add into a canonical pair map with value semantics: the stored value is
// oriented low id -> high id and zero entries are absent.
template <class V>
void pair_add(PairMap<V>& m, const Arith& ar, int a, int b, V val) {
    using T = vt<V>;
    if (T::is_zero(val)) return;
    if (a > b) {
        std::swap(a, b);
        val = T::flip(val);
    }
    u64 k = pair_key(a, b);
    auto it = m.find(k);
    if (it == m.end()) {
        m.emplace(k, val);
        return;
    }
    it->second = T::add(ar, it->second, val);
    if (T::is_zero(it->second)) m.erase(it);
}

template <class V>
V pair_get(const PairMap<V>& m, int a, int b) {
    auto it = m.find(pair_key(a, b));
    if (it == m.end()) return vt<V>::zero();
    return a <= b ? it->second : vt<V>::flip(it->second);
}

// Output of the refinement sweep: a second ranked tree over the same leaves
// (canonical ids) plus per-node closed two-step sums (alpha) and cross-node
// two-step sums (b1) attached where the paths were accounted.
template <class V>
struct RefinedCertificate {
    int n = 0;
    u32 p = 2;
    bool saturating = false;
    std::vector<int> tparent;
    std::vector<std::array<int, 2>> tkids;
    std::vector<V> alpha;
    PairMap<V> b1;
};

// One forward sweep over the input decomposition, maintaining for every
// alive part an ordered red list and a partition of its vertices into
// classes keyed by a signature vector (within-part degree sum first, then
// one coordinate per red partner). Class identity is vertex-set identity:
// classes that share a signature after a step merge into a fresh tree node.
// Two-step path sums are attached to pre-step class nodes as each biclique
// edge disappears.
template <class V>
class RefineEngine {
    using T = vt<V>;

  public:
    RefineEngine(const Decomposition<V>& dec, const Arith& arith, bool inject)
        : D(dec), ar(arith), inject_adjacency(inject) {}

    RefinedCertificate<V> run() {
        RefinedCertificate<V> out;
        out.n = D.n;
        out.p = ar.p;
        out.saturating = ar.saturating;
        int N = D.node_count();
        out.tparent.assign(N, -1);
        out.tkids.assign(N, {-1, -1});
        if (D.n == 1) {
            out.alpha.assign(1, T::zero());
            return out;
        }
        cert = &out;
        out.alpha.assign(N, T::zero());
        created = 0;

        TreeInfo info = tree_info(D);
        s_of.assign(N, 0);
        for (int id = 0; id < N; ++id) s_of[id] = ar.size_scalar(info.subtree_leaves[id]);

        step_edges.assign(D.n, {});
        for (size_t i = 0; i < D.bedges.size(); ++i)
            step_edges[D.bedge_step(D.bedges[i])].push_back(static_cast<int>(i));

        hosts.assign(N, {});
        for (int v = 0; v < D.n; ++v)
            hosts[v].cls.push_back({{T::zero()}, v});  // singleton class, empty red list

        for (int i = D.n - 1; i >= 1; --i) step(i);
        completion();
        require(created == D.n - 1, "refinement did not produce a full tree");
        cert = nullptr;
        return out;
    }

  private:
    struct Cls {
        std::vector<V> sig;  // sig[0] = within-part sum, then red coordinates
        int tnode;
    };
    struct Host {
        std::vector<int> red;  // ordered red partners (input-tree node ids)
        std::vector<Cls> cls;
    };

    const Decomposition<V>& D;
    Arith ar;
    bool inject_adjacency;
    RefinedCertificate<V>* cert = nullptr;
    std::vector<Fe> s_of;
    std::vector<std::vector<int>> step_edges;
    std::vector<Host> hosts;
    int created = 0;

    V oriented(const Bedge<V>& e, int from) const { return e.x == from ? e.val : T::flip(e.val); }

    static int pos_of(const std::vector<int>& list, int id) {
        for (size_t i = 0; i < list.size(); ++i)
            if (list[i] == id) return static_cast<int>(i);
        return -1;
    }

    int new_tnode(int a, int b) {
        int id = D.n + created++;
        require(id < D.node_count(), "too many refinement nodes");
        cert->tkids[id] = {a, b};
        cert->tparent[a] = id;
        cert->tparent[b] = id;
        return id;
    }

    // Left-leaning chain over members in their given order; returns the top.
    int comb(const std::vector<int>& members) {
        int cur = members[0];
        for (size_t i = 1; i < members.size(); ++i) cur = new_tnode(cur, members[i]);
        return cur;
    }

    void add_alpha(int tnode, V v) { cert->alpha[tnode] = T::add(ar, cert->alpha[tnode], v); }
    void add_b1(int a, int b, V v) { pair_add(cert->b1, ar, a, b, v); }

    // All two-step path sums that become unrecoverable once this step's
    // biclique edges disappear, attached to pre-step class nodes.
    void attach(const std::vector<const Bedge<V>*>& edges) {
        for (const Bedge<V>* e : edges) {
            // Closed paths through the far side, per endpoint side.
            for (int side = 0; side < 2; ++side) {
                int p_ = side == 0 ? e->x : e->y;
                int q_ = side == 0 ? e->y : e->x;
                V c = oriented(*e, p_);
                Fe closed = ar.mul(s_of[q_], ar.mul(T::fwd(c), T::bwd(c)));
                V cv = T::make(closed, closed);
                auto& pc = hosts[p_].cls;
                for (auto& a : pc) add_alpha(a.tnode, cv);
                for (size_t i = 0; i < pc.size(); ++i)
                    for (size_t j = i + 1; j < pc.size(); ++j) add_b1(pc[i].tnode, pc[j].tnode, cv);
            }
            // Paths with one leg inside an endpoint part: within-part sums.
            V c = oriented(*e, e->x);
            for (auto& a : hosts[e->x].cls)
                for (auto& b : hosts[e->y].cls) {
                    V pa = a.sig[0], pb = b.sig[0];
                    V val = T::make(ar.mul(T::fwd(c), ar.add(T::fwd(pa), T::bwd(pb))),
                                    ar.mul(T::bwd(c), ar.add(T::bwd(pa), T::fwd(pb))));
                    add_b1(a.tnode, b.tnode, val);
                }
            if (inject_adjacency) {
                // Distance mode: the disappearing adjacency itself counts.
                for (auto& a : hosts[e->x].cls)
                    for (auto& b : hosts[e->y].cls) add_b1(a.tnode, b.tnode, T::make(1, 1));
            }
            // Paths with one leg across a red pair of an endpoint part.
            red_leg(e->x, e->y, c);
            red_leg(e->y, e->x, T::flip(c));
        }
        // Paths through a part shared by two disappearing edges.
        for (size_t i = 0; i < edges.size(); ++i)
            for (size_t j = i + 1; j < edges.size(); ++j) {
                const Bedge<V>&e1 = *edges[i], &e2 = *edges[j];
                int shared = -1;
                if (e1.x == e2.x || e1.x == e2.y) shared = e1.x;
                else if (e1.y == e2.x || e1.y == e2.y) shared = e1.y;
                if (shared < 0) continue;
                int p_ = e1.x == shared ? e1.y : e1.x;
                int q_ = e2.x == shared ? e2.y : e2.x;
                V c1 = oriented(e1, shared), c2 = oriented(e2, shared);
                Fe f = ar.mul(s_of[shared], ar.mul(T::bwd(c1), T::fwd(c2)));
                Fe g = ar.mul(s_of[shared], ar.mul(T::bwd(c2), T::fwd(c1)));
                for (auto& a : hosts[p_].cls)
                    for (auto& b : hosts[q_].cls) add_b1(a.tnode, b.tnode, T::make(f, g));
            }
    }

    // Paths x -> u -> w with x in a part red to p_, u in p_, w in q_, where
    // the biclique edge (p_, q_) labeled c (oriented p_ -> q_) disappears.
    void red_leg(int p_, int q_, V c) {
        for (int x : hosts[p_].red) {
            int back = pos_of(hosts[x].red, p_);
            require(back >= 0, "red lists out of sync");
            for (auto& d : hosts[x].cls) {
                V coord = d.sig[1 + back];  // oriented x -> p_
                if (T::is_zero(coord)) continue;
                V val = T::make(ar.mul(T::fwd(coord), T::fwd(c)), ar.mul(T::bwd(c), T::bwd(coord)));
                if (T::is_zero(val)) continue;
                for (auto& b : hosts[q_].cls) add_b1(d.tnode, b.tnode, val);
            }
        }
    }

    void step(int frame) {
        int z = D.internal_of_label(frame);
        auto [u, v] = D.kids[z];

        std::vector<const Bedge<V>*> edges;
        const Bedge<V>* ident = nullptr;
        for (int idx : step_edges[frame]) {
            const Bedge<V>& e = D.bedges[idx];
            edges.push_back(&e);
            bool cx = D.parent[e.x] == z, cy = D.parent[e.y] == z;
            require(cx || cy, "biclique edge bucketed at a foreign step");
            if (cx && cy) ident = &e;
        }
        attach(edges);

        // Lookup of this step's edge toward a far partner, per child.
        auto edge_from = [&](int child, int w) -> const Bedge<V>* {
            for (const Bedge<V>* e : edges) {
                if (e->x == child && e->y == w) return e;
                if (e->y == child && e->x == w) return e;
            }
            return nullptr;
        };

        std::vector<int> affected;
        for (int x : hosts[u].red)
            if (x != v) affected.push_back(x);
        for (int x : hosts[v].red)
            if (x != u) affected.push_back(x);
        for (const Bedge<V>* e : edges) {
            if (e == ident) continue;
            int w = D.parent[e->x] == z ? e->y : e->x;
            affected.push_back(w);
        }
        std::sort(affected.begin(), affected.end());
        affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

        // New red list of the merged part.
        std::vector<int> zred;
        for (int w : affected) {
            bool ru = pos_of(hosts[u].red, w) >= 0, rv = pos_of(hosts[v].red, w) >= 0;
            if (ru || rv) {
                zred.push_back(w);
                continue;
            }
            const Bedge<V>*bu = edge_from(u, w), *bv = edge_from(v, w);
            require(bu || bv, "affected partner without relation");
            require(!(bu && bv && oriented(*bu, u) == oriented(*bv, v)),
                    "input decomposition is not in lifted form");
            zred.push_back(w);  // values differ, pair turns red
        }

        // Rebuild class signatures over the merged part.
        std::map<std::vector<V>, std::vector<std::pair<std::pair<int, std::vector<V>>, int>>, SigLess<V>>
            groups;  // new sig -> ((child tag, old sig), tnode)
        for (int side = 0; side < 2; ++side) {
            int src = side == 0 ? u : v;
            int oth = side == 0 ? v : u;
            for (auto& a : hosts[src].cls) {
                std::vector<V> sig;
                sig.reserve(1 + zred.size());
                V p0 = a.sig[0];
                int sib = pos_of(hosts[src].red, oth);
                if (ident)
                    p0 = T::add(ar, p0, T::scale(ar, s_of[oth], oriented(*ident, src)));
                else if (sib >= 0)
                    p0 = T::add(ar, p0, a.sig[1 + sib]);
                sig.push_back(p0);
                for (int w : zred) {
                    int at = pos_of(hosts[src].red, w);
                    if (at >= 0) {
                        sig.push_back(a.sig[1 + at]);
                    } else if (const Bedge<V>* e = edge_from(src, w)) {
                        sig.push_back(T::scale(ar, s_of[w], oriented(*e, src)));
                    } else {
                        sig.push_back(T::zero());
                    }
                }
                groups[std::move(sig)].push_back({{side, a.sig}, a.tnode});
            }
        }
        Host zh;
        zh.red = zred;
        for (auto& [sig, members] : groups) {
            std::sort(members.begin(), members.end(),
                      [](const auto& l, const auto& r) {
                          if (l.first.first != r.first.first) return l.first.first < r.first.first;
                          SigLess<V> less;
                          if (less(l.first.second, r.first.second)) return true;
                          if (less(r.first.second, l.first.second)) return false;
                          return l.second < r.second;
                      });
            std::vector<int> ids;
            ids.reserve(members.size());
            for (auto& m : members) ids.push_back(m.second);
            zh.cls.push_back({sig, comb(ids)});
        }
        hosts[u] = Host{};
        hosts[v] = Host{};

        // Update the far hosts' lists and signatures.
        for (int w : affected) {
            Host& hw = hosts[w];
            int pu = pos_of(hw.red, u), pv = pos_of(hw.red, v);
            const Bedge<V>*bu = edge_from(u, w), *bv = edge_from(v, w);
            require((pu < 0 || !bu) && (pv < 0 || !bv), "red pair with a biclique edge");
            if (pu >= 0 && pv >= 0) {
                int j1 = std::min(pu, pv), j2 = std::max(pu, pv);
                for (auto& b : hw.cls) {
                    b.sig[1 + j1] = T::add(ar, b.sig[1 + j1], b.sig[1 + j2]);
                    b.sig.erase(b.sig.begin() + 1 + j2);
                }
                hw.red[j1] = z;
                hw.red.erase(hw.red.begin() + j2);
                regroup(hw);
            } else if (pu >= 0 || pv >= 0) {
                int at = pu >= 0 ? pu : pv;
                const Bedge<V>* other = pu >= 0 ? bv : bu;
                int oth = pu >= 0 ? v : u;
                if (other) {
                    V delta = T::scale(ar, s_of[oth], oriented(*other, w));
                    for (auto& b : hw.cls) b.sig[1 + at] = T::add(ar, b.sig[1 + at], delta);
                }
                hw.red[at] = z;
            } else {
                V coord = T::zero();
                if (bu) coord = T::add(ar, coord, T::scale(ar, s_of[u], oriented(*bu, w)));
                if (bv) coord = T::add(ar, coord, T::scale(ar, s_of[v], oriented(*bv, w)));
                for (auto& b : hw.cls) b.sig.push_back(coord);
                hw.red.push_back(z);
            }
        }
        hosts[z] = std::move(zh);
    }

    // Re-partition a host's classes after a signature merge shrank the key.
    void regroup(Host& h) {
        std::map<std::vector<V>, std::vector<std::pair<std::vector<V>, int>>, SigLess<V>> groups;
        for (auto& c : h.cls) groups[c.sig].push_back({c.sig, c.tnode});
        if (groups.size() == h.cls.size()) return;
        std::vector<Cls> next;
        next.reserve(groups.size());
        for (auto& [sig, members] : groups) {
            std::sort(members.begin(), members.end(), [](const auto& l, const auto& r) {
                SigLess<V> less;
                if (less(l.first, r.first)) return true;
                if (less(r.first, l.first)) return false;
                return l.second < r.second;
            });
            std::vector<int> ids;
            ids.reserve(members.size());
            for (auto& m : members) ids.push_back(m.second);
            next.push_back({sig, comb(ids)});
        }
        h.cls = std::move(next);
    }

    // After the last step one host remains; merge its classes by ascending
    // signature into the final chain.
    void completion() {
        int base_root = D.root();
        Host& h = hosts[base_root];
        std::sort(h.cls.begin(), h.cls.end(), [](const Cls& l, const Cls& r) {
            SigLess<V> less;
            if (less(l.sig, r.sig)) return true;
            if (less(r.sig, l.sig)) return false;
            return l.tnode < r.tnode;
        });
        std::vector<int> ids;
        ids.reserve(h.cls.size());
        for (auto& c : h.cls) ids.push_back(c.tnode);
        comb(ids);
        hosts[base_root] = Host{};
    }
};

// Refinement plus path accounting. Lifts the input first; lifting does not
// change the graph, so the certificate is unaffected.
template <class V>
RefinedCertificate<V> build_partial_certificate(const Decomposition<V>& D, const Arith& ar,
                                                bool inject_adjacency = false) {
    Decomposition<V> lifted = lift_up(D);
    RefineEngine<V> eng(lifted, ar, inject_adjacency);
    return eng.run();
}

// The refined tree alone, as a bare decomposition (no biclique edges).
template <class V>
Decomposition<V> refine_tree(const Decomposition<V>& D, const Arith& ar) {
    RefinedCertificate<V> cert = build_partial_certificate(D, ar);
    Decomposition<V> out;
    out.n = cert.n;
    out.p = cert.p;
    out.parent = cert.tparent;
    out.kids = cert.tkids;
    return out;
}

// Symmetric adjacency store for live certificate entries; each side holds
// the value oriented owner -> partner and zero entries are erased.
template <class V>
V pair_get_adj(const std::vector<std::unordered_map<int, V>>& adj, int a, int b) {
    auto it = adj[a].find(b);
    return it == adj[a].end() ? vt<V>::zero() : it->second;
}

template <class V>
void pair_add_adj(std::vector<std::unordered_map<int, V>>& adj, const Arith& ar, int a, int b, V val) {
    using T = vt<V>;
    if (T::is_zero(val)) return;
    auto it = adj[a].find(b);
    if (it == adj[a].end()) {
        adj[a][b] = val;
        adj[b][a] = T::flip(val);
        return;
    }
    it->second = T::add(ar, it->second, val);
    if (T::is_zero(it->second)) {
        adj[a].erase(b);
        adj[b].erase(a);
    } else {
        adj[b][a] = T::flip(it->second);
    }
}

// Resolve state exposed to observers after each forward step.
template <class V>
struct ResolveView {
    const std::vector<V>& alpha;
    const std::vector<std::unordered_map<int, V>>& b1adj;  // value oriented owner -> partner
    const PairMap<V>& b2;
    const std::vector<std::unordered_set<int>>& reds;
};

template <class V>
struct ResolvedCertificate {
    int n = 0;
    u32 p = 2;
    bool saturating = false;
    std::vector<int> tparent;
    std::vector<std::array<int, 2>> tkids;
    std::vector<V> alpha;
    std::vector<u8> alpha_prime;                    // per internal-created node
    PairMap<V> b2;                                  // frozen markers, may carry zero
    std::vector<std::unordered_map<int, V>> b1adj;  // residual dangling entries
};

// Forward pass over the refined tree replaying its own contraction process:
// freezes pair values at the step where a pair of parts disappears and keeps
// a red list (non-uniform pairs) per alive node. Live entries between nodes
// that merge while red stay dangling for the downward pass.
template <class V, class StepCb>
ResolvedCertificate<V> resolve_certificate(const RefinedCertificate<V>& cert, const Arith& ar,
                                           StepCb&& step_cb) {
    using T = vt<V>;
    ResolvedCertificate<V> rc;
    rc.n = cert.n;
    rc.p = cert.p;
    rc.saturating = cert.saturating;
    rc.tparent = cert.tparent;
    rc.tkids = cert.tkids;
    rc.alpha = cert.alpha;
    int N = cert.n <= 1 ? 1 : 2 * cert.n - 1;
    rc.alpha_prime.assign(N, 0);
    rc.b1adj.assign(N, {});
    if (cert.n == 1) return rc;
    for (const auto& [k, val] : cert.b1) {
        int a = static_cast<int>(pair_key_hi(k)), b = static_cast<int>(pair_key_lo(k));
        // stored low -> high; pair_key packs (low << 32) | high
        rc.b1adj[a][b] = val;
        rc.b1adj[b][a] = T::flip(val);
    }
    std::vector<std::unordered_set<int>> reds(N);
    std::vector<u8> alive(N, 0);
    for (int i = 0; i < cert.n; ++i) alive[i] = 1;

    auto take = [&](int a, int b) {
        auto it = rc.b1adj[a].find(b);
        if (it == rc.b1adj[a].end()) return T::zero();
        V val = it->second;
        rc.b1adj[a].erase(it);
        rc.b1adj[b].erase(a);
        return val;
    };
    auto freeze = [&](int a, int b, V val) {
        if (a > b) {
            std::swap(a, b);
            val = T::flip(val);
        }
        require(rc.b2.emplace(pair_key(a, b), val).second, "pair frozen twice");
    };

    for (int z = cert.n; z < N; ++z) {
        auto [u, v] = rc.tkids[z];
        require(u >= 0 && alive[u] && alive[v], "refined tree out of order");
        bool pair_red = reds[u].count(v) > 0;
        rc.alpha_prime[z] = pair_red ? 1 : 0;
        if (!pair_red) freeze(u, v, take(u, v));

        std::vector<int> cand;
        for (int w : reds[u]) cand.push_back(w);
        for (int w : reds[v]) cand.push_back(w);
        for (auto& [w, val] : rc.b1adj[u]) cand.push_back(w);
        for (auto& [w, val] : rc.b1adj[v]) cand.push_back(w);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (int w : cand) {
            if (w == u || w == v || !alive[w]) continue;
            bool ru = reds[u].count(w) > 0, rv = reds[v].count(w) > 0;
            if (ru && rv) {
                // Entries under a doubly red pair dangle until pushed down.
                reds[z].insert(w);
                reds[w].insert(z);
            } else if (ru || rv) {
                int c = ru ? v : u;  // the uniform side freezes now
                freeze(c, w, take(c, w));
                reds[z].insert(w);
                reds[w].insert(z);
            } else {
                V a = pair_get_adj(rc.b1adj, u, w), b = pair_get_adj(rc.b1adj, v, w);
                if (a == b) {
                    take(u, w);
                    take(v, w);
                    // (z, w) may already hold an entry covering the same
                    // rectangle; the two contributions add
                    pair_add_adj(rc.b1adj, ar, z, w, a);
                } else {
                    freeze(u, w, take(u, w));
                    freeze(v, w, take(v, w));
                    reds[z].insert(w);
                    reds[w].insert(z);
                }
            }
        }
        for (int w : reds[u]) reds[w].erase(u);
        for (int w : reds[v]) reds[w].erase(v);
        reds[u].clear();
        reds[v].clear();
        alive[u] = alive[v] = 0;
        alive[z] = 1;
        step_cb(z, ResolveView<V>{rc.alpha, rc.b1adj, rc.b2, reds});
    }
    return rc;
}

template <class V>
ResolvedCertificate<V> resolve_certificate(const RefinedCertificate<V>& cert, const Arith& ar) {
    return resolve_certificate(cert, ar, [](int, const ResolveView<V>&) {});
}

template <class V>
struct SquareResult {
    Decomposition<V> dec;
    std::vector<V> diag;  // per-leaf closed two-step sums
};

// Downward pass: push alpha and dangling entries from each node to its
// children, absorbing them into frozen pair labels along the way. Frozen
// pairs with nonzero labels become the output biclique edges.
template <class V>
SquareResult<V> finalize_certificate(ResolvedCertificate<V> rc, const Arith& ar) {
    using T = vt<V>;
    SquareResult<V> out;
    out.dec.n = rc.n;
    out.dec.p = rc.p;
    out.dec.parent = rc.tparent;
    out.dec.kids = rc.tkids;
    if (rc.n == 1) {
        out.diag.assign(1, T::zero());
        return out;
    }
    int N = 2 * rc.n - 1;
    auto b2_bump = [&](int a, int b, V val) {
        if (a > b) {
            std::swap(a, b);
            val = T::flip(val);
        }
        auto it = rc.b2.find(pair_key(a, b));
        if (it == rc.b2.end()) return false;
        it->second = T::add(ar, it->second, val);
        return true;
    };
    for (int z = N - 1; z >= rc.n; --z) {
        auto [u, v] = rc.tkids[z];
        V az = rc.alpha[z];
        rc.alpha[u] = T::add(ar, rc.alpha[u], az);
        rc.alpha[v] = T::add(ar, rc.alpha[v], az);
        if (!b2_bump(u, v, az)) {
            if (!rc.alpha_prime[z])
                require(T::is_zero(az), "uniform pair without a frozen marker");
            else
                pair_add_adj(rc.b1adj, ar, u, v, az);
        }
        std::vector<std::pair<int, V>> push(rc.b1adj[z].begin(), rc.b1adj[z].end());
        std::sort(push.begin(), push.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        for (auto& [w, val] : push) {
            rc.b1adj[z].erase(w);
            rc.b1adj[w].erase(z);
            for (int c : {u, v})
                if (!b2_bump(c, w, val)) pair_add_adj(rc.b1adj, ar, c, w, val);
        }
        rc.alpha[z] = T::zero();
    }
    for (int a = 0; a < N; ++a)
        require(rc.b1adj[a].empty(), "certificate finished with live entries");
    for (const auto& [k, val] : rc.b2) {
        if (T::is_zero(val)) continue;
        out.dec.bedges.push_back(
            {static_cast<int>(pair_key_hi(k)), static_cast<int>(pair_key_lo(k)), val});
    }
    for (auto& e : out.dec.bedges)
        if (e.x > e.y) {
            std::swap(e.x, e.y);
            e.val = T::flip(e.val);
        }
    std::sort(out.dec.bedges.begin(), out.dec.bedges.end(),
              [](const Bedge<V>& l, const Bedge<V>& r) { return std::tie(l.x, l.y) < std::tie(r.x, r.y); });
    out.diag.assign(rc.alpha.begin(), rc.alpha.begin() + rc.n);
    return out;
}

// Full pipeline: validate, lift, refine with path accounting, resolve,
// finalize. The result decomposition describes the two-step path-sum graph
// of the input's graph; diag carries the closed sums.
template <class V>
SquareResult<V> modular_square_twd(const Decomposition<V>& D, const Arith& ar) {
    validate_twd(D, ar);
    RefinedCertificate<V> cert = build_partial_certificate(D, ar);
    ResolvedCertificate<V> rc = resolve_certificate(cert, ar);
    return finalize_certificate(std::move(rc), ar);
}

// Distance-at-most-2 variant over 0/1 labels: same pipeline on the
// saturating semiring with the original adjacency injected.
inline SquareResult<Fe> distance_square_twd(const Decomposition<Fe>& D) {
    check(D.p == 2, "distance square needs 0/1 labels");
    Arith ar = Arith::sat();
    validate_twd(D, ar);
    RefinedCertificate<Fe> cert = build_partial_certificate(D, ar, true);
    ResolvedCertificate<Fe> rc = resolve_certificate(cert, ar);
    return finalize_certificate(std::move(rc), ar);
}

// Pair sum a certificate assigns to two leaves: alpha over common ancestors
// plus edge values over ancestor pairs. edge_val(a, b) must return the
// current entry oriented a -> b (live and frozen combined).
template <class V, class EdgeFn>
V certificate_pair_sum(const std::vector<int>& tparent, const std::vector<V>& alpha, const Arith& ar,
                       EdgeFn&& edge_val, int u, int v) {
    using T = vt<V>;
    std::vector<int> au, av;
    for (int a = u; a != -1; a = tparent[a]) au.push_back(a);
    for (int b = v; b != -1; b = tparent[b]) av.push_back(b);
    std::unordered_set<int> in_u(au.begin(), au.end());
    V sum = T::zero();
    for (int b : av)
        if (in_u.count(b)) sum = T::add(ar, sum, alpha[b]);
    for (int a : au) {
        if (std::find(av.begin(), av.end(), a) != av.end()) continue;
        for (int b : av) {
            if (in_u.count(b)) continue;
            sum = T::add(ar, sum, edge_val(a, b));
        }
    }
    return sum;
}

}  // namespace twm
