#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <set>

#include "helpers.hpp"
#include "twm/decomp.hpp"
#include "twm/gen.hpp"

using namespace twm;
using namespace twm::test;

namespace {

template <class V>
bool bedges_equal(const std::vector<Bedge<V>>& a, const std::vector<Bedge<V>>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].x != b[i].x || a[i].y != b[i].y || !(a[i].val == b[i].val)) return false;
    return true;
}

// Left comb over n leaves, no biclique edges: joins (0,1), then each later
// internal node absorbs the next leaf.
Decomposition<Fe> make_comb(int n) {
    Decomposition<Fe> D;
    D.n = n;
    D.p = 2;
    D.parent.assign(D.node_count(), -1);
    D.kids.assign(D.node_count(), {-1, -1});
    if (n <= 1) return D;
    D.kids[n] = {0, 1};
    D.parent[0] = D.parent[1] = n;
    for (int k = 1; k < n - 1; ++k) {
        int z = n + k;
        D.kids[z] = {k + 1, z - 1};
        D.parent[k + 1] = D.parent[z - 1] = z;
    }
    return D;
}

}  // namespace

TEST_CASE("canonical ids, labels and steps") {
    auto D = six_vertex_dec();
    CHECK(D.n == 6);
    CHECK(D.node_count() == 11);
    CHECK(D.root() == 10);
    CHECK(D.label(0) == 6);
    CHECK(D.label(5) == 6);
    CHECK(D.label(6) == 5);
    CHECK(D.label(10) == 1);
    for (int l = 1; l <= 5; ++l) CHECK(D.label(D.internal_of_label(l)) == l);
    CHECK(D.parent_label(D.root()) == 0);
    CHECK(D.parent_label(0) == 5);
    CHECK(D.parent_label(3) == 3);
    // pair of a bedge ceases when the later-dying endpoint merges
    CHECK(D.bedge_step(D.bedges[0]) == 5);  // (1,2)
    CHECK(D.bedge_step(D.bedges[2]) == 3);  // (3,7)
}

TEST_CASE("validation accepts the hand-built example") {
    auto D = six_vertex_dec();
    Arith f2 = Arith::mod(2);
    CHECK_NOTHROW(structure_check(D, f2));
    auto rep = validate_twd(D, f2);
    CHECK(rep.width == 3);
    CHECK(rep.bedge_count == 4);
    CHECK(materialize(D) == six_vertex_graph());

    ContractionSeq seq = twd_to_seq(D);
    std::vector<std::array<int, 3>> want{{0, 1, 6}, {4, 5, 7}, {2, 3, 8}, {6, 8, 9}, {7, 9, 10}};
    CHECK(seq.steps == want);
    CHECK(replay_width<Fe>(six_vertex_graph(), seq, f2) == 3);
}

TEST_CASE("malformed decompositions are rejected") {
    Arith f2 = Arith::mod(2);
    Arith f3 = Arith::mod(3);

    SUBCASE("border crossing") {
        auto D = six_vertex_dec();
        D.bedges.push_back({1, 8, 1});  // 1 dies at step 5, node 8 born at step 3
        CHECK_THROWS_AS(structure_check(D, f2), validation_error);
    }
    SUBCASE("edge to an ancestor") {
        auto D = six_vertex_dec();
        D.bedges.push_back({0, 6, 1});
        CHECK_NOTHROW(structure_check(D, f2));  // borders alone cannot see this
        CHECK_THROWS_AS(validate_twd(D, f2), validation_error);
    }
    SUBCASE("duplicate edge") {
        auto D = six_vertex_dec();
        D.bedges.push_back({1, 2, 1});
        CHECK_THROWS_AS(validate_twd(D, f2), validation_error);
    }
    SUBCASE("overlapping rectangles") {
        auto D = six_vertex_dec();
        D.bedges.push_back({6, 2, 1});  // {0,1} x {2} overlaps the (1,2) edge
        CHECK_NOTHROW(structure_check(D, f2));
        CHECK_THROWS_AS(validate_twd(D, f2), validation_error);
        CHECK_THROWS_AS(materialize(D), validation_error);
    }
    SUBCASE("zero label") {
        auto D = six_vertex_dec();
        D.bedges.push_back({0, 7, 0});
        CHECK_THROWS_AS(structure_check(D, f2), validation_error);
    }
    SUBCASE("label outside the field") {
        auto D = six_vertex_dec();
        D.p = 3;
        D.bedges.push_back({0, 7, 5});
        CHECK_THROWS_AS(structure_check(D, f3), validation_error);
    }
    SUBCASE("wrong arithmetic context") {
        auto D = six_vertex_dec();
        CHECK_THROWS_AS(structure_check(D, f3), validation_error);
    }
    SUBCASE("broken parent link") {
        auto D = six_vertex_dec();
        D.parent[2] = 9;
        CHECK_THROWS_AS(structure_check(D, f2), validation_error);
    }
}

TEST_CASE("sequence to decomposition and back") {
    Arith f2 = Arith::mod(2);
    Mat g = width2_graph();
    ContractionSeq seq = width2_seq();
    auto D = seq_to_twd<Fe>(g, seq, f2);
    auto rep = validate_twd(D, f2);
    CHECK(rep.width == 2);
    CHECK(materialize(D) == g);
    CHECK(twd_to_seq(D).steps == seq.steps);
    // attaching at disappearance already gives the merged-sibling form
    CHECK(lift_up(D).bedges.size() == D.bedges.size());

    SUBCASE("non-canonical fresh ids rejected") {
        auto bad = seq;
        bad.steps[0][2] = 9;
        CHECK_THROWS_AS(seq_to_twd<Fe>(g, bad, f2), validation_error);
    }
    SUBCASE("short sequences rejected") {
        auto bad = seq;
        bad.steps.pop_back();
        CHECK_THROWS_AS(seq_to_twd<Fe>(g, bad, f2), validation_error);
    }
}

TEST_CASE("drawn square-demo decomposition is valid") {
    Arith f2 = Arith::mod(2);
    auto D = square_demo_dec();
    auto rep = validate_twd(D, f2);
    CHECK(rep.width == 2);
    CHECK(rep.bedge_count == 5);
    CHECK(materialize(D) == square_demo_graph());
}

TEST_CASE("sibling edges merge upward") {
    // n = 4, joins (0,1) -> 4, (2,3) -> 5, (4,5) -> 6
    Decomposition<Fe> D;
    D.n = 4;
    D.p = 3;
    D.parent = {4, 4, 5, 5, 6, 6, -1};
    D.kids = {{-1, -1}, {-1, -1}, {-1, -1}, {-1, -1}, {0, 1}, {2, 3}, {4, 5}};
    Arith f3 = Arith::mod(3);

    SUBCASE("equal labels lift to the parent") {
        D.bedges = {{0, 2, 2}, {1, 2, 2}};
        validate_twd(D, f3);
        auto L = lift_up(D);
        REQUIRE(L.bedges.size() == 1);
        CHECK(L.bedges[0].x == 4);
        CHECK(L.bedges[0].y == 2);
        CHECK(L.bedges[0].val == 2);
        CHECK(materialize(L) == materialize(D));
        CHECK(validate_twd(L, f3).width == validate_twd(D, f3).width);
    }
    SUBCASE("unequal labels stay put") {
        D.bedges = {{0, 2, 1}, {1, 2, 2}};
        validate_twd(D, f3);
        auto L = lift_up(D);
        CHECK(bedges_equal(L.bedges, D.bedges));
    }
}

TEST_CASE("merges that would cross a border are skipped") {
    // n = 5, joins (2,3) -> 5, (0,1) -> 6, (5,4) -> 7, (6,7) -> 8; the common
    // partner 2 is already gone when 0 and 1 join.
    Decomposition<Fe> D;
    D.n = 5;
    D.p = 2;
    D.parent = {6, 6, 5, 5, 7, 7, 8, 8, -1};
    D.kids = {{-1, -1}, {-1, -1}, {-1, -1}, {-1, -1}, {-1, -1},
              {2, 3},   {0, 1},   {4, 5},   {6, 7}};
    D.bedges = {{0, 2, 1}, {1, 2, 1}};
    Arith f2 = Arith::mod(2);
    CHECK(validate_twd(D, f2).width == 2);
    auto L = lift_up(D);
    CHECK(bedges_equal(L.bedges, D.bedges));
}

TEST_CASE("lifting on random instances keeps the described graph") {
    for (u64 seed : {3u, 11u, 27u}) {
        for (u32 p : {2u, 5u}) {
            GenSpec spec;
            spec.n = 48;
            spec.d = 3;
            spec.p = p;
            spec.density = 0.6;
            spec.seed = seed;
            auto gen = random_twd(spec);
            Arith ar = Arith::mod(p);
            auto L = lift_up(gen.dec);
            CHECK(L.bedges.size() <= gen.dec.bedges.size());
            CHECK(materialize(L) == gen.graph);
            CHECK(validate_twd(L, ar).width == gen.width);
            auto L2 = lift_up(L);
            CHECK(bedges_equal(L2.bedges, L.bedges));
        }
    }
}

TEST_CASE("red partner lists per frame") {
    auto rows = red_lists(six_vertex_dec(), Arith::mod(2));
    REQUIRE(rows.size() == 5);
    using Row = std::vector<std::pair<int, std::vector<int>>>;
    CHECK(rows[0] == Row{{2, {6}}, {3, {6}}, {6, {2, 3}}});
    CHECK(rows[1] == Row{{2, {6}}, {3, {6}}, {6, {2, 3, 7}}, {7, {6}}});
    CHECK(rows[2] == Row{{6, {7, 8}}, {7, {6, 8}}, {8, {6, 7}}});
    CHECK(rows[3] == Row{{7, {9}}, {9, {7}}});
    CHECK(rows[4] == Row{});
    // symmetry and the width bound hold frame by frame
    size_t longest = 0;
    for (const auto& row : rows) {
        std::set<std::pair<int, int>> pairs;
        for (const auto& [a, ws] : row) {
            longest = std::max(longest, ws.size());
            for (int w : ws) pairs.insert({std::min(a, w), std::max(a, w)});
        }
        for (const auto& [a, ws] : row)
            for (int w : ws) CHECK(pairs.count({std::min(a, w), std::max(a, w)}) == 1);
    }
    CHECK(longest == 3);
}

TEST_CASE("tree traversal info") {
    GenSpec spec;
    spec.n = 33;
    spec.d = 2;
    spec.seed = 7;
    auto gen = random_twd(spec);
    const auto& D = gen.dec;
    TreeInfo info = tree_info(D);
    std::set<int> leaves(info.leaves_inorder.begin(), info.leaves_inorder.end());
    CHECK(static_cast<int>(leaves.size()) == D.n);
    CHECK(*leaves.begin() == 0);
    CHECK(*leaves.rbegin() == D.n - 1);
    CHECK(info.subtree_leaves[D.root()] == static_cast<u64>(D.n));
    for (int id = 0; id < D.node_count(); ++id) {
        CHECK(info.anc_or_self(D.root(), id));
        if (!D.is_leaf(id)) {
            auto [a, b] = D.kids[id];
            CHECK(info.subtree_leaves[id] == info.subtree_leaves[a] + info.subtree_leaves[b]);
            CHECK(info.leaf_lo[id] == std::min(info.leaf_lo[a], info.leaf_lo[b]));
            CHECK(info.leaf_hi[id] == std::max(info.leaf_hi[a], info.leaf_hi[b]));
            CHECK(info.anc_or_self(id, a));
            CHECK(!info.anc_or_self(a, id));
        }
    }
}

TEST_CASE("point lookups match the dense table") {
    GenSpec spec;
    spec.n = 40;
    spec.d = 3;
    spec.p = 3;
    spec.density = 0.7;
    spec.seed = 19;
    auto gen = random_twd(spec);
    REQUIRE(gen.graph_built);
    DecIndex<Fe> idx(gen.dec);
    for (int u = 0; u < spec.n; ++u)
        for (int v = 0; v < spec.n; ++v) {
            if (u == v) continue;
            CHECK(idx.query(u, v) == gen.graph.at(u, v));
        }
    CHECK_THROWS_AS(idx.query(2, 2), validation_error);
    CHECK_THROWS_AS(idx.query(-1, 0), validation_error);

    BlockSpec bs;
    bs.rows = 9;
    bs.inner = 7;
    bs.d = 3;
    bs.p = 5;
    bs.seed = 23;
    auto blk = random_block_twd(bs);
    REQUIRE(blk.graph_built);
    DecIndex<Dv> bidx(blk.dec);
    int n = bs.rows + bs.inner;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            Dv got = bidx.query(u, v);
            CHECK(vt<Dv>::fwd(got) == blk.graph.at(u, v));
            CHECK(vt<Dv>::bwd(got) == blk.graph.at(v, u));
        }
}

TEST_CASE("dense materialization guardrail") {
    auto D = make_comb(4097);
    CHECK_NOTHROW(structure_check(D, Arith::mod(2)));
    CHECK_THROWS_AS(materialize(D), validation_error);
    ::setenv("TWINMUL_GUARDRAILS", "off", 1);
    Mat m = materialize(D);
    ::unsetenv("TWINMUL_GUARDRAILS");
    CHECK(m.rows == 4097);
    CHECK(m == Mat(4097, 4097));
}
