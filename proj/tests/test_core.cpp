#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "twm/io.hpp"
#include "twm/rng.hpp"
#include "twm/trigraph.hpp"

using namespace twm;
using namespace twm::test;

TEST_CASE("prime recognition") {
    CHECK(is_prime_u32(2));
    CHECK(is_prime_u32(3));
    CHECK(is_prime_u32(5));
    CHECK(is_prime_u32(32749));
    CHECK_FALSE(is_prime_u32(0));
    CHECK_FALSE(is_prime_u32(1));
    CHECK_FALSE(is_prime_u32(4));
    CHECK_FALSE(is_prime_u32(32750));
}

TEST_CASE("field axioms over small primes") {
    for (u32 p : {2u, 3u, 5u, 7u}) {
        CAPTURE(p);
        Arith ar = Arith::mod(p);
        for (u32 a = 0; a < p; ++a)
            for (u32 b = 0; b < p; ++b) {
                Fe fa = static_cast<Fe>(a), fb = static_cast<Fe>(b);
                CHECK(ar.add(fa, fb) == ar.add(fb, fa));
                CHECK(ar.mul(fa, fb) == ar.mul(fb, fa));
                CHECK(ar.add(fa, fb) == (a + b) % p);
                CHECK(ar.mul(fa, fb) == (a * b) % p);
                CHECK(ar.sub(ar.add(fa, fb), fb) == fa);
                for (u32 c = 0; c < p; ++c) {
                    Fe fc = static_cast<Fe>(c);
                    CHECK(ar.add(ar.add(fa, fb), fc) == ar.add(fa, ar.add(fb, fc)));
                    CHECK(ar.mul(ar.mul(fa, fb), fc) == ar.mul(fa, ar.mul(fb, fc)));
                    CHECK(ar.mul(fa, ar.add(fb, fc)) == ar.add(ar.mul(fa, fb), ar.mul(fa, fc)));
                }
                CHECK(ar.add(fa, ar.neg(fa)) == 0);
                if (a != 0) CHECK(ar.mul(fa, ar.inv(fa)) == 1);
            }
        CHECK(ar.reduce(p * 7 + 3) == 3 % p);
        CHECK(ar.size_scalar(p) == 0);
        CHECK(ar.valid_residue(p - 1));
        CHECK_FALSE(ar.valid_residue(p));
    }
}

TEST_CASE("saturating interpretation is or-and") {
    Arith ar = Arith::sat();
    CHECK(ar.add(0, 0) == 0);
    CHECK(ar.add(0, 1) == 1);
    CHECK(ar.add(1, 1) == 1);
    CHECK(ar.mul(1, 1) == 1);
    CHECK(ar.mul(1, 0) == 0);
    CHECK(ar.size_scalar(17) == 1);
    CHECK(ar.size_scalar(0) == 0);
    CHECK_THROWS_AS(ar.inv(1), validation_error);
}

TEST_CASE("modulus guardrails") {
    CHECK_THROWS_AS(Arith::mod(4), validation_error);
    CHECK_THROWS_AS(Arith::mod(32771), validation_error);  // prime, but above the cap
    CHECK_THROWS_AS(Arith::mod(0), validation_error);
}

TEST_CASE("rank computation") {
    Arith f2 = Arith::mod(2), f3 = Arith::mod(3);
    CHECK(rank_fp({1, 0, 0, 0, 1, 0, 0, 0, 1}, 3, 3, f2) == 3);
    CHECK(rank_fp({1, 1, 1, 1}, 2, 2, f2) == 1);
    CHECK(rank_fp({0, 1, 1, 1}, 2, 2, f2) == 2);
    CHECK(rank_fp({0, 0, 0, 0, 0, 0}, 2, 3, f3) == 0);
    // rows 2 and 3 are multiples of row 1 modulo 3
    CHECK(rank_fp({1, 2, 2, 1, 1, 2}, 3, 2, f3) == 1);
    CHECK(rank_fp({1, 2, 0, 1}, 2, 2, f3) == 2);
}

TEST_CASE("directed label traits") {
    Arith ar = Arith::mod(5);
    Dv v = vt<Dv>::make(2, 3);
    CHECK(vt<Dv>::fwd(v) == 2);
    CHECK(vt<Dv>::bwd(v) == 3);
    CHECK(vt<Dv>::flip(v) == vt<Dv>::make(3, 2));
    CHECK(vt<Dv>::is_zero(vt<Dv>::zero()));
    CHECK_FALSE(vt<Dv>::is_zero(v));
    CHECK(vt<Dv>::add(ar, v, vt<Dv>::make(4, 4)) == vt<Dv>::make(1, 2));
    CHECK(vt<Dv>::scale(ar, 2, v) == vt<Dv>::make(4, 1));
    CHECK(vt<Fe>::flip(static_cast<Fe>(3)) == 3);
}

TEST_CASE("generator determinism and ranges") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        u64 x = a.next(), y = b.next(), z = c.next();
        all_equal = all_equal && x == y;
        any_diff = any_diff || x != z;
    }
    CHECK(all_equal);
    CHECK(any_diff);
    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(10) < 10);
        i64 v = r.range(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        double d = r.real();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
    CHECK(Rng(5).below(1) == 0);
}

TEST_CASE("naive product") {
    Arith f3 = Arith::mod(3);
    Mat A = mat_from(2, 3, {1, 2, 0, 0, 1, 2});
    Mat B = mat_from(3, 2, {1, 1, 2, 0, 1, 2});
    // hand-checked: [[1+4, 1], [2+2, 4]] mod 3
    CHECK(multiply_naive(A, B, f3) == mat_from(2, 2, {2, 1, 1, 1}));
    CHECK_THROWS_AS(multiply_naive(A, A, f3), validation_error);
}

TEST_CASE("two-step path sums of the squaring showcase") {
    Arith f2 = Arith::mod(2);
    Mat g = square_demo_graph();
    Mat sq = modular_square_naive(g, f2);
    CHECK(equal_off_diagonal(sq, square_demo_squared()));
    // closed sums are vertex degrees modulo 2
    int degs[7] = {5, 3, 3, 2, 3, 2, 2};
    for (int v = 0; v < 7; ++v) CHECK(sq.at(v, v) == degs[v] % 2);
}

TEST_CASE("distance-two graph of a path") {
    Mat p4 = graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    Mat want = graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 2}, {1, 3}});
    CHECK(distance_square_naive(p4) == want);
}

TEST_CASE("padding") {
    Mat m = mat_from(2, 2, {1, 2, 3, 4});
    Mat p = pad_to(m, 3, 4);
    CHECK(p.rows == 3);
    CHECK(p.cols == 4);
    CHECK(p.at(1, 1) == 4);
    CHECK(p.at(2, 3) == 0);
    CHECK_THROWS_AS(pad_to(m, 1, 5), validation_error);
}

TEST_CASE("contraction replay on the width-two showcase") {
    Arith f2 = Arith::mod(2);
    Mat g = width2_graph();
    SeqReplay<Fe> rp(7, f2);
    rp.load(g);
    int z = rp.contract(4, 5);
    CHECK(z == 7);
    // merged part: red toward 0 and 3, black toward 1, 2, 6
    std::set<int> reds;
    for (int w = 0; w < 7; ++w)
        if (rp.is_red(7, w)) reds.insert(w);
    CHECK(reds == std::set<int>{0, 3});
    for (int w : {1, 2, 6}) CHECK(rp.label(7, w) == 1);
    CHECK(rp.width == 2);
    // black pairs that ceased at this step, attachment sites for bicliques
    REQUIRE(rp.disappeared.size() == 2);
    CHECK(rp.disappeared[0] == std::tuple<int, int, Fe>{5, 0, 1});
    CHECK(rp.disappeared[1] == std::tuple<int, int, Fe>{4, 3, 1});

    CHECK(replay_width<Fe>(width2_graph(), width2_seq(), f2) == 2);
}

TEST_CASE("replay rejects out-of-range and dead parts") {
    Arith f2 = Arith::mod(2);
    SeqReplay<Fe> rp(3, f2);
    rp.load(graph_from_edges(3, {{0, 1}}));
    rp.contract(0, 1);
    CHECK_THROWS_AS(rp.contract(0, 2), validation_error);  // 0 is gone
    CHECK_THROWS_AS(rp.contract(3, 3), validation_error);
}

TEST_CASE("decomposition file round-trip") {
    auto D = six_vertex_dec();
    std::string path = tmp_path("roundtrip.twd");
    write_dec(path, D);
    auto back = read_dec<Fe>(path);
    CHECK(back.n == D.n);
    CHECK(back.p == D.p);
    CHECK(back.kids == D.kids);
    CHECK(back.parent == D.parent);
    REQUIRE(back.bedges.size() == D.bedges.size());
    for (size_t i = 0; i < D.bedges.size(); ++i) {
        CHECK(back.bedges[i].x == D.bedges[i].x);
        CHECK(back.bedges[i].y == D.bedges[i].y);
        CHECK(back.bedges[i].val == D.bedges[i].val);
    }
}

TEST_CASE("directed decomposition file round-trip") {
    Decomposition<Dv> D;
    D.n = 2;
    D.p = 5;
    D.parent = {2, 2, -1};
    D.kids = {{-1, -1}, {-1, -1}, {0, 1}};
    D.bedges = {{0, 1, vt<Dv>::make(2, 3)}};
    std::string path = tmp_path("roundtrip.twdd");
    write_dec(path, D);
    auto back = read_dec<Dv>(path);
    CHECK(back.bedges.size() == 1);
    CHECK(back.bedges[0].val == vt<Dv>::make(2, 3));
    // the plain reader refuses the directed header
    CHECK_THROWS_AS(read_dec<Fe>(path), validation_error);
}

TEST_CASE("sequence file round-trip with arbitrary fresh ids") {
    std::string path = tmp_path("seq.ctr");
    atomic_write(path, "CTR 1\nn 3\n0 1 99\n2 99 100\n");
    auto seq = read_ctr(path);
    CHECK(seq.n0 == 3);
    REQUIRE(seq.steps.size() == 2);
    CHECK(seq.steps[0] == std::array<int, 3>{0, 1, 3});
    CHECK(seq.steps[1] == std::array<int, 3>{2, 3, 4});
    write_ctr(path, seq);
    auto again = read_ctr(path);
    CHECK(again.steps == seq.steps);
}

TEST_CASE("matrix file round-trip") {
    std::string path = tmp_path("mat.fqm");
    Mat m = mat_from(2, 3, {0, 1, 2, 4, 0, 3});
    write_fqm(path, m, 5);
    auto [back, p] = read_fqm(path);
    CHECK(p == 5);
    CHECK(back == m);
}

TEST_CASE("script file round-trip") {
    std::string path = tmp_path("ops.msc");
    MinorScript s;
    s.ops = {{MinorOp::DelRow, 1, 0, 0},
             {MinorOp::DelCol, 0, 0, 0},
             {MinorOp::SumRow, 2, 1, 1},
             {MinorOp::SumCol, 0, 2, 1}};
    write_msc(path, s);
    CHECK(read_msc(path) == s);
}

TEST_CASE("unknown format versions are rejected") {
    std::string path = tmp_path("bad.twd");
    atomic_write(path, "TWD 2\np 2\nn 1\n");
    CHECK_THROWS_AS(read_dec<Fe>(path), validation_error);
    atomic_write(path, "CTR 9\nn 1\n");
    CHECK_THROWS_AS(read_ctr(path), validation_error);
    atomic_write(path, "FQM 2\np 2\nrows 1\ncols 1\n0\n");
    CHECK_THROWS_AS(read_fqm(path), validation_error);
    atomic_write(path, "MSC 2\n");
    CHECK_THROWS_AS(read_msc(path), validation_error);
}

TEST_CASE("malformed decomposition files are rejected") {
    std::string path = tmp_path("bad2.twd");
    // label out of range
    atomic_write(path, "TWD 1\np 2\nn 2\nnode 2 2 0 1\n");
    CHECK_THROWS_AS(read_dec<Fe>(path), validation_error);
    // biclique label out of range
    atomic_write(path, "TWD 1\np 2\nn 2\nnode 2 1 0 1\nbedge 0 1 2\n");
    CHECK_THROWS_AS(read_dec<Fe>(path), validation_error);
    // missing internal node
    atomic_write(path, "TWD 1\np 2\nn 3\nnode 3 2 0 1\n");
    CHECK_THROWS_AS(read_dec<Fe>(path), validation_error);
    // non-prime modulus
    atomic_write(path, "TWD 1\np 6\nn 1\n");
    CHECK_THROWS_AS(read_dec<Fe>(path), validation_error);
}
