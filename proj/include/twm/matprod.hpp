#pragma once

#include <string>
#include <utility>

#include "twm/engine.hpp"
#include "twm/gen.hpp"

namespace twm {

// Directed adjacency of [[0, A], [B, 0]] after zero-padding the outer
// dimensions square: leaves 0..half-1 index rows of A (= columns of B),
// half..half+inner-1 the shared inner dimension. Entry (i, half+j) holds
// A[i, j], entry (half+j, i) holds B[j, i].
struct BlockEncoding {
    Mat adj;
    int half = 0;
    int inner = 0;
    int a_rows = 0;
    int b_cols = 0;
};

inline BlockEncoding encode_block(const Mat& A, const Mat& B, const Arith& ar) {
    check(A.cols == B.rows, "inner dimensions differ");
    for (Fe e : A.a) check(ar.valid_residue(e), "entry of the left factor out of range");
    for (Fe e : B.a) check(ar.valid_residue(e), "entry of the right factor out of range");
    int half = std::max(A.rows, B.cols), inner = A.cols;
    BlockEncoding enc{Mat(half + inner, half + inner), half, inner, A.rows, B.cols};
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < inner; ++j) enc.adj.at(i, half + j) = A.at(i, j);
    for (int j = 0; j < inner; ++j)
        for (int i = 0; i < B.cols; ++i) enc.adj.at(half + j, i) = B.at(j, i);
    return enc;
}

// Dense sub-block of the graph a decomposition describes; diagonal entries
// inside the ranges read as zero. Small ranges go through point lookups,
// large ones through one materialization.
template <class V>
Mat read_block(const Decomposition<V>& D, std::pair<int, int> row_range,
               std::pair<int, int> col_range) {
    auto [r0, r1] = row_range;
    auto [c0, c1] = col_range;
    check(0 <= r0 && r0 <= r1 && r1 <= D.n && 0 <= c0 && c0 <= c1 && c1 <= D.n,
          "block range outside the leaf universe");
    Mat out(r1 - r0, c1 - c0);
    if (out.rows == 0 || out.cols == 0) return out;
    size_t cells = static_cast<size_t>(out.rows) * out.cols;
    size_t full = static_cast<size_t>(D.n) * D.n;
    if (cells * 16 < full) {
        DecIndex<V> idx(D);
        for (int u = r0; u < r1; ++u)
            for (int v = c0; v < c1; ++v)
                if (u != v) out.at(u - r0, v - c0) = vt<V>::fwd(idx.query(u, v));
        return out;
    }
    Mat m = materialize(D);
    for (int u = r0; u < r1; ++u)
        for (int v = c0; v < c1; ++v) out.at(u - r0, v - c0) = m.at(u, v);
    return out;
}

struct MultiplyOptions {
    int budget = 8;    // width budget for the greedy route
    u64 seed = 1;
    bool dense_fallback = false;
    const Decomposition<Dv>* block_dec = nullptr;  // decomposition of the block structure
};

struct MultiplyResult {
    Mat product;       // A.rows x B.cols
    Mat reverse;       // the inner-by-inner product the lower block carries
    SquareResult<Dv> squared;
    bool have_squared = false;
    int width = 0;
    std::string method;  // provided | greedy | naive
};

// Product through one squaring of the block structure: the squared
// decomposition's upper block materializes AB (diagonal from the closed
// sums), the lower block BA.
inline MultiplyResult multiply_twd(const Mat& A, const Mat& B, const Arith& ar,
                                   const MultiplyOptions& opt = {}) {
    BlockEncoding enc = encode_block(A, B, ar);
    int n = enc.adj.rows;
    MultiplyResult res;
    Decomposition<Dv> dec;
    if (opt.block_dec != nullptr) {
        const Decomposition<Dv>& given = *opt.block_dec;
        check(given.n == n, "provided decomposition has " + std::to_string(given.n) +
                                " leaves, block structure needs " + std::to_string(n));
        check(given.p == ar.p, "provided decomposition is over a different modulus");
        res.width = validate_twd(given, ar).width;
        check(materialize(given) == enc.adj,
              "provided decomposition does not describe the block structure of the factors");
        dec = given;
        res.method = "provided";
    } else {
        GreedyResult gr = greedy_contract<Dv>(enc.adj, ar, opt.budget, opt.seed);
        if (gr.ok) {
            dec = seq_to_twd<Dv>(enc.adj, gr.seq, ar);
            res.width = gr.width;
            res.method = "greedy";
        } else if (opt.dense_fallback) {
            res.product = multiply_naive(A, B, ar);
            // same inner-by-inner block the squaring route reads off
            res.reverse = multiply_naive(pad_to(B, enc.inner, enc.half),
                                         pad_to(A, enc.half, enc.inner), ar);
            res.method = "naive";
            return res;
        } else {
            throw validation_error("no decomposition within width budget " +
                                   std::to_string(opt.budget) + " (greedy reached " +
                                   std::to_string(gr.width) + "); rerun with a dense fallback");
        }
    }
    res.squared = modular_square_twd(dec, ar);
    res.have_squared = true;

    const SquareResult<Dv>& sq = res.squared;
    res.product = Mat(enc.a_rows, enc.b_cols);
    res.reverse = Mat(enc.inner, enc.inner);
    size_t full = static_cast<size_t>(n) * n;
    size_t wanted = static_cast<size_t>(enc.a_rows) * enc.b_cols +
                    static_cast<size_t>(enc.inner) * enc.inner;
    if (wanted * 16 < full || (n > 4096 && !guardrails_off())) {
        DecIndex<Dv> idx(sq.dec);
        auto entry = [&](int u, int v) { return u == v ? vt<Dv>::fwd(sq.diag[u]) : vt<Dv>::fwd(idx.query(u, v)); };
        for (int i = 0; i < enc.a_rows; ++i)
            for (int j = 0; j < enc.b_cols; ++j) res.product.at(i, j) = entry(i, j);
        for (int i = 0; i < enc.inner; ++i)
            for (int j = 0; j < enc.inner; ++j)
                res.reverse.at(i, j) = entry(enc.half + i, enc.half + j);
    } else {
        Mat m = materialize(sq.dec);
        for (int u = 0; u < n; ++u) m.at(u, u) = vt<Dv>::fwd(sq.diag[u]);
        for (int i = 0; i < enc.a_rows; ++i)
            for (int j = 0; j < enc.b_cols; ++j) res.product.at(i, j) = m.at(i, j);
        for (int i = 0; i < enc.inner; ++i)
            for (int j = 0; j < enc.inner; ++j)
                res.reverse.at(i, j) = m.at(enc.half + i, enc.half + j);
    }
    return res;
}

}  // namespace twm
