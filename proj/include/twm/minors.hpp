#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "twm/io.hpp"
#include "twm/rng.hpp"

namespace twm {

// ---------------------------------------------------------------------------
// scripts

inline Mat apply_op(const Mat& M, const MinorOp& op, const Arith& ar) {
    bool on_rows = op.kind == MinorOp::DelRow || op.kind == MinorOp::SumRow;
    bool is_del = op.kind == MinorOp::DelRow || op.kind == MinorOp::DelCol;
    int lines = on_rows ? M.rows : M.cols;
    if (is_del)
        check(op.index >= 0 && op.index < lines, "deletion index out of range");
    else {
        check(op.index >= 0 && op.index + 1 < lines, "weighted sum needs two consecutive lines");
        check(ar.valid_residue(op.alpha) && ar.valid_residue(op.beta), "weight out of range");
    }
    Mat out(M.rows - (on_rows ? 1 : 0), M.cols - (on_rows ? 0 : 1));
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) {
            int sr = r, sc = c;
            if (on_rows && r >= op.index) sr = r + 1;
            if (!on_rows && c >= op.index) sc = c + 1;
            if (is_del)
                out.at(r, c) = M.at(sr, sc);
            else if (on_rows && r == op.index)
                out.at(r, c) = ar.add(ar.mul(op.alpha, M.at(r, c)), ar.mul(op.beta, M.at(r + 1, c)));
            else if (!on_rows && c == op.index)
                out.at(r, c) = ar.add(ar.mul(op.alpha, M.at(r, c)), ar.mul(op.beta, M.at(r, c + 1)));
            else
                out.at(r, c) = M.at(sr, sc);
        }
    return out;
}

inline Mat apply_script(const Mat& M, const MinorScript& S, const Arith& ar) {
    Mat cur = M;
    for (const auto& op : S.ops) cur = apply_op(cur, op, ar);
    return cur;
}

// Deletions-first normal form: a deletion right after a weighted sum moves
// before it (with shifted index); a deletion of the summed line removes both
// lines and drops the sum. Row and column operations commute, so each axis
// normalizes independently and deletions of both axes come out first.
inline MinorScript normalize_script(const MinorScript& S) {
    auto bubble = [](std::vector<MinorOp> ops) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t t = 1; t < ops.size(); ++t) {
                bool del_now = ops[t].kind == MinorOp::DelRow || ops[t].kind == MinorOp::DelCol;
                bool sum_before = ops[t - 1].kind == MinorOp::SumRow || ops[t - 1].kind == MinorOp::SumCol;
                if (!del_now || !sum_before) continue;
                MinorOp sum = ops[t - 1], del = ops[t];
                if (del.index < sum.index) {
                    --sum.index;
                    ops[t - 1] = del;
                    ops[t] = sum;
                } else if (del.index == sum.index) {
                    MinorOp d2 = del;
                    ops[t - 1] = del;
                    ops[t] = d2;
                } else {
                    ++del.index;
                    ops[t - 1] = del;
                    ops[t] = sum;
                }
                changed = true;
                break;
            }
        }
        return ops;
    };
    std::vector<MinorOp> rows_ops, cols_ops;
    for (const auto& op : S.ops)
        (op.kind == MinorOp::DelRow || op.kind == MinorOp::SumRow ? rows_ops : cols_ops).push_back(op);
    rows_ops = bubble(std::move(rows_ops));
    cols_ops = bubble(std::move(cols_ops));
    MinorScript out;
    for (const auto& op : rows_ops)
        if (op.kind == MinorOp::DelRow) out.ops.push_back(op);
    for (const auto& op : cols_ops)
        if (op.kind == MinorOp::DelCol) out.ops.push_back(op);
    for (const auto& op : rows_ops)
        if (op.kind == MinorOp::SumRow) out.ops.push_back(op);
    for (const auto& op : cols_ops)
        if (op.kind == MinorOp::SumCol) out.ops.push_back(op);
    return out;
}

inline bool deletions_first(const MinorScript& S) {
    bool seen_sum = false;
    for (const auto& op : S.ops) {
        bool is_del = op.kind == MinorOp::DelRow || op.kind == MinorOp::DelCol;
        if (!is_del) seen_sum = true;
        else if (seen_sum) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// divisions

// Interval partition boundaries: 0 = b[0] < b[1] < ... < b[k] = total.
struct Division {
    std::vector<int> row_bounds, col_bounds;

    int row_parts() const { return static_cast<int>(row_bounds.size()) - 1; }
    int col_parts() const { return static_cast<int>(col_bounds.size()) - 1; }
};

inline void check_bounds(const std::vector<int>& b, int total, const char* what) {
    check(b.size() >= 2 && b.front() == 0 && b.back() == total, std::string(what) + " must run from 0 to the line count");
    for (size_t i = 1; i < b.size(); ++i)
        check(b[i - 1] < b[i], std::string(what) + " must be strictly increasing");
}

inline void check_division(const Division& D, const Mat& M) {
    check_bounds(D.row_bounds, M.rows, "row boundaries");
    check_bounds(D.col_bounds, M.cols, "column boundaries");
}

inline Division regular_division(int total, int parts) {
    check(parts >= 1 && total % parts == 0, "regular division must split lines evenly");
    Division D;
    for (int i = 0; i <= parts; ++i) D.row_bounds.push_back(i * (total / parts));
    D.col_bounds = D.row_bounds;
    return D;
}

// Cell-sum minor: every cell of the division collapses to the weighted sum
// of its entries. All-one weights give the plain parity-minor form.
inline Mat minor_by_division(const Mat& M, const Division& D, const std::vector<Fe>& wrow,
                             const std::vector<Fe>& wcol, const Arith& ar) {
    check_division(D, M);
    check(static_cast<int>(wrow.size()) == M.rows && static_cast<int>(wcol.size()) == M.cols,
          "weighting must cover every row and column");
    for (Fe w : wrow) check(ar.valid_residue(w), "row weight out of range");
    for (Fe w : wcol) check(ar.valid_residue(w), "column weight out of range");
    Mat N(D.row_parts(), D.col_parts());
    for (int i = 0; i < N.rows; ++i)
        for (int j = 0; j < N.cols; ++j) {
            Fe s = 0;
            for (int r = D.row_bounds[i]; r < D.row_bounds[i + 1]; ++r)
                for (int c = D.col_bounds[j]; c < D.col_bounds[j + 1]; ++c)
                    s = ar.add(s, ar.mul(ar.mul(wrow[r], wcol[c]), M.at(r, c)));
            N.at(i, j) = s;
        }
    return N;
}

inline Mat minor_by_division(const Mat& M, const Division& D, const Arith& ar) {
    return minor_by_division(M, D, std::vector<Fe>(M.rows, 1), std::vector<Fe>(M.cols, 1), ar);
}

// ---------------------------------------------------------------------------
// tiny-scale containment oracle

// Decides whether N arises from M by deletions and (weighted) consecutive
// sums. parity restricts to plain sums, linear allows arbitrary weights.
// Exhaustive at desk scale only.
enum class MinorMode { parity, linear };

bool is_minor_bruteforce(const Mat& N, const Mat& M, MinorMode mode, const Arith& ar);

// ---------------------------------------------------------------------------
// division statistics

struct DivisionStats {
    int grid_number = 0;
    int mixed_number = 0;
    int grid_rank = 0;
};

DivisionStats division_stats(const Mat& M, const Arith& ar, bool rank_variant = false);

// Density threshold above which a k-wide all-nonzero division is forced:
// ceil((8/3) (k+1)^2 2^(4k)).
inline u64 mt_bound(int k) {
    check(k >= 1, "threshold needs k >= 1");
    check(k <= 13, "threshold exceeds the 64-bit range for k > 13");
    unsigned __int128 a = 8;
    a *= static_cast<unsigned>(k + 1) * static_cast<unsigned>(k + 1);
    a <<= 4 * k;
    return static_cast<u64>((a + 2) / 3);
}

inline std::string mt_bound_str(int k) {
    check(k >= 1, "threshold needs k >= 1");
    check(k <= 28, "threshold exceeds the 128-bit range for k > 28");
    unsigned __int128 a = 8;
    a *= static_cast<unsigned>(k + 1) * static_cast<unsigned>(k + 1);
    a <<= 4 * k;
    a = (a + 2) / 3;
    std::string s;
    while (a > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(a % 10)));
        a /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s.empty() ? "0" : s;
}

// ---------------------------------------------------------------------------
// rank Latin divisions

// Positions of the full-rank cells of a rank-k Latin d-division: one per
// refined row part, one per refined column part, one per coarse cell.
struct LatinLayout {
    int k = 0, d = 0;
    std::vector<int> rank_row;  // refined col part -> its full-rank refined row part
    std::vector<int> rank_col;  // refined row part -> its full-rank refined col part
};

bool latin_layout(const Mat& M, const Division& D, const Division& R, int k, const Arith& ar,
                  LatinLayout* out);

inline bool validate_rank_latin(const Mat& M, const Division& D, const Division& R, int k,
                                const Arith& ar) {
    return latin_layout(M, D, R, k, ar, nullptr);
}

MinorScript extract_from_latin(const Mat& M, const Mat& N, const Arith& ar);

Mat latin_host(int k, int d, const Arith& ar, Rng& rng);

}  // namespace twm
