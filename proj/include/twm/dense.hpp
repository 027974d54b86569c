#pragma once

#include <vector>

#include "twm/value.hpp"

namespace twm {

// Dense residue matrix, row-major. Doubles as an adjacency table: a labeled
// graph on n vertices is an n x n Mat with zero diagonal, entry (u, v) being
// the value from u toward v (symmetric when the graph is undirected).
struct Mat {
    int rows = 0, cols = 0;
    std::vector<Fe> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}

    Fe& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    Fe at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    friend bool operator==(const Mat&, const Mat&) = default;
};

inline Mat multiply_naive(const Mat& A, const Mat& B, const Arith& ar) {
    check(A.cols == B.rows, "inner dimensions differ");
    Mat C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            Fe aik = A.at(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < B.cols; ++j)
                C.at(i, j) = ar.add(C.at(i, j), ar.mul(aik, B.at(k, j)));
        }
    return C;
}

// Two-step path sums over an adjacency table: out(u, v) = sum over w not in
// {u, v} of a(u, w) a(w, v). The diagonal holds the closed two-step sums
// lambda(u, u); graph-level comparisons ignore it, matrix products need it.
inline Mat modular_square_naive(const Mat& g, const Arith& ar) {
    check(g.rows == g.cols, "adjacency table must be square");
    int n = g.rows;
    Mat out(n, n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            Fe s = 0;
            for (int w = 0; w < n; ++w) {
                if (w == u || w == v) continue;
                s = ar.add(s, ar.mul(g.at(u, w), g.at(w, v)));
            }
            out.at(u, v) = s;
        }
    return out;
}

// Distance-at-most-2 graph of a 0/1 adjacency table, loop-free.
inline Mat distance_square_naive(const Mat& g) {
    check(g.rows == g.cols, "adjacency table must be square");
    int n = g.rows;
    Mat out(n, n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            bool reach = g.at(u, v) != 0;
            for (int w = 0; w < n && !reach; ++w)
                reach = w != u && w != v && g.at(u, w) != 0 && g.at(w, v) != 0;
            out.at(u, v) = reach ? 1 : 0;
        }
    return out;
}

// Zero-pad to r x c (top-left corner keeps the original entries).
inline Mat pad_to(const Mat& m, int r, int c) {
    check(r >= m.rows && c >= m.cols, "padding cannot shrink");
    Mat out(r, c);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) = m.at(i, j);
    return out;
}

inline bool equal_off_diagonal(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) return false;
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j)
            if (i != j && x.at(i, j) != y.at(i, j)) return false;
    return true;
}

}  // namespace twm
