#include "twm/minors.hpp"

#include <functional>
#include <set>

namespace twm {

namespace {

// Distinct row slices and column slices of a cell, plus a nonzero flag.
struct CellFacts {
    bool nonzero = false;
    int distinct_rows = 0;
    int distinct_cols = 0;
    int rank = 0;
};

CellFacts cell_facts(const Mat& M, int ra, int rb, int ca, int cb, const Arith& ar, bool with_rank) {
    CellFacts f;
    std::vector<std::vector<Fe>> rows, cols;
    for (int r = ra; r < rb; ++r) {
        std::vector<Fe> slice;
        for (int c = ca; c < cb; ++c) {
            Fe v = M.at(r, c);
            if (v != 0) f.nonzero = true;
            slice.push_back(v);
        }
        rows.push_back(std::move(slice));
    }
    for (int c = ca; c < cb; ++c) {
        std::vector<Fe> slice;
        for (int r = ra; r < rb; ++r) slice.push_back(M.at(r, c));
        cols.push_back(std::move(slice));
    }
    std::sort(rows.begin(), rows.end());
    std::sort(cols.begin(), cols.end());
    f.distinct_rows = static_cast<int>(std::unique(rows.begin(), rows.end()) - rows.begin());
    f.distinct_cols = static_cast<int>(std::unique(cols.begin(), cols.end()) - cols.begin());
    if (with_rank) {
        std::vector<Fe> flat;
        for (int r = ra; r < rb; ++r)
            for (int c = ca; c < cb; ++c) flat.push_back(M.at(r, c));
        f.rank = rank_fp(flat, rb - ra, cb - ca, ar);
    }
    return f;
}

}  // namespace

DivisionStats division_stats(const Mat& M, const Arith& ar, bool rank_variant) {
    check(guardrails_off() || (M.rows <= 12 && M.cols <= 12),
          "division statistics beyond 12x12 need TWINMUL_GUARDRAILS=off");
    if (rank_variant) check(!ar.saturating, "rank statistics need field labels");
    DivisionStats st;
    int R = M.rows, C = M.cols;
    bool any = false;
    for (Fe v : M.a)
        if (v != 0) any = true;
    if (!any || R == 0 || C == 0) return st;

    // facts for every row interval x column interval
    int ric = (R + 1) * (R + 1), cic = (C + 1) * (C + 1);
    std::vector<CellFacts> facts(static_cast<size_t>(ric) * cic);
    auto at = [&](int ra, int rb, int ca, int cb) -> CellFacts& {
        return facts[static_cast<size_t>(ra * (R + 1) + rb) * cic + ca * (C + 1) + cb];
    };
    for (int ra = 0; ra < R; ++ra)
        for (int rb = ra + 1; rb <= R; ++rb)
            for (int ca = 0; ca < C; ++ca)
                for (int cb = ca + 1; cb <= C; ++cb)
                    at(ra, rb, ca, cb) = cell_facts(M, ra, rb, ca, cb, ar, rank_variant);

    // search k-divisions: row boundary choices, then a column interval DP
    auto exists_division = [&](int k, const std::function<bool(const CellFacts&)>& good) -> bool {
        if (k > R || k > C) return false;
        std::vector<int> rb(k + 1);
        rb[0] = 0;
        rb[k] = R;
        std::function<bool(int)> rec = [&](int t) -> bool {
            if (t == k) {
                std::vector<std::vector<char>> feas(k + 1, std::vector<char>(C + 1, 0));
                feas[0][0] = 1;
                for (int done = 0; done < k; ++done)
                    for (int c = 0; c < C; ++c) {
                        if (!feas[done][c]) continue;
                        for (int c2 = c + 1; c2 <= C; ++c2) {
                            bool all = true;
                            for (int i = 0; i < k && all; ++i) all = good(at(rb[i], rb[i + 1], c, c2));
                            if (all) feas[done + 1][c2] = 1;
                        }
                    }
                return feas[k][C] != 0;
            }
            for (int b = rb[t - 1] + 1; b <= R - (k - t); ++b) {
                rb[t] = b;
                if (rec(t + 1)) return true;
            }
            return false;
        };
        return rec(1);
    };

    for (int k = std::min(R, C); k >= 1; --k)
        if (exists_division(k, [](const CellFacts& f) { return f.nonzero; })) {
            st.grid_number = k;
            break;
        }
    for (int k = std::min(R, C); k >= 1; --k)
        if (exists_division(k, [](const CellFacts& f) { return f.distinct_rows >= 2 && f.distinct_cols >= 2; })) {
            st.mixed_number = k;
            break;
        }
    for (int k = std::min(R, C); k >= 1; --k) {
        auto good = [&](const CellFacts& f) {
            return rank_variant ? f.rank >= k : (f.distinct_rows >= k || f.distinct_cols >= k);
        };
        if (exists_division(k, good)) {
            st.grid_rank = k;
            break;
        }
    }
    return st;
}

namespace {

// Column-side decision: delete or group the columns of P into consecutive
// nonempty parts whose sums reproduce the columns of N, in order.
bool cols_reachable(const Mat& P, const Mat& N, const Arith& ar) {
    int n = P.rows, m = N.cols;
    // state: parts closed so far + sum of the open part (empty vector: none open)
    std::set<std::pair<int, std::vector<Fe>>> states;
    states.emplace(0, std::vector<Fe>{});
    for (int c = 0; c < P.cols; ++c) {
        std::vector<Fe> col(n);
        for (int r = 0; r < n; ++r) col[r] = P.at(r, c);
        auto next = states;  // keeping a state = deleting this column
        for (const auto& [done, open] : states) {
            if (done == m && !open.empty()) continue;
            if (done == m) continue;  // all parts closed: only deletions remain
            std::vector<Fe> sum = open.empty() ? col : open;
            if (!open.empty())
                for (int r = 0; r < n; ++r) sum[r] = ar.add(sum[r], col[r]);
            bool matches = true;
            for (int r = 0; r < n && matches; ++r) matches = sum[r] == N.at(r, done);
            if (matches) next.emplace(done + 1, std::vector<Fe>{});
            next.emplace(done, std::move(sum));
        }
        states = std::move(next);
    }
    return states.count({m, std::vector<Fe>{}}) != 0;
}

bool parity_minor_search(const Mat& N, const Mat& M, const Arith& ar) {
    int n = N.rows;
    Mat P(n, M.cols);
    // each source row: deleted, appended to the open part, or starts the next
    std::function<bool(int, int, bool)> rec = [&](int row, int started, bool fresh) -> bool {
        if (row == M.rows) return started == n && cols_reachable(P, N, ar);
        if (n - started > M.rows - row) return false;
        if (rec(row + 1, started, false)) return true;  // delete the row
        if (started > 0) {  // extend the part in progress
            std::vector<Fe> keep(M.cols);
            for (int c = 0; c < M.cols; ++c) {
                keep[c] = P.at(started - 1, c);
                P.at(started - 1, c) = ar.add(keep[c], M.at(row, c));
            }
            bool ok = rec(row + 1, started, false);
            for (int c = 0; c < M.cols; ++c) P.at(started - 1, c) = keep[c];
            if (ok) return true;
        }
        if (started < n) {  // open the next part with this row
            for (int c = 0; c < M.cols; ++c) P.at(started, c) = M.at(row, c);
            if (rec(row + 1, started + 1, true)) return true;
        }
        (void)fresh;
        return false;
    };
    return rec(0, 0, true);
}

// Weighted form: a full division of M plus row and column weights. Row
// weights are solved per part by linear algebra once column weights are fixed.
bool linear_minor_search(const Mat& N, const Mat& M, const Arith& ar) {
    int n = N.rows, m = N.cols;
    std::vector<int> rbounds(n + 1), cbounds(m + 1);
    rbounds[0] = 0;
    rbounds[n] = M.rows;
    cbounds[0] = 0;
    cbounds[m] = M.cols;
    std::vector<Fe> wc(M.cols);

    auto row_parts_solvable = [&]() -> bool {
        // T[r][j]: row r summed against column weights inside column part j
        std::vector<std::vector<Fe>> T(M.rows, std::vector<Fe>(m, 0));
        for (int r = 0; r < M.rows; ++r)
            for (int j = 0; j < m; ++j) {
                Fe s = 0;
                for (int c = cbounds[j]; c < cbounds[j + 1]; ++c)
                    s = ar.add(s, ar.mul(wc[c], M.at(r, c)));
                T[r][j] = s;
            }
        for (int i = 0; i < n; ++i) {
            int t = rbounds[i + 1] - rbounds[i];
            // solvable iff appending the target column keeps the rank
            std::vector<Fe> plain, aug;
            for (int j = 0; j < m; ++j) {
                for (int r = 0; r < t; ++r) {
                    plain.push_back(T[rbounds[i] + r][j]);
                    aug.push_back(T[rbounds[i] + r][j]);
                }
                aug.push_back(N.at(i, j));
            }
            if (rank_fp(plain, m, t, ar) != rank_fp(aug, m, t + 1, ar)) return false;
        }
        return true;
    };

    std::function<bool(int)> colw = [&](int c) -> bool {
        if (c == M.cols) return row_parts_solvable();
        for (u32 w = 0; w < ar.p; ++w) {
            wc[c] = static_cast<Fe>(w);
            if (colw(c + 1)) return true;
        }
        return false;
    };
    std::function<bool(int)> cdiv = [&](int t) -> bool {
        if (t == m) return colw(0);
        for (int b = cbounds[t - 1] + 1; b <= M.cols - (m - t); ++b) {
            cbounds[t] = b;
            if (cdiv(t + 1)) return true;
        }
        return false;
    };
    std::function<bool(int)> rdiv = [&](int t) -> bool {
        if (t == n) return cdiv(1);
        for (int b = rbounds[t - 1] + 1; b <= M.rows - (n - t); ++b) {
            rbounds[t] = b;
            if (rdiv(t + 1)) return true;
        }
        return false;
    };
    return rdiv(1);
}

}  // namespace

bool is_minor_bruteforce(const Mat& N, const Mat& M, MinorMode mode, const Arith& ar) {
    check(!ar.saturating, "minor containment needs field labels");
    int cap = ar.p == 2 ? 8 : 6;
    check(guardrails_off() || (M.rows <= cap && M.cols <= cap),
          "exhaustive containment beyond desk scale needs TWINMUL_GUARDRAILS=off");
    if (N.rows > M.rows || N.cols > M.cols) return false;
    if (N.rows == 0 || N.cols == 0) return true;  // delete everything else
    if (mode == MinorMode::parity) return parity_minor_search(N, M, ar);
    return linear_minor_search(N, M, ar);
}

bool latin_layout(const Mat& M, const Division& D, const Division& R, int k, const Arith& ar,
                  LatinLayout* out) {
    check(!ar.saturating, "rank Latin divisions need field labels");
    check(k >= 2, "rank Latin divisions need k >= 2");
    check(M.rows == M.cols, "rank Latin host must be square");
    check_division(D, M);
    check_division(R, M);
    int d = D.row_parts();
    check(D.col_parts() == d, "coarse division must be square");
    check(R.row_parts() == d * d && R.col_parts() == d * d, "refinement must have d^2 parts per side");
    check(M.rows == k * d * d, "host side must be k d^2");
    Division dreg = regular_division(M.rows, d), rreg = regular_division(M.rows, d * d);
    check(D.row_bounds == dreg.row_bounds && D.col_bounds == dreg.col_bounds, "coarse division must be regular");
    check(R.row_bounds == rreg.row_bounds && R.col_bounds == rreg.col_bounds, "refinement must be regular");

    int parts = d * d;
    std::vector<int> row_hits(parts, 0), col_hits(parts, 0), cell_hits(d * d, 0);
    std::vector<int> rank_row(parts, -1), rank_col(parts, -1);
    for (int i = 0; i < parts; ++i)
        for (int j = 0; j < parts; ++j) {
            bool constant = true;
            Fe first = M.at(i * k, j * k);
            std::vector<Fe> flat;
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) {
                    Fe v = M.at(i * k + r, j * k + c);
                    if (v != first) constant = false;
                    flat.push_back(v);
                }
            if (constant) continue;
            if (rank_fp(flat, k, k, ar) != k) return false;
            ++row_hits[i];
            ++col_hits[j];
            ++cell_hits[(i / d) * d + (j / d)];
            rank_col[i] = j;
            rank_row[j] = i;
        }
    for (int i = 0; i < parts; ++i)
        if (row_hits[i] != 1 || col_hits[i] != 1) return false;
    for (int c = 0; c < d * d; ++c)
        if (cell_hits[c] != 1) return false;
    if (out) {
        out->k = k;
        out->d = d;
        out->rank_row = rank_row;
        out->rank_col = rank_col;
    }
    return true;
}

MinorScript extract_from_latin(const Mat& M, const Mat& N, const Arith& ar) {
    check(!ar.saturating, "extraction needs field labels");
    check(N.rows == N.cols && N.rows >= 1, "target must be square");
    int d = N.rows;
    check(M.rows == M.cols && M.rows == 2 * d * d, "host side must be 2 d^2");
    for (Fe v : N.a) check(ar.valid_residue(v), "target entry out of range");
    Division D = regular_division(M.rows, d), R = regular_division(M.rows, d * d);
    LatinLayout L;
    check(latin_layout(M, D, R, 2, ar, &L), "host is not a rank-2 Latin division");

    MinorScript S;
    Mat cur = M;
    auto push = [&](MinorOp::Kind kind, int index, Fe alpha, Fe beta) {
        MinorOp op{kind, index, alpha, beta};
        cur = apply_op(cur, op, ar);
        S.ops.push_back(op);
    };

    // collapse each refined column pair; constant cells cancel, every rank
    // cell keeps a nonzero residue column
    Fe diff = ar.p == 2 ? static_cast<Fe>(1) : ar.sub(0, 1);
    for (int j = 0; j < d * d; ++j) push(MinorOp::SumCol, j, 1, diff);

    if (ar.p == 2) {
        // fix each coarse parity by dropping one odd row of its rank cell,
        // preferring the lower of the two
        int removed = 0;
        std::vector<int> removed_in(d, 0);
        for (int i = 0; i < d * d; ++i) {
            int j = L.rank_col[i];
            int r0 = 2 * i - removed;
            Fe v0 = cur.at(r0, j), v1 = cur.at(r0 + 1, j);
            if (ar.add(v0, v1) != N.at(i / d, j / d)) {
                int del_at = v1 != 0 ? r0 + 1 : r0;
                require(cur.at(del_at, j) != 0, "rank cell lost its pivot");
                push(MinorOp::DelRow, del_at, 0, 0);
                ++removed;
                ++removed_in[i / d];
            }
        }
        for (int J = 0; J < d; ++J)
            for (int t = 0; t < 2 * d - removed_in[J] - 1; ++t) push(MinorOp::SumRow, J, 1, 1);
    } else {
        // one weighted sum per refined row pair lands the target value
        for (int i = 0; i < d * d; ++i) {
            int j = L.rank_col[i];
            Fe x = cur.at(i, j), y = cur.at(i + 1, j);
            Fe want = N.at(i / d, j / d);
            Fe a = 0, b = 0;
            if (x != 0)
                a = ar.mul(want, ar.inv(x));
            else {
                require(y != 0, "rank cell lost its pivot");
                b = ar.mul(want, ar.inv(y));
            }
            push(MinorOp::SumRow, i, a, b);
        }
        for (int J = 0; J < d; ++J)
            for (int t = 0; t < d - 1; ++t) push(MinorOp::SumRow, J, 1, 1);
    }
    for (int I = 0; I < d; ++I)
        for (int t = 0; t < d - 1; ++t) push(MinorOp::SumCol, I, 1, 1);

    require(cur.rows == d && cur.cols == d, "extraction size drifted");
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) require(cur.at(r, c) == N.at(r, c), "extraction missed the target");
    return S;
}

Mat latin_host(int k, int d, const Arith& ar, Rng& rng) {
    check(!ar.saturating, "rank Latin hosts need field labels");
    check(k >= 2 && d >= 1, "rank Latin hosts need k >= 2 and d >= 1");
    int size = k * d * d;
    check(guardrails_off() || size <= 4096, "host side beyond 4096 needs TWINMUL_GUARDRAILS=off");
    Mat M(size, size);
    auto sigma = [&](int x) { return (x % d) * d + x / d; };
    for (int i = 0; i < d * d; ++i)
        for (int j = 0; j < d * d; ++j) {
            if (sigma(j) == i) {
                while (true) {
                    std::vector<Fe> blk(static_cast<size_t>(k) * k);
                    for (auto& e : blk) e = static_cast<Fe>(rng.below(ar.p));
                    if (rank_fp(blk, k, k, ar) != k) continue;
                    for (int r = 0; r < k; ++r)
                        for (int c = 0; c < k; ++c) M.at(i * k + r, j * k + c) = blk[r * k + c];
                    break;
                }
            } else {
                Fe v = static_cast<Fe>(rng.below(ar.p));
                for (int r = 0; r < k; ++r)
                    for (int c = 0; c < k; ++c) M.at(i * k + r, j * k + c) = v;
            }
        }
    return M;
}

}  // namespace twm
