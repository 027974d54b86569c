#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "twm/decomp.hpp"

namespace twm {

// Line-oriented tokenizer with positions for error messages.
struct LineReader {
    std::string path;
    std::vector<std::string> lines;
    size_t at = 0;

    explicit LineReader(const std::string& p) : path(p) {
        std::ifstream in(p, std::ios::binary);
        check(in.good(), "cannot open " + p);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
    }

    bool done() const { return at >= lines.size(); }
    std::string where() const { return path + ":" + std::to_string(at + 1); }

    std::vector<std::string> next() {
        check(!done(), path + ": unexpected end of file");
        std::istringstream ss(lines[at++]);
        std::vector<std::string> toks;
        std::string t;
        while (ss >> t) toks.push_back(t);
        return toks;
    }

    std::vector<std::string> peek() {
        check(!done(), path + ": unexpected end of file");
        std::istringstream ss(lines[at]);
        std::vector<std::string> toks;
        std::string t;
        while (ss >> t) toks.push_back(t);
        return toks;
    }
};

inline i64 to_int(const std::string& s, const std::string& where) {
    i64 v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    check(ec == std::errc() && p == s.data() + s.size(), where + ": bad integer '" + s + "'");
    return v;
}

inline void expect_line(LineReader& r, const std::vector<std::string>& want) {
    auto got = r.next();
    check(got == want, r.path + ": expected '" + [&] {
        std::string s;
        for (auto& w : want) s += (s.empty() ? "" : " ") + w;
        return s;
    }() + "'");
}

// Keyword line "key <int>".
inline i64 keyed_int(LineReader& r, const std::string& key) {
    auto toks = r.next();
    check(toks.size() == 2 && toks[0] == key, r.path + ": expected '" + key + " <n>'");
    return to_int(toks[1], r.where());
}

inline void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        check(out.good(), "cannot write " + tmp);
        out << content;
        check(out.good(), "write failed for " + tmp);
    }
    check(std::rename(tmp.c_str(), path.c_str()) == 0, "cannot move " + tmp + " into place");
}

template <class V>
const char* dec_format_tag();
template <>
inline const char* dec_format_tag<Fe>() {
    return "TWD";
}
template <>
inline const char* dec_format_tag<Dv>() {
    return "TWDD";
}

template <class V>
std::string format_dec(const Decomposition<V>& D) {
    std::string out;
    out += dec_format_tag<V>();
    out += " 1\n";
    out += "p " + std::to_string(D.p) + "\n";
    out += "n " + std::to_string(D.n) + "\n";
    for (int id = D.n; id < D.node_count(); ++id) {
        int a = D.kids[id][0], b = D.kids[id][1];
        if (a > b) std::swap(a, b);
        out += "node " + std::to_string(id) + " " + std::to_string(D.label(id)) + " " +
               std::to_string(a) + " " + std::to_string(b) + "\n";
    }
    auto sorted = D.bedges;
    std::sort(sorted.begin(), sorted.end(), [](const Bedge<V>& l, const Bedge<V>& r) {
        return std::tie(l.x, l.y) < std::tie(r.x, r.y);
    });
    for (const auto& e : sorted) {
        out += "bedge " + std::to_string(e.x) + " " + std::to_string(e.y);
        if constexpr (vt<V>::directed) {
            out += " " + std::to_string(vt<V>::fwd(e.val)) + " " + std::to_string(vt<V>::bwd(e.val));
        } else {
            out += " " + std::to_string(e.val);
        }
        out += "\n";
    }
    return out;
}

template <class V>
void write_dec(const std::string& path, const Decomposition<V>& D) {
    atomic_write(path, format_dec(D));
}

// Internal node ids in files may be arbitrary (but >= n, leaves own 0..n-1);
// they are remapped onto canonical label-derived ids.
template <class V>
Decomposition<V> read_dec(const std::string& path) {
    LineReader r(path);
    expect_line(r, {dec_format_tag<V>(), "1"});
    i64 p = keyed_int(r, "p");
    check(is_prime_u32(static_cast<u32>(p)) && p >= 2 && p <= kMaxPrime, path + ": p must be a small prime");
    i64 n = keyed_int(r, "n");
    check(n >= 1 && n <= (1 << 26), path + ": unreasonable n");
    Decomposition<V> D;
    D.n = static_cast<int>(n);
    D.p = static_cast<u32>(p);
    D.parent.assign(D.node_count(), -1);
    D.kids.assign(D.node_count(), {-1, -1});

    struct RawNode {
        i64 label, ca, cb;
    };
    std::unordered_map<i64, RawNode> raw;        // file id -> node
    std::vector<u8> label_seen(n, 0);
    std::vector<std::array<i64, 2>> raw_bedges;  // file endpoint ids
    std::vector<std::pair<Fe, Fe>> raw_vals;
    while (!r.done()) {
        if (r.peek().empty()) {
            r.next();
            continue;
        }
        auto toks = r.next();
        std::string at = r.where();
        if (toks[0] == "node") {
            check(toks.size() == 5, at + ": expected 'node id label childA childB'");
            i64 id = to_int(toks[1], at), lbl = to_int(toks[2], at);
            i64 ca = to_int(toks[3], at), cb = to_int(toks[4], at);
            check(id >= n, at + ": internal node id collides with leaf ids");
            check(lbl >= 1 && lbl < n, at + ": label out of range");
            check(!label_seen[lbl], at + ": duplicate label");
            label_seen[lbl] = 1;
            check(raw.emplace(id, RawNode{lbl, ca, cb}).second, at + ": duplicate node id");
        } else if (toks[0] == "bedge") {
            i64 f = 0, g = 0;
            if constexpr (vt<V>::directed) {
                check(toks.size() == 5, at + ": expected 'bedge u v fwd bwd'");
                f = to_int(toks[3], at);
                g = to_int(toks[4], at);
            } else {
                check(toks.size() == 4, at + ": expected 'bedge u v value'");
                f = g = to_int(toks[3], at);
            }
            check(f >= 0 && f < p && g >= 0 && g < p, at + ": biclique label out of range");
            raw_vals.push_back({static_cast<Fe>(f), static_cast<Fe>(g)});
            i64 u = to_int(toks[1], at), v = to_int(toks[2], at);
            check(u >= 0 && v >= 0, at + ": negative node id");
            raw_bedges.push_back({u, v});
        } else {
            throw validation_error(at + ": unknown directive '" + toks[0] + "'");
        }
    }
    check(static_cast<i64>(raw.size()) == n - 1, path + ": need exactly n-1 internal nodes");
    auto remap = [&](i64 file_id, const std::string& at) {
        if (file_id < n) return static_cast<int>(file_id);
        auto it = raw.find(file_id);
        check(it != raw.end(), at + ": reference to unknown node " + std::to_string(file_id));
        return D.internal_of_label(static_cast<int>(it->second.label));
    };
    for (auto& [fid, nd] : raw) {
        int id = D.internal_of_label(static_cast<int>(nd.label));
        int a = remap(nd.ca, path), b = remap(nd.cb, path);
        check(a != b, path + ": node with identical children");
        D.kids[id] = {std::min(a, b), std::max(a, b)};
        check(D.parent[a] == -1 && D.parent[b] == -1, path + ": node with two parents");
        D.parent[a] = id;
        D.parent[b] = id;
    }
    for (size_t i = 0; i < raw_bedges.size(); ++i) {
        int x = remap(raw_bedges[i][0], path), y = remap(raw_bedges[i][1], path);
        auto [f, g] = raw_vals[i];
        D.bedges.push_back({x, y, vt<V>::make(f, vt<V>::directed ? g : f)});
    }
    structure_check(D, Arith::mod(D.p));
    return D;
}

inline std::string format_ctr(const ContractionSeq& seq) {
    std::string out = "CTR 1\n";
    out += "n " + std::to_string(seq.n0) + "\n";
    for (auto& [u, v, z] : seq.steps)
        out += std::to_string(u) + " " + std::to_string(v) + " " + std::to_string(z) + "\n";
    return out;
}

inline void write_ctr(const std::string& path, const ContractionSeq& seq) {
    atomic_write(path, format_ctr(seq));
}

// Fresh ids in the file may be arbitrary; they are remapped to canonical
// n + k in step order. Initial vertices are 0..n-1.
inline ContractionSeq read_ctr(const std::string& path) {
    LineReader r(path);
    expect_line(r, {"CTR", "1"});
    i64 n = keyed_int(r, "n");
    check(n >= 1 && n <= (1 << 26), path + ": unreasonable n");
    ContractionSeq seq;
    seq.n0 = static_cast<int>(n);
    std::unordered_map<i64, int> fresh;  // file id -> canonical id
    auto resolve = [&](i64 fid, const std::string& at) {
        if (fid < n) {
            check(fid >= 0, at + ": negative vertex id");
            return static_cast<int>(fid);
        }
        auto it = fresh.find(fid);
        check(it != fresh.end(), at + ": reference to unknown part " + std::to_string(fid));
        return it->second;
    };
    while (!r.done()) {
        if (r.peek().empty()) {
            r.next();
            continue;
        }
        auto toks = r.next();
        std::string at = r.where();
        check(toks.size() == 3, at + ": expected 'u v z'");
        int u = resolve(to_int(toks[0], at), at);
        int v = resolve(to_int(toks[1], at), at);
        i64 zf = to_int(toks[2], at);
        int z = seq.n0 + static_cast<int>(seq.steps.size());
        check(zf >= n, at + ": fresh id collides with initial vertices");
        check(fresh.emplace(zf, z).second, at + ": fresh id reused");
        seq.steps.push_back({u, v, z});
    }
    check(static_cast<i64>(seq.steps.size()) == n - 1, path + ": need exactly n-1 contractions");
    return seq;
}

inline std::string format_fqm(const Mat& m, u32 p) {
    std::string out = "FQM 1\n";
    out += "p " + std::to_string(p) + "\n";
    out += "rows " + std::to_string(m.rows) + "\n";
    out += "cols " + std::to_string(m.cols) + "\n";
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            if (j) out += " ";
            out += std::to_string(m.at(i, j));
        }
        out += "\n";
    }
    return out;
}

inline void write_fqm(const std::string& path, const Mat& m, u32 p) {
    atomic_write(path, format_fqm(m, p));
}

inline std::pair<Mat, u32> read_fqm(const std::string& path) {
    LineReader r(path);
    expect_line(r, {"FQM", "1"});
    i64 p = keyed_int(r, "p");
    check(is_prime_u32(static_cast<u32>(p)) && p <= kMaxPrime, path + ": p must be a small prime");
    i64 rows = keyed_int(r, "rows");
    i64 cols = keyed_int(r, "cols");
    check(rows >= 0 && cols >= 0 && rows <= (1 << 20) && cols <= (1 << 20), path + ": unreasonable shape");
    Mat m(static_cast<int>(rows), static_cast<int>(cols));
    for (i64 i = 0; i < rows; ++i) {
        auto toks = r.next();
        std::string at = r.where();
        check(static_cast<i64>(toks.size()) == cols, at + ": expected " + std::to_string(cols) + " entries");
        for (i64 j = 0; j < cols; ++j) {
            i64 v = to_int(toks[j], at);
            check(v >= 0 && v < p, at + ": entry out of range");
            m.at(static_cast<int>(i), static_cast<int>(j)) = static_cast<Fe>(v);
        }
    }
    while (!r.done()) check(r.next().empty(), path + ": trailing content");
    return {m, static_cast<u32>(p)};
}

// Minor script: deletions and adjacent weighted sums over rows/columns.
struct MinorOp {
    enum Kind : u8 { DelRow, DelCol, SumRow, SumCol } kind;
    int index = 0;
    Fe alpha = 0, beta = 0;  // sums only
};

struct MinorScript {
    std::vector<MinorOp> ops;
    friend bool operator==(const MinorScript&, const MinorScript&) = default;
};

inline bool operator==(const MinorOp& a, const MinorOp& b) {
    return a.kind == b.kind && a.index == b.index && a.alpha == b.alpha && a.beta == b.beta;
}

inline std::string format_msc(const MinorScript& s) {
    std::string out = "MSC 1\n";
    for (const auto& op : s.ops) {
        switch (op.kind) {
            case MinorOp::DelRow: out += "dr " + std::to_string(op.index) + "\n"; break;
            case MinorOp::DelCol: out += "dc " + std::to_string(op.index) + "\n"; break;
            case MinorOp::SumRow:
                out += "wr " + std::to_string(op.index) + " " + std::to_string(op.alpha) + " " +
                       std::to_string(op.beta) + "\n";
                break;
            case MinorOp::SumCol:
                out += "wc " + std::to_string(op.index) + " " + std::to_string(op.alpha) + " " +
                       std::to_string(op.beta) + "\n";
                break;
        }
    }
    return out;
}

inline void write_msc(const std::string& path, const MinorScript& s) {
    atomic_write(path, format_msc(s));
}

inline MinorScript read_msc(const std::string& path) {
    LineReader r(path);
    expect_line(r, {"MSC", "1"});
    MinorScript s;
    while (!r.done()) {
        if (r.peek().empty()) {
            r.next();
            continue;
        }
        auto toks = r.next();
        std::string at = r.where();
        MinorOp op;
        if (toks[0] == "dr" || toks[0] == "dc") {
            check(toks.size() == 2, at + ": expected '" + toks[0] + " <index>'");
            op.kind = toks[0] == "dr" ? MinorOp::DelRow : MinorOp::DelCol;
            op.index = static_cast<int>(to_int(toks[1], at));
        } else if (toks[0] == "wr" || toks[0] == "wc") {
            check(toks.size() == 4, at + ": expected '" + toks[0] + " <index> <alpha> <beta>'");
            op.kind = toks[0] == "wr" ? MinorOp::SumRow : MinorOp::SumCol;
            op.index = static_cast<int>(to_int(toks[1], at));
            op.alpha = static_cast<Fe>(to_int(toks[2], at));
            op.beta = static_cast<Fe>(to_int(toks[3], at));
        } else {
            throw validation_error(at + ": unknown directive '" + toks[0] + "'");
        }
        check(op.index >= 0, at + ": negative index");
        s.ops.push_back(op);
    }
    return s;
}

}  // namespace twm
