#pragma once

#include <unistd.h>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "twm/decomp.hpp"
#include "twm/dense.hpp"

namespace twm::test {

inline Mat mat_from(int rows, int cols, std::initializer_list<int> vals) {
    Mat m(rows, cols);
    require(static_cast<int>(vals.size()) == rows * cols, "fixture size mismatch");
    int i = 0;
    for (int v : vals) m.a[i++] = static_cast<Fe>(v);
    return m;
}

inline Mat graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    Mat g(n, n);
    for (auto [u, v] : edges) g.at(u, v) = g.at(v, u) = 1;
    return g;
}

// 7-vertex graph with twin-width 2 and a matching 2-sequence.
inline Mat width2_graph() {
    return graph_from_edges(7, {{0, 1}, {0, 3}, {0, 5}, {1, 2}, {1, 3}, {1, 4}, {1, 5},
                                {2, 4}, {2, 5}, {3, 4}, {3, 6}, {4, 6}, {5, 6}});
}

inline ContractionSeq width2_seq() {
    ContractionSeq s;
    s.n0 = 7;
    s.steps = {{4, 5, 7}, {0, 3, 8}, {1, 7, 9}, {6, 8, 10}, {2, 9, 11}, {10, 11, 12}};
    return s;
}

// 7-vertex squaring showcase: graph, its two-step graph, a width-2
// decomposition of it.
inline Mat square_demo_graph() {
    return graph_from_edges(7, {{0, 1}, {0, 2}, {0, 4}, {0, 5}, {0, 6}, {1, 3}, {1, 4},
                                {2, 3}, {2, 4}, {5, 6}});
}

inline Mat square_demo_squared() {
    return graph_from_edges(7, {{0, 1}, {0, 2}, {0, 5}, {0, 6}, {1, 2}, {1, 4}, {1, 5},
                                {1, 6}, {2, 4}, {2, 5}, {2, 6}, {4, 5}, {4, 6}, {5, 6}});
}

inline Decomposition<Fe> square_demo_dec() {
    Decomposition<Fe> D;
    D.n = 7;
    D.p = 2;
    D.parent.assign(13, -1);
    D.kids.assign(13, {-1, -1});
    auto join = [&](int id, int a, int b) {
        D.kids[id] = {std::min(a, b), std::max(a, b)};
        D.parent[a] = D.parent[b] = id;
    };
    join(7, 5, 6);
    join(8, 0, 4);
    join(9, 1, 2);
    join(10, 8, 9);
    join(11, 3, 10);
    join(12, 11, 7);
    D.bedges = {{0, 4, 1}, {0, 7, 1}, {3, 9, 1}, {5, 6, 1}, {8, 9, 1}};
    return D;
}

// 6-vertex decomposition walkthrough: graph, tree, biclique edges.
inline Mat six_vertex_graph() {
    return graph_from_edges(6, {{1, 2}, {1, 3}, {3, 4}, {3, 5}, {5, 0}, {5, 1}});
}

inline Decomposition<Fe> six_vertex_dec() {
    Decomposition<Fe> D;
    D.n = 6;
    D.p = 2;
    D.parent.assign(11, -1);
    D.kids.assign(11, {-1, -1});
    auto join = [&](int id, int a, int b) {
        D.kids[id] = {std::min(a, b), std::max(a, b)};
        D.parent[a] = D.parent[b] = id;
    };
    join(6, 0, 1);
    join(7, 4, 5);
    join(8, 2, 3);
    join(9, 6, 8);
    join(10, 9, 7);
    D.bedges = {{1, 2, 1}, {1, 3, 1}, {3, 7, 1}, {5, 6, 1}};
    return D;
}

// 7x8 parity-minor showcase matrix and the 4x3 minor its script reaches.
inline Mat parity_demo_matrix() {
    return mat_from(7, 8,
                    {1, 0, 1, 1, 0, 0, 1, 1,
                     0, 1, 1, 0, 0, 1, 0, 1,
                     0, 0, 0, 0, 0, 0, 0, 1,
                     1, 1, 0, 0, 1, 0, 1, 1,
                     1, 0, 0, 1, 1, 0, 1, 0,
                     0, 0, 1, 1, 1, 1, 0, 0,
                     0, 0, 1, 1, 0, 0, 0, 1});
}

inline Mat parity_demo_minor() {
    return mat_from(4, 3, {1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1});
}

// 18x18 rank-2 Latin 3-division host with all-zero constant cells.
inline Mat latin_demo_host() {
    Mat m(18, 18);
    for (auto [r, c] : std::vector<std::pair<int, int>>{
             {16, 0}, {17, 1}, {11, 2}, {11, 3}, {10, 3}, {5, 4}, {4, 5}, {15, 6},
             {14, 7}, {9, 8},  {9, 9},  {8, 9},  {2, 10}, {3, 11}, {2, 11}, {13, 12},
             {12, 12}, {12, 13}, {7, 14}, {6, 15}, {1, 16}, {0, 16}, {1, 17}})
        m.at(r, c) = 1;
    return m;
}

// Scratch file path inside the per-process temp dir; created lazily.
inline std::string tmp_path(const std::string& name) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("twm_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return (dir / name).string();
}

}  // namespace twm::test
