#pragma once

// Shared scaffolding for the test binaries: throwaway directories, seeded
// random graph generation, and an all-pairs shortest-path oracle that the
// library code never touches.

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "pgr/rng.hpp"
#include "pgr/scene_graph.hpp"

namespace testutil {

class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pgr-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

inline const std::vector<std::string>& label_pool() {
    static const std::vector<std::string> labels = {
        "building", "house", "tree", "mailbox", "sign", "fence", "tower", "bench",
    };
    return labels;
}

inline const std::vector<std::string>& attr_pool() {
    static const std::vector<std::string> attrs = {
        "tall", "red", "white", "brick", "old", "narrow", "stone", "wide",
    };
    return attrs;
}

inline const std::vector<std::string>& relation_pool() {
    static const std::vector<std::string> rels = {
        "left of", "right of", "behind", "next to",
    };
    return rels;
}

// Random directed graph with distinct ids, no self-loops, no duplicate
// (source, target, relation) triples. Node count is uniform in
// [min_nodes, max_nodes]; each ordered pair gets an edge with edge_prob.
inline pgr::SceneGraph random_graph(pgr::Rng& rng, int min_nodes, int max_nodes,
                                    double edge_prob) {
    pgr::SceneGraph g;
    const int n = min_nodes + static_cast<int>(rng.next_below(
                                  static_cast<std::uint64_t>(max_nodes - min_nodes + 1)));
    for (int i = 0; i < n; ++i) {
        pgr::SceneNode node;
        node.id = "v" + std::to_string(i);
        node.label = label_pool()[rng.next_below(label_pool().size())];
        if (rng.next_double() < 0.8)
            node.attributes.push_back(attr_pool()[rng.next_below(attr_pool().size())]);
        g.nodes.push_back(std::move(node));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rng.next_double() < edge_prob)
                g.edges.push_back({"v" + std::to_string(i), "v" + std::to_string(j),
                                   relation_pool()[rng.next_below(relation_pool().size())]});
        }
    return g;
}

inline pgr::SceneGraph random_graph_with_edge(pgr::Rng& rng, int min_nodes, int max_nodes,
                                              double edge_prob) {
    for (;;) {
        pgr::SceneGraph g = random_graph(rng, std::max(min_nodes, 2), max_nodes, edge_prob);
        if (!g.edges.empty()) return g;
    }
}

// Floyd–Warshall over the undirected simple projection; -1 = unreachable.
// Deliberately a different algorithm and code path from the library's BFS.
inline std::vector<std::vector<int>> fw_distances(const pgr::SceneGraph& g) {
    const std::size_t n = g.nodes.size();
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        index[g.nodes[i].id] = i;
        d[i][i] = 0;
    }
    for (const auto& e : g.edges) {
        std::size_t a = index.at(e.source), b = index.at(e.target);
        if (a == b) continue;
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    for (auto& row : d)
        for (auto& v : row)
            if (v >= inf) v = -1;
    return d;
}

// P3: a - b - c as directed edges a->b, b->c.
inline pgr::SceneGraph path3() {
    pgr::SceneGraph g;
    g.nodes = {{"a", "tree", {}}, {"b", "house", {}}, {"c", "fence", {}}};
    g.edges = {{"a", "b", "next to"}, {"b", "c", "behind"}};
    return g;
}

// P2: single edge a - b.
inline pgr::SceneGraph path2() {
    pgr::SceneGraph g;
    g.nodes = {{"a", "tree", {}}, {"b", "house", {}}};
    g.edges = {{"a", "b", "next to"}};
    return g;
}

}  // namespace testutil
