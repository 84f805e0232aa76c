#include "pgr/sp_kernel.hpp"

#include <cmath>
#include <queue>
#include <vector>

namespace pgr {

SpProfile sp_profile(const SceneGraph& g) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : undirected_simple_edges(g)) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    SpProfile profile;
    std::vector<int> dist(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u]) {
                if (dist[v] != -1) continue;
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
        // count each unordered pair once
        for (int t = s + 1; t < n; ++t)
            if (dist[t] > 0) ++profile[dist[t]];
    }
    return profile;
}

double sp_kernel_raw(const SpProfile& a, const SpProfile& b) {
    double k = 0.0;
    for (const auto& [len, cnt] : a) {
        auto it = b.find(len);
        if (it != b.end()) k += static_cast<double>(cnt) * static_cast<double>(it->second);
    }
    return k;
}

double sp_similarity(const SpProfile& a, const SpProfile& b) {
    double kaa = sp_kernel_raw(a, a);
    double kbb = sp_kernel_raw(b, b);
    if (kaa == 0.0 || kbb == 0.0) return 0.0;
    return sp_kernel_raw(a, b) / std::sqrt(kaa * kbb);
}

double sp_similarity(const SceneGraph& a, const SceneGraph& b) {
    return sp_similarity(sp_profile(a), sp_profile(b));
}

}  // namespace pgr
