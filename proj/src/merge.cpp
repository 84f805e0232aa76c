#include "pgr/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pgr/error.hpp"

namespace pgr {

namespace {

std::map<std::string, int> term_counts(const std::vector<std::string>& doc) {
    std::map<std::string, int> tf;
    for (const auto& t : doc) ++tf[t];
    return tf;
}

// union-find with path compression
struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

double tfidf_cosine(const std::vector<std::string>& doc_a,
                    const std::vector<std::string>& doc_b,
                    const std::vector<std::vector<std::string>>& corpus) {
    if (doc_a.empty() && doc_b.empty()) return 1.0;
    if (doc_a.empty() || doc_b.empty()) return 0.0;

    auto tf_a = term_counts(doc_a);
    auto tf_b = term_counts(doc_b);
    // identical term counts give cosine 1 regardless of idf; return it exactly
    // so threshold 1.0 still links duplicate mentions
    if (tf_a == tf_b) return 1.0;

    const double n_docs = static_cast<double>(corpus.size());
    std::map<std::string, int> df;
    for (const auto& doc : corpus) {
        std::set<std::string> uniq(doc.begin(), doc.end());
        for (const auto& t : uniq) ++df[t];
    }
    auto idf = [&](const std::string& t) {
        auto it = df.find(t);
        double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
        return std::log((1.0 + n_docs) / (1.0 + d)) + 1.0;
    };

    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (const auto& [t, c] : tf_a) {
        double w = static_cast<double>(c) * idf(t);
        norm_a += w * w;
        auto it = tf_b.find(t);
        if (it != tf_b.end()) dot += w * static_cast<double>(it->second) * idf(t);
    }
    for (const auto& [t, c] : tf_b) {
        double w = static_cast<double>(c) * idf(t);
        norm_b += w * w;
    }
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
    double cos = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
    return std::clamp(cos, 0.0, 1.0);
}

namespace {

struct MemberRef {
    std::size_t frame;
    std::size_t node;  // index within that frame
};

std::vector<std::string> attr_tokens(const SceneNode& n) {
    std::vector<std::string> tokens;
    for (const auto& a : n.attributes)
        for (const auto& t : tokenize(a)) tokens.push_back(t);
    return tokens;
}

// sort key mirroring canonical node order: label, sorted attributes, id
std::string member_key(const SceneNode& n) {
    std::vector<std::string> attrs = n.attributes;
    std::sort(attrs.begin(), attrs.end());
    std::string key = n.label;
    for (const auto& a : attrs) {
        key.push_back('\x1f');
        key += a;
    }
    key.push_back('\x1e');
    key += n.id;
    return key;
}

}  // namespace

MergeResult merge_graphs(const std::vector<SceneGraph>& frames, const MergeConfig& cfg) {
    if (frames.empty()) throw EmptyInput("merge_graphs: no frames");
    if (cfg.threshold < 0.0 || cfg.threshold > 1.0)
        throw RangeError("merge threshold must be in [0,1]");
    for (const auto& f : frames) validate(f);

    std::vector<MemberRef> members;
    std::vector<std::vector<std::string>> corpus;
    for (std::size_t f = 0; f < frames.size(); ++f)
        for (std::size_t i = 0; i < frames[f].nodes.size(); ++i) {
            members.push_back({f, i});
            corpus.push_back(attr_tokens(frames[f].nodes[i]));
        }

    auto node_of = [&](std::size_t m) -> const SceneNode& {
        return frames[members[m].frame].nodes[members[m].node];
    };

    DisjointSets sets(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            bool same_frame = members[a].frame == members[b].frame;
            if (same_frame && !cfg.allow_intra_frame_merge) continue;
            if (node_of(a).label != node_of(b).label) continue;
            if (tfidf_cosine(corpus[a], corpus[b], corpus) >= cfg.threshold) sets.unite(a, b);
        }
    }

    // group members per component
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t m = 0; m < members.size(); ++m) components[sets.find(m)].push_back(m);

    // representative id = smallest canonical member key; unique because two
    // components can only collide on keys if their key nodes carry identical
    // label+attributes+id, and such cross-frame twins always merge
    MergeResult result;
    std::map<std::size_t, std::string> rep_id;
    std::vector<std::pair<std::string, std::size_t>> ordered;  // (rep id, root)
    for (const auto& [root, group] : components) {
        std::string best = member_key(node_of(group.front()));
        for (std::size_t m : group) best = std::min(best, member_key(node_of(m)));
        rep_id[root] = best;
        ordered.emplace_back(best, root);
    }
    std::sort(ordered.begin(), ordered.end());

    SceneGraph merged;
    for (const auto& [rid, root] : ordered) {
        const auto& group = components.at(root);
        std::set<std::string> attrs;
        for (std::size_t m : group)
            for (const auto& a : node_of(m).attributes) attrs.insert(a);
        merged.nodes.push_back(
            {rid, node_of(group.front()).label, {attrs.begin(), attrs.end()}});
        result.component_sizes.push_back(group.size());
    }

    std::map<std::pair<std::size_t, std::string>, std::string> pre_map;
    for (std::size_t m = 0; m < members.size(); ++m)
        pre_map[{members[m].frame, node_of(m).id}] = rep_id.at(sets.find(m));

    std::set<std::tuple<std::string, std::string, std::string>> edge_set;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        for (const auto& e : frames[f].edges) {
            std::string s = pre_map.at({f, e.source});
            std::string t = pre_map.at({f, e.target});
            if (s == t) continue;  // endpoints fused
            if (edge_set.insert({s, t, e.relation}).second) merged.edges.push_back({s, t, e.relation});
        }
    }

    // keep only meta entries present with the same value in every frame
    if (!frames.empty()) {
        for (const auto& [k, v] : frames.front().meta) {
            bool uniform = true;
            for (const auto& f : frames)
                if (auto it = f.meta.find(k); it == f.meta.end() || it->second != v) {
                    uniform = false;
                    break;
                }
            if (uniform) merged.meta[k] = v;
        }
    }
    merged.meta["source"] = "merged";

    auto [canon, id_map] = canonicalize(merged);
    result.merged = std::move(canon);
    for (auto& [key, rid] : pre_map) result.node_map[key] = id_map.at(rid);
    validate(result.merged);
    return result;
}

}  // namespace pgr
