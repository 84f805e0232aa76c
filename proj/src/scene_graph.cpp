#include "pgr/scene_graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pgr/error.hpp"

namespace pgr {

namespace {

bool is_edge_punct(char c) {
    static const std::string punct = ".,;:!?\"'()[]{}";
    return punct.find(c) != std::string::npos;
}

}  // namespace

std::string normalize_text(const std::string& s) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        // strip punctuation at token edges only; internal hyphens etc. survive
        std::size_t b = 0, e = cur.size();
        while (b < e && is_edge_punct(cur[b])) ++b;
        while (e > b && is_edge_punct(cur[e - 1])) --e;
        if (e > b) tokens.push_back(cur.substr(b, e - b));
        cur.clear();
    };
    for (char raw : s) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            flush();
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    flush();
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(normalize_text(s));
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

const SceneNode* SceneGraph::find_node(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

void validate(const SceneGraph& g) {
    std::set<std::string> ids;
    for (const auto& n : g.nodes) {
        if (n.id.empty()) throw IntegrityError("node with empty id");
        if (!ids.insert(n.id).second) throw IntegrityError("duplicate node id: " + n.id);
        if (normalize_text(n.label).empty())
            throw IntegrityError("node '" + n.id + "' has empty label");
        std::set<std::string> seen;
        for (const auto& a : n.attributes) {
            if (!seen.insert(normalize_text(a)).second)
                throw IntegrityError("node '" + n.id + "' has duplicate attribute: " + a);
        }
    }
    std::set<std::tuple<std::string, std::string, std::string>> triples;
    for (const auto& e : g.edges) {
        if (!ids.count(e.source)) throw IntegrityError("edge source not in graph: " + e.source);
        if (!ids.count(e.target)) throw IntegrityError("edge target not in graph: " + e.target);
        if (e.source == e.target) throw IntegrityError("self-loop on node: " + e.source);
        if (!triples.insert({e.source, e.target, normalize_text(e.relation)}).second)
            throw IntegrityError("duplicate edge: " + e.source + " -> " + e.target + " (" +
                                 e.relation + ")");
    }
}

namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key))
        throw SchemaError(std::string(where) + " missing field '" + key + "'");
    if (!obj[key].is_string())
        throw SchemaError(std::string(where) + " field '" + key + "' must be a string");
    return obj[key].get<std::string>();
}

}  // namespace

SceneGraph parse_scene_graph(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
    return parse_scene_graph(doc);
}

SceneGraph parse_scene_graph(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("top level must be an object");
    if (!doc.contains("nodes")) throw SchemaError("missing field 'nodes'");
    if (!doc["nodes"].is_array()) throw SchemaError("'nodes' must be an array");
    if (!doc.contains("edges")) throw SchemaError("missing field 'edges'");
    if (!doc["edges"].is_array()) throw SchemaError("'edges' must be an array");

    SceneGraph g;
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object()) throw SchemaError("node entries must be objects");
        SceneNode n;
        n.id = require_string(jn, "id", "node");
        n.label = normalize_text(require_string(jn, "label", "node"));
        if (jn.contains("attributes")) {
            if (!jn["attributes"].is_array())
                throw SchemaError("node 'attributes' must be an array");
            for (const auto& ja : jn["attributes"]) {
                if (!ja.is_string()) throw SchemaError("attributes must be strings");
                std::string a = normalize_text(ja.get<std::string>());
                if (a.empty()) continue;
                // set semantics with first-seen order
                if (std::find(n.attributes.begin(), n.attributes.end(), a) ==
                    n.attributes.end())
                    n.attributes.push_back(a);
            }
        }
        g.nodes.push_back(std::move(n));
    }
    for (const auto& je : doc["edges"]) {
        if (!je.is_object()) throw SchemaError("edge entries must be objects");
        SceneEdge e;
        e.source = require_string(je, "source", "edge");
        e.target = require_string(je, "target", "edge");
        e.relation = normalize_text(require_string(je, "relation", "edge"));
        g.edges.push_back(std::move(e));
    }
    if (doc.contains("meta")) {
        if (!doc["meta"].is_object()) throw SchemaError("'meta' must be an object");
        for (auto it = doc["meta"].begin(); it != doc["meta"].end(); ++it) {
            if (!it.value().is_string()) throw SchemaError("meta values must be strings");
            g.meta[it.key()] = it.value().get<std::string>();
        }
    }
    validate(g);
    return g;
}

nlohmann::json to_json(const SceneGraph& g) {
    nlohmann::json doc;
    doc["nodes"] = nlohmann::json::array();
    for (const auto& n : g.nodes)
        doc["nodes"].push_back({{"id", n.id}, {"label", n.label}, {"attributes", n.attributes}});
    doc["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges)
        doc["edges"].push_back(
            {{"source", e.source}, {"target", e.target}, {"relation", e.relation}});
    if (!g.meta.empty()) doc["meta"] = g.meta;
    return doc;
}

std::vector<SceneGraph> parse_scene_graphs(const std::string& text) {
    std::vector<SceneGraph> graphs;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        graphs.push_back(parse_scene_graph(line));
    }
    return graphs;
}

namespace {

// (label, sorted attributes, original id) — ties on content fall back to ids
std::tuple<std::string, std::vector<std::string>, std::string> node_sort_key(
    const SceneNode& n) {
    std::vector<std::string> attrs = n.attributes;
    std::sort(attrs.begin(), attrs.end());
    return {n.label, std::move(attrs), n.id};
}

}  // namespace

std::vector<std::size_t> canonical_node_order(const SceneGraph& g) {
    std::vector<std::size_t> order(g.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return node_sort_key(g.nodes[a]) < node_sort_key(g.nodes[b]);
    });
    return order;
}

std::pair<SceneGraph, std::map<std::string, std::string>> canonicalize(const SceneGraph& g) {
    auto order = canonical_node_order(g);
    std::map<std::string, std::string> id_map;
    SceneGraph out;
    out.meta = g.meta;
    out.nodes.reserve(g.nodes.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const SceneNode& src = g.nodes[order[k]];
        std::string new_id = "n" + std::to_string(k);
        id_map[src.id] = new_id;
        out.nodes.push_back({new_id, src.label, src.attributes});
    }
    out.edges.reserve(g.edges.size());
    for (const auto& e : g.edges)
        out.edges.push_back({id_map.at(e.source), id_map.at(e.target), e.relation});
    std::sort(out.edges.begin(), out.edges.end(), [](const SceneEdge& a, const SceneEdge& b) {
        return std::tie(a.source, a.target, a.relation) <
               std::tie(b.source, b.target, b.relation);
    });
    return {std::move(out), std::move(id_map)};
}

std::string canonical_serialize(const SceneGraph& g) {
    auto [canon, _] = canonicalize(g);
    // nlohmann::json keeps object keys sorted, so dump() is byte-stable
    return to_json(canon).dump();
}

std::vector<std::pair<std::size_t, std::size_t>> undirected_simple_edges(const SceneGraph& g) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].id] = i;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : g.edges) {
        std::size_t a = index.at(e.source), b = index.at(e.target);
        if (a == b) continue;
        seen.insert({std::min(a, b), std::max(a, b)});
    }
    return {seen.begin(), seen.end()};
}

GraphStats graph_stats(const SceneGraph& g) {
    GraphStats st;
    const std::size_t n = g.nodes.size();
    st.node_count = static_cast<int>(n);
    if (n == 0) return st;

    auto edges = undirected_simple_edges(g);
    const double m = static_cast<double>(edges.size());
    st.avg_degree = 2.0 * m / static_cast<double>(n);
    st.density = n <= 1 ? 0.0 : 2.0 * m / (static_cast<double>(n) * static_cast<double>(n - 1));

    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    // BFS from every node; each connected unordered pair counted once
    long long pair_count = 0;
    long long dist_sum = 0;
    std::vector<int> dist(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<std::size_t> q{s};
        while (!q.empty()) {
            std::size_t u = q.front();
            q.pop_front();
            for (std::size_t v : adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        for (std::size_t t = s + 1; t < n; ++t) {
            if (dist[t] > 0) {
                ++pair_count;
                dist_sum += dist[t];
            }
        }
    }
    st.avg_shortest_path =
        pair_count == 0 ? 0.0 : static_cast<double>(dist_sum) / static_cast<double>(pair_count);
    return st;
}

}  // namespace pgr
