#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace pgr {

// One object mention: class label plus non-spatial attribute strings.
// Attributes keep first-seen order (phrase construction depends on it) but
// behave as a set: no duplicates after normalization.
struct SceneNode {
    std::string id;
    std::string label;
    std::vector<std::string> attributes;

    bool operator==(const SceneNode&) const = default;
};

// Directed relation, e.g. ("n0", "n1", "left of") for "n0 left of n1".
struct SceneEdge {
    std::string source;
    std::string target;
    std::string relation;

    bool operator==(const SceneEdge&) const = default;
};

struct SceneGraph {
    std::vector<SceneNode> nodes;
    std::vector<SceneEdge> edges;
    std::map<std::string, std::string> meta;

    bool operator==(const SceneGraph&) const = default;

    const SceneNode* find_node(const std::string& id) const;
};

// Undirected simple-projection statistics.
struct GraphStats {
    int node_count = 0;
    double avg_degree = 0.0;
    double density = 0.0;            // 0 for n <= 1
    double avg_shortest_path = 0.0;  // mean BFS distance over connected pairs, 0 if none
};

// lowercase, trim, collapse internal whitespace, strip punctuation at token
// edges ("Light-colored," -> "light-colored")
std::string normalize_text(const std::string& s);

// whitespace tokens of normalize_text(s)
std::vector<std::string> tokenize(const std::string& s);

// Throws SchemaError / IntegrityError; never mutates g on failure paths.
void validate(const SceneGraph& g);

// Parses one JSON document in the scene-graph schema, normalizes labels,
// attributes and relations, and validates. SchemaError for shape problems,
// IntegrityError for dangling endpoints / duplicates.
SceneGraph parse_scene_graph(const std::string& text);
SceneGraph parse_scene_graph(const nlohmann::json& doc);

// Line-delimited multi-graph container (blank lines skipped).
std::vector<SceneGraph> parse_scene_graphs(const std::string& text);

// Schema-shaped JSON for a graph as stored (no reordering).
nlohmann::json to_json(const SceneGraph& g);

// Content-canonical form: nodes sorted by (label, sorted attributes, id), ids
// rewritten to n0..nK in that order, edges sorted by (source, target,
// relation). Same content in any storage order serializes byte-identically.
std::string canonical_serialize(const SceneGraph& g);

// The canonical graph itself plus the old-id -> new-id mapping.
std::pair<SceneGraph, std::map<std::string, std::string>> canonicalize(const SceneGraph& g);

// Node order used by canonical_serialize, as indices into g.nodes.
std::vector<std::size_t> canonical_node_order(const SceneGraph& g);

GraphStats graph_stats(const SceneGraph& g);

// Unordered undirected edge set (by node index) of the simple projection.
std::vector<std::pair<std::size_t, std::size_t>> undirected_simple_edges(const SceneGraph& g);

}  // namespace pgr
