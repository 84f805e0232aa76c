#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgr/alpha.hpp"
#include "pgr/geo.hpp"
#include "pgr/retrieval.hpp"
#include "pgr/scene_graph.hpp"

namespace pgr {

// One captured frame of a sequence: which sequence it belongs to, its index
// within the sequence, where it was taken, and optionally the text caption
// it was described with and a path to its parsed graph.
struct FrameManifestEntry {
    std::string seq_id;
    int frame_idx = 0;
    double lat = 0.0;
    double lon = 0.0;
    std::string caption;     // optional, empty if absent
    std::string graph_path;  // optional, empty if absent
};

std::vector<FrameManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::vector<FrameManifestEntry>& entries, const std::string& path);

struct EvalConfig {
    std::vector<int> ks = {1, 5, 10, 20};
    double radius_m = 25.0;  // a hit is a candidate within this distance
};

struct QueryTrace {
    std::string query_id;
    std::vector<std::string> top_k;  // candidate place ids, best first
    int first_hit_rank = 0;          // 1-based, 0 = no hit within the radius
};

struct RecallReport {
    std::vector<int> ks;
    std::vector<double> recalls;  // percentages in [0,100], same order as ks
    long num_queries = 0;
    double radius_m = 0.0;
    std::vector<QueryTrace> trace;

    nlohmann::json to_json() const;
    std::string to_table() const;  // aligned plain-text table
};

// A query with its ground-truth position and a full candidate ranking
// (best first) produced by some retrieval stage.
struct RankedQuery {
    std::string query_id;
    GeoPoint coord;
    std::vector<std::string> ranking;
};

// A query succeeds at K when any of its top-K candidates lies within
// radius_m of the query position. Every ranked id must have a position.
RecallReport recall_at_k(const std::vector<RankedQuery>& rankings,
                         const std::map<std::string, GeoPoint>& positions,
                         const EvalConfig& cfg);

struct EvalQuery {
    std::string query_id;
    SceneGraph graph;
    GeoPoint coord;
};

// Convenience wrapper: run fused retrieval for every query against the
// index, then score the rankings. Index records must carry coordinates.
RecallReport evaluate_index(const RetrievalIndex& idx, const std::vector<EvalQuery>& queries,
                            const GatParameters<double>& params,
                            const EmbeddingProvider& provider, const AlphaPolicy& policy,
                            const EvalConfig& cfg);

}  // namespace pgr
