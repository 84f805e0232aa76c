#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgr/alpha.hpp"
#include "pgr/features.hpp"
#include "pgr/gat.hpp"
#include "pgr/scene_graph.hpp"
#include "pgr/sp_kernel.hpp"
#include "pgr/types.hpp"

namespace pgr {

struct GeoPoint {
    double lat = 0.0;  // degrees
    double lon = 0.0;
};

struct PlaceRecord {
    std::string place_id;
    SceneGraph graph;              // canonical form
    Vector embedding;              // unit norm
    double embedding_norm = 0.0;   // pooled norm before normalization
    SpProfile profile;
    std::optional<GeoPoint> coord;
};

struct RetrievalIndex {
    nlohmann::json provider;       // provider config echo
    std::string checkpoint_hash;   // hash of the encoder checkpoint file
    GatConfig gat;
    int dim = 0;
    std::vector<PlaceRecord> records;
};

PlaceRecord build_record(const std::string& place_id, const SceneGraph& graph,
                         const GatParameters<double>& params, const EmbeddingProvider& provider,
                         std::optional<GeoPoint> coord = std::nullopt);

void save_index(const RetrievalIndex& idx, const std::string& path);
RetrievalIndex load_index(const std::string& path);

struct Candidate {
    std::string place_id;
    double score = 0.0;      // alpha * semantic + (1 - alpha) * structural
    double semantic = 0.0;   // cosine of unit embeddings
    double structural = 0.0; // normalized shortest-path kernel
};

// alpha * semantic + (1 - alpha) * structural. semantic must lie in [-1,1],
// structural and alpha in [0,1]; out-of-range inputs raise RangeError.
double fuse(double semantic, double structural, double alpha);

// All records scored against one query, sorted by descending score with
// place_id as the tie-break. alpha must already be chosen.
std::vector<Candidate> score_all(const RetrievalIndex& idx, const Vector& query_embedding,
                                 const SpProfile& query_profile, double alpha);

struct QueryResult {
    std::vector<Candidate> ranked;  // top_k entries (or fewer)
    double alpha = 0.0;
    AlphaFeatures features;
};

QueryResult query_index(const RetrievalIndex& idx, const SceneGraph& query_graph,
                        const GatParameters<double>& params, const EmbeddingProvider& provider,
                        const AlphaPolicy& policy, int top_k);

// --- fusion-weight fitting -------------------------------------------------

struct AlphaQuery {
    std::string query_id;
    SceneGraph graph;
    std::set<std::string> positives;  // place_ids counted as correct
};

// Best alpha on a fixed grid for one query: maximizes the reciprocal rank of
// the first positive; exact ties resolve to the smallest alpha.
double grid_best_alpha(const std::vector<Candidate>& base,  // scored with any alpha
                       const std::set<std::string>& positives, const std::vector<double>& grid);

std::vector<double> default_alpha_grid();  // 0.00, 0.05, ..., 1.00

enum class AlphaFitKind { ridge, mlp };

struct AlphaFitSample {
    std::string query_id;
    AlphaFeatures features;
    double target = 0.0;
};

struct AlphaFitResult {
    AlphaPolicy policy;
    bool degenerate = false;  // all targets equal; policy collapsed to constant
    std::vector<AlphaFitSample> samples;
};

AlphaFitResult fit_alpha_policy(AlphaFitKind kind, const RetrievalIndex& idx,
                                const std::vector<AlphaQuery>& queries,
                                const GatParameters<double>& params,
                                const EmbeddingProvider& provider,
                                const std::vector<double>& grid = default_alpha_grid(),
                                std::uint64_t seed = 0);

}  // namespace pgr
