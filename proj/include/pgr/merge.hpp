#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pgr/scene_graph.hpp"

namespace pgr {

struct MergeConfig {
    double threshold = 0.7;             // attribute-similarity cut for node fusion
    bool allow_intra_frame_merge = true;
};

struct MergeResult {
    SceneGraph merged;  // canonical ids
    // (frame index, original node id) -> merged node id; total over all inputs
    std::map<std::pair<std::size_t, std::string>, std::string> node_map;
    std::vector<std::size_t> component_sizes;
};

// Cosine of smoothed TF-IDF vectors over the given corpus.
//   tf = raw count, idf = ln((1+N)/(1+df)) + 1, vectors L2-normalized.
// Both documents empty -> 1.0; exactly one empty -> 0.0.
double tfidf_cosine(const std::vector<std::string>& doc_a,
                    const std::vector<std::string>& doc_b,
                    const std::vector<std::vector<std::string>>& corpus);

// Fuses per-frame graphs of one place. Nodes with identical normalized label
// whose attribute documents reach the similarity threshold are linked;
// connected components of that relation merge (transitive, so the result is
// invariant to frame order). Attributes union sorted; edges remap to the
// component representative, self-loops drop, duplicates collapse.
MergeResult merge_graphs(const std::vector<SceneGraph>& frames, const MergeConfig& cfg = {});

}  // namespace pgr
