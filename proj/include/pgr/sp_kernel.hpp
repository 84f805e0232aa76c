#pragma once

#include <map>

#include "pgr/scene_graph.hpp"

namespace pgr {

// Histogram of shortest-path lengths over connected unordered node pairs of
// the undirected simple projection of a graph. Key = path length >= 1,
// value = number of pairs at that distance.
using SpProfile = std::map<int, long>;

SpProfile sp_profile(const SceneGraph& g);

// Dot product of two shortest-path histograms.
double sp_kernel_raw(const SpProfile& a, const SpProfile& b);

// Normalized kernel k(a,b) / sqrt(k(a,a) k(b,b)), in [0,1].
// Graphs with an empty profile (no connected pairs) score 0 against
// everything, including themselves.
double sp_similarity(const SpProfile& a, const SpProfile& b);
double sp_similarity(const SceneGraph& a, const SceneGraph& b);

}  // namespace pgr
