#pragma once

#include <map>
#include <string>
#include <vector>

#include "pgr/eval.hpp"
#include "pgr/grammar.hpp"
#include "pgr/merge.hpp"
#include "pgr/rng.hpp"
#include "pgr/train.hpp"

namespace pgr {

// Synthetic multi-place dataset for desk-scale end-to-end runs: invented
// street scenes rendered as grammar-parseable text, frame manifests with
// coordinates, and ready-made training pairs.
struct FixtureConfig {
    std::uint64_t seed = 0;
    int n_places = 50;
    int variants_per_place = 2;  // noisy variants; the last one is the held-out query
    int frames_per_place = 5;

    double attribute_dropout = 0.2;   // per attribute occurrence
    double synonym_prob = 0.3;        // substitution chance for surviving attributes
    // empty -> built-in symmetric table over the default lexicon
    std::map<std::string, std::vector<std::string>> synonyms;

    int min_nodes = 5;
    int max_nodes = 8;
    double extra_edge_prob = 0.25;    // beyond the random spanning tree
    double node_visibility = 0.6;     // chance a frame sees a non-assigned node

    double base_lat = 48.1000;
    double base_lon = 11.5000;
    double place_spacing_deg = 0.002;  // ~220 m: well beyond 2x the 25 m radius
    double frame_jitter_deg = 2e-5;    // ~2 m between consecutive frames
};

std::map<std::string, std::vector<std::string>> default_synonym_table();

// Dropout + synonym substitution for one attribute list. Draws from rng in
// a fixed order, so the noise statistics are directly testable.
std::vector<std::string> apply_attribute_noise(const std::vector<std::string>& attrs, Rng& rng,
                                               const FixtureConfig& cfg);

struct PlaceFixture {
    std::string place_id;
    GeoPoint coord;                         // mean of database frame positions
    SceneGraph base;                        // ground-truth structure
    SceneGraph database_graph;              // merged clean frames
    std::vector<SceneGraph> variant_graphs; // merged noisy variants, last = query
    std::string description;                // noisy full-view text (zero-shot path)
};

struct Fixture {
    FixtureConfig config;
    std::vector<PlaceFixture> places;
    PairDataset pairs;                            // anchor = database, positive = variant 0
    std::vector<FrameManifestEntry> index_frames; // clean frames, seq_id = place_id
    std::vector<FrameManifestEntry> query_frames; // held-out frames, seq_id = place_id + "_q"
};

Fixture generate_synthetic_fixture(const FixtureConfig& cfg);

}  // namespace pgr
