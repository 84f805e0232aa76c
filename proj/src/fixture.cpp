#include "pgr/fixture.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "pgr/error.hpp"

namespace pgr {

std::map<std::string, std::vector<std::string>> default_synonym_table() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"tall", "massive"},  {"short", "tiny"},          {"old", "weathered"},
        {"modern", "polished"}, {"gray", "dark"},         {"white", "light-colored"},
        {"curved", "arched"}, {"plain", "faded"},
    };
    std::map<std::string, std::vector<std::string>> table;
    for (const auto& [a, b] : pairs) {
        table[a].push_back(b);
        table[b].push_back(a);
    }
    return table;
}

std::vector<std::string> apply_attribute_noise(const std::vector<std::string>& attrs, Rng& rng,
                                               const FixtureConfig& cfg) {
    const auto& table = cfg.synonyms;
    std::vector<std::string> out;
    for (const auto& a : attrs) {
        if (rng.next_double() < cfg.attribute_dropout) continue;
        std::string kept = a;
        auto it = table.find(a);
        if (it != table.end() && !it->second.empty() &&
            rng.next_double() < cfg.synonym_prob)
            kept = it->second[rng.next_below(it->second.size())];
        if (std::find(out.begin(), out.end(), kept) == out.end()) out.push_back(kept);
    }
    return out;
}

namespace {

struct BaseNode {
    std::string noun;
    std::vector<std::string> attrs;
};

struct BaseEdge {
    int src = 0, tgt = 0;
    std::string relation;
};

struct BasePlace {
    std::vector<BaseNode> nodes;
    std::vector<BaseEdge> edges;
};

BasePlace draw_place(Rng& rng, const FixtureConfig& cfg, const std::vector<std::string>& nouns,
                     const std::vector<std::string>& attrs,
                     const std::vector<std::string>& relations) {
    BasePlace place;
    const int span = cfg.max_nodes - cfg.min_nodes + 1;
    const int n = cfg.min_nodes + static_cast<int>(rng.next_below(span));

    // distinct nouns per place so grammar mentions never collide
    std::vector<std::string> pool = nouns;
    for (int i = 0; i < n; ++i) {
        std::size_t pick = rng.next_below(pool.size());
        BaseNode node;
        node.noun = pool[pick];
        pool.erase(pool.begin() + static_cast<long>(pick));
        const int n_attrs = 1 + static_cast<int>(rng.next_below(2));
        std::set<std::string> chosen;
        while (static_cast<int>(chosen.size()) < n_attrs)
            chosen.insert(attrs[rng.next_below(attrs.size())]);
        node.attrs.assign(chosen.begin(), chosen.end());
        place.nodes.push_back(std::move(node));
    }

    // random spanning tree plus occasional extra edges
    std::set<std::pair<int, int>> used;
    auto add_edge = [&](int u, int v) {
        if (u == v || used.count({u, v}) || used.count({v, u})) return;
        used.insert({u, v});
        place.edges.push_back({u, v, relations[rng.next_below(relations.size())]});
    };
    for (int i = 1; i < n; ++i) add_edge(i, static_cast<int>(rng.next_below(i)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.next_double() < cfg.extra_edge_prob) add_edge(i, j);
    std::sort(place.edges.begin(), place.edges.end(), [](const BaseEdge& a, const BaseEdge& b) {
        return std::tie(a.src, a.tgt) < std::tie(b.src, b.tgt);
    });
    return place;
}

std::string render_mention(const BaseNode& node, const std::vector<std::string>& attrs) {
    std::string out = "a ";
    for (const auto& a : attrs) {
        out += a;
        out += ' ';
    }
    out += node.noun;
    return out;
}

// one frame of a variant: visible subset, per-node noisy attributes, text
std::string render_frame_caption(const BasePlace& place, const std::vector<int>& visible,
                                 const std::vector<std::vector<std::string>>& frame_attrs) {
    std::vector<bool> in_frame(place.nodes.size(), false);
    for (int v : visible) in_frame[static_cast<std::size_t>(v)] = true;

    std::string caption;
    auto append_sentence = [&](const std::string& s) {
        if (!caption.empty()) caption += ' ';
        caption += s;
        caption += '.';
    };
    for (int v : visible)
        append_sentence(render_mention(place.nodes[static_cast<std::size_t>(v)],
                                       frame_attrs[static_cast<std::size_t>(v)]));
    for (const auto& e : place.edges) {
        if (!in_frame[static_cast<std::size_t>(e.src)] ||
            !in_frame[static_cast<std::size_t>(e.tgt)])
            continue;
        std::string s = render_mention(place.nodes[static_cast<std::size_t>(e.src)],
                                       frame_attrs[static_cast<std::size_t>(e.src)]);
        s += " is ";
        s += e.relation;
        s += ' ';
        s += render_mention(place.nodes[static_cast<std::size_t>(e.tgt)],
                            frame_attrs[static_cast<std::size_t>(e.tgt)]);
        append_sentence(s);
    }
    return caption;
}

// frame visibility: node i is pinned to frame i % frames and edge k pins both
// endpoints to frame k % frames, so every node and every relation shows up in
// at least one frame of every variant; everything else appears with
// cfg.node_visibility
std::vector<int> draw_visible(const BasePlace& place, int frame, int frames, Rng& rng,
                              const FixtureConfig& cfg) {
    std::vector<bool> pinned(place.nodes.size(), false);
    for (int i = 0; i < static_cast<int>(place.nodes.size()); ++i)
        if (i % frames == frame) pinned[static_cast<std::size_t>(i)] = true;
    for (int k = 0; k < static_cast<int>(place.edges.size()); ++k) {
        if (k % frames == frame) {
            pinned[static_cast<std::size_t>(place.edges[k].src)] = true;
            pinned[static_cast<std::size_t>(place.edges[k].tgt)] = true;
        }
    }
    std::vector<int> visible;
    for (int i = 0; i < static_cast<int>(place.nodes.size()); ++i) {
        if (pinned[static_cast<std::size_t>(i)] || rng.next_double() < cfg.node_visibility)
            visible.push_back(i);
    }
    return visible;
}

}  // namespace

Fixture generate_synthetic_fixture(const FixtureConfig& cfg_in) {
    FixtureConfig cfg = cfg_in;
    if (cfg.n_places < 2) throw RangeError("fixture needs at least 2 places");
    if (cfg.variants_per_place < 1) throw RangeError("fixture needs at least 1 variant");
    if (cfg.frames_per_place < 1) throw RangeError("fixture needs at least 1 frame per place");
    if (!(cfg.attribute_dropout >= 0.0 && cfg.attribute_dropout <= 1.0) ||
        !(cfg.synonym_prob >= 0.0 && cfg.synonym_prob <= 1.0))
        throw RangeError("noise probabilities must be in [0,1]");
    if (cfg.min_nodes < 2 || cfg.max_nodes < cfg.min_nodes)
        throw RangeError("bad node count range");
    if (cfg.synonyms.empty()) cfg.synonyms = default_synonym_table();

    Lexicon lex = Lexicon::defaults();
    const auto nouns = lex.entries(TokenClass::noun);
    const auto attrs = lex.entries(TokenClass::attribute);
    const auto relations = lex.entries(TokenClass::relation);
    if (static_cast<int>(nouns.size()) < cfg.max_nodes)
        throw RangeError("lexicon too small for requested place size");

    Fixture fx;
    fx.config = cfg;
    MergeConfig merge_cfg;  // defaults

    for (int pi = 0; pi < cfg.n_places; ++pi) {
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "p%03d", pi);
        PlaceFixture pf;
        pf.place_id = idbuf;

        Rng place_rng(mix64(cfg.seed ^ fnv1a64(pf.place_id)));
        BasePlace base = draw_place(place_rng, cfg, nouns, attrs, relations);

        // ground-truth graph
        for (int i = 0; i < static_cast<int>(base.nodes.size()); ++i)
            pf.base.nodes.push_back({"n" + std::to_string(i),
                                     base.nodes[static_cast<std::size_t>(i)].noun,
                                     base.nodes[static_cast<std::size_t>(i)].attrs});
        for (const auto& e : base.edges)
            pf.base.edges.push_back(
                {"n" + std::to_string(e.src), "n" + std::to_string(e.tgt), e.relation});
        validate(pf.base);

        const double lat = cfg.base_lat + cfg.place_spacing_deg * (pi / 10);
        const double lon = cfg.base_lon + cfg.place_spacing_deg * (pi % 10);
        pf.coord = {lat, lon};

        // variant -1 is the clean database pass; 0..V-1 are noisy
        for (int variant = -1; variant < cfg.variants_per_place; ++variant) {
            Rng var_rng(mix64(cfg.seed ^ fnv1a64(pf.place_id) ^
                              static_cast<std::uint64_t>(variant + 2) * 0x9e3779b97f4a7c15ull));
            std::vector<SceneGraph> frames;
            for (int f = 0; f < cfg.frames_per_place; ++f) {
                auto visible = draw_visible(base, f, cfg.frames_per_place, var_rng, cfg);
                std::vector<std::vector<std::string>> frame_attrs(base.nodes.size());
                for (int v : visible) {
                    const auto& node = base.nodes[static_cast<std::size_t>(v)];
                    frame_attrs[static_cast<std::size_t>(v)] =
                        variant < 0 ? node.attrs : apply_attribute_noise(node.attrs, var_rng, cfg);
                }
                std::string caption = render_frame_caption(base, visible, frame_attrs);
                frames.push_back(parse_description(caption, lex));

                FrameManifestEntry entry;
                entry.frame_idx = f;
                entry.lat = lat + cfg.frame_jitter_deg *
                                      (f - (cfg.frames_per_place - 1) / 2.0);
                entry.lon = lon;
                entry.caption = caption;
                if (variant < 0) {
                    entry.seq_id = pf.place_id;
                    fx.index_frames.push_back(entry);
                } else if (variant == cfg.variants_per_place - 1) {
                    entry.seq_id = pf.place_id + "_q";
                    fx.query_frames.push_back(entry);
                }
            }
            SceneGraph merged = merge_graphs(frames, merge_cfg).merged;
            if (variant < 0)
                pf.database_graph = merged;
            else
                pf.variant_graphs.push_back(merged);
        }

        // full-view noisy description for the zero-shot text path
        {
            Rng desc_rng(mix64(cfg.seed ^ fnv1a64(pf.place_id) ^ 0xfeedfacecafebeefull));
            std::vector<int> all_visible(base.nodes.size());
            for (std::size_t i = 0; i < base.nodes.size(); ++i)
                all_visible[i] = static_cast<int>(i);
            std::vector<std::vector<std::string>> desc_attrs(base.nodes.size());
            for (std::size_t i = 0; i < base.nodes.size(); ++i)
                desc_attrs[i] = apply_attribute_noise(base.nodes[i].attrs, desc_rng, cfg);
            pf.description = render_frame_caption(base, all_visible, desc_attrs);
        }

        PairExample pair;
        pair.place_id = pf.place_id;
        pair.anchor = pf.database_graph;
        pair.positive = pf.variant_graphs.front();
        fx.pairs.push_back(std::move(pair));
        fx.places.push_back(std::move(pf));
    }
    return fx;
}

}  // namespace pgr
