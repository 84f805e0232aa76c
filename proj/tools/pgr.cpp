// pgr: command-line front end for the place-graph retrieval pipeline.
// Stages read and write plain files so any stage can be swapped out.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgr/alpha.hpp"
#include "pgr/error.hpp"
#include "pgr/eval.hpp"
#include "pgr/features.hpp"
#include "pgr/fixture.hpp"
#include "pgr/gat.hpp"
#include "pgr/geo.hpp"
#include "pgr/grammar.hpp"
#include "pgr/infonce.hpp"
#include "pgr/merge.hpp"
#include "pgr/prompts.hpp"
#include "pgr/retrieval.hpp"
#include "pgr/scene_graph.hpp"
#include "pgr/service.hpp"
#include "pgr/sp_kernel.hpp"
#include "pgr/train.hpp"
#include "pgr/util.hpp"

namespace {

using nlohmann::json;

// --config file.json overlay: a flag wins when given on the command line,
// otherwise a matching key in the config file replaces the default.
struct ConfigOverlay {
    json doc = json::object();

    void load(const std::string& path) {
        if (path.empty()) return;
        doc = json::parse(pgr::read_file(path), nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            throw pgr::SchemaError("config file is not a JSON object: " + path);
    }
    template <class T>
    void apply(const CLI::Option* opt, const char* key, T& target) const {
        if (opt != nullptr && opt->count() > 0) return;
        if (doc.contains(key)) target = doc[key].get<T>();
    }
    const json* section(const char* key) const {
        auto it = doc.find(key);
        return it == doc.end() ? nullptr : &*it;
    }
};

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-")
        std::cout << content;
    else
        pgr::write_file_atomic(out_path, content);
}

std::shared_ptr<pgr::EmbeddingProvider> provider_from_flags(const std::string& provider,
                                                            int dim,
                                                            const std::string& store_path,
                                                            bool fallback) {
    json cfg;
    cfg["source"] = provider;
    cfg["dim"] = dim;
    if (provider == "store") {
        cfg["path"] = store_path;
        cfg["fallback"] = fallback;
    }
    return pgr::make_provider(cfg);
}

pgr::Lexicon lexicon_from_flag(const std::string& path) {
    return path.empty() ? pgr::Lexicon::defaults() : pgr::Lexicon::load(path);
}

// Frames grouped into sequences, each merged into one place graph with the
// mean frame position. Captions are grammar-parsed unless a graph_path is
// present.
struct SeqPlace {
    std::string seq_id;
    pgr::SceneGraph graph;
    pgr::GeoPoint coord;
};

std::vector<SeqPlace> places_from_manifest(const std::vector<pgr::FrameManifestEntry>& entries,
                                           const pgr::Lexicon& lex,
                                           const pgr::MergeConfig& merge_cfg) {
    std::map<std::string, std::vector<const pgr::FrameManifestEntry*>> by_seq;
    std::vector<std::string> order;  // first-appearance order of sequences
    for (const auto& e : entries) {
        if (!by_seq.count(e.seq_id)) order.push_back(e.seq_id);
        by_seq[e.seq_id].push_back(&e);
    }
    std::vector<SeqPlace> out;
    for (const auto& seq_id : order) {
        auto frames = by_seq[seq_id];
        std::sort(frames.begin(), frames.end(),
                  [](const pgr::FrameManifestEntry* a, const pgr::FrameManifestEntry* b) {
                      return a->frame_idx < b->frame_idx;
                  });
        std::vector<pgr::SceneGraph> graphs;
        double lat = 0, lon = 0;
        for (const auto* f : frames) {
            if (!f->graph_path.empty())
                graphs.push_back(pgr::parse_scene_graph(pgr::read_file(f->graph_path)));
            else if (!f->caption.empty())
                graphs.push_back(pgr::parse_description(f->caption, lex));
            else
                throw pgr::SchemaError("manifest frame " + seq_id + "/" +
                                       std::to_string(f->frame_idx) +
                                       " has neither caption nor graph_path");
            lat += f->lat;
            lon += f->lon;
        }
        SeqPlace place;
        place.seq_id = seq_id;
        place.graph = pgr::merge_graphs(graphs, merge_cfg).merged;
        place.coord = {lat / static_cast<double>(frames.size()),
                       lon / static_cast<double>(frames.size())};
        out.push_back(std::move(place));
    }
    return out;
}

void check_index_freshness(const pgr::RetrievalIndex& idx, const std::string& checkpoint) {
    if (idx.checkpoint_hash.empty()) return;
    if (idx.checkpoint_hash != pgr::checkpoint_hash(checkpoint))
        throw pgr::StaleCache("index was built with a different checkpoint; rebuild it");
}

std::string format_candidates(const pgr::QueryResult& res) {
    std::string out = "rank  place             score        sem     struct   alpha\n";
    char buf[128];
    for (std::size_t i = 0; i < res.ranked.size(); ++i) {
        const auto& c = res.ranked[i];
        std::snprintf(buf, sizeof(buf), "%4zu  %-12s  %9.6f  %9.6f  %9.6f  %6.3f\n", i + 1,
                      c.place_id.c_str(), c.score, c.semantic, c.structural, res.alpha);
        out += buf;
    }
    return out;
}

json candidates_to_json(const pgr::QueryResult& res) {
    json j;
    j["alpha"] = res.alpha;
    auto& arr = j["candidates"] = json::array();
    for (const auto& c : res.ranked)
        arr.push_back({{"place_id", c.place_id},
                       {"score", c.score},
                       {"semantic", c.semantic},
                       {"structural", c.structural}});
    return j;
}

// ---------------------------------------------------------------- parse ---

int cmd_parse(const std::string& text, const std::string& in_path, const std::string& out_path,
              const std::string& lexicon_path, const std::string& mode,
              const std::string& service_mode, const std::string& model) {
    std::vector<std::string> descriptions;
    if (!text.empty()) descriptions.push_back(text);
    if (!in_path.empty()) {
        for (auto& line : pgr::split_lines(pgr::read_file(in_path)))
            if (!line.empty()) descriptions.push_back(line);
    }
    if (descriptions.empty())
        throw pgr::EmptyInput("nothing to parse: pass --text or --in");

    std::string out;
    if (mode == "grammar") {
        pgr::Lexicon lex = lexicon_from_flag(lexicon_path);
        for (const auto& d : descriptions)
            out += pgr::canonical_serialize(pgr::parse_description(d, lex)) + "\n";
    } else if (mode == "service") {
        pgr::CallMode cm = service_mode == "live"     ? pgr::CallMode::live
                           : service_mode == "record" ? pgr::CallMode::record
                                                      : pgr::CallMode::replay;
        pgr::ServiceClient client(pgr::ServiceConfig::from_env(), pgr::make_http_transport());
        pgr::PromptTemplate tmpl = pgr::parse_description_template();
        std::vector<pgr::ServiceRequest> reqs;
        for (const auto& d : descriptions) {
            pgr::ServiceRequest req;
            req.prompt = pgr::render_prompt(tmpl, {{"description", d}});
            req.model = model;
            reqs.push_back(std::move(req));
        }
        for (const auto& resp : client.call_many(reqs, cm))
            out += pgr::canonical_serialize(pgr::parse_scene_graph(resp.text)) + "\n";
    } else {
        throw pgr::Error(pgr::ErrorKind::usage, "unknown --mode '" + mode + "'");
    }
    write_output(out_path, out);
    return 0;
}

// ---------------------------------------------------------------- merge ---

int cmd_merge(const std::vector<std::string>& inputs, const std::string& out_path,
              double threshold, bool no_intra, bool emit_map) {
    std::vector<pgr::SceneGraph> frames;
    for (const auto& path : inputs)
        for (auto& g : pgr::parse_scene_graphs(pgr::read_file(path)))
            frames.push_back(std::move(g));
    pgr::MergeConfig cfg;
    cfg.threshold = threshold;
    cfg.allow_intra_frame_merge = !no_intra;
    pgr::MergeResult res = pgr::merge_graphs(frames, cfg);
    std::string out = pgr::canonical_serialize(res.merged) + "\n";
    if (emit_map) {
        json m;
        for (const auto& [key, merged_id] : res.node_map)
            m[std::to_string(key.first) + ":" + key.second] = merged_id;
        out += m.dump() + "\n";
    }
    write_output(out_path, out);
    return 0;
}

// ------------------------------------------------------------- features ---

int cmd_features(const std::string& in_path, const std::string& out_path,
                 const std::string& provider, int dim, const std::string& store_path,
                 bool fallback) {
    auto prov = provider_from_flags(provider, dim, store_path, fallback);
    std::string out;
    for (auto& g : pgr::parse_scene_graphs(pgr::read_file(in_path))) {
        pgr::FeatureBundle fb = pgr::build_features(g, *prov);
        json j;
        j["node_order"] = fb.node_order;
        auto& nodes = j["node_features"] = json::array();
        for (long r = 0; r < fb.node_features.rows(); ++r) {
            json row = json::array();
            for (long c = 0; c < fb.node_features.cols(); ++c)
                row.push_back(fb.node_features(r, c));
            nodes.push_back(std::move(row));
        }
        auto& edges = j["edges"] = json::array();
        for (std::size_t e = 0; e < fb.edge_index.size(); ++e) {
            json row;
            row["source"] = fb.edge_index[e].first;
            row["target"] = fb.edge_index[e].second;
            json feat = json::array();
            for (long c = 0; c < fb.edge_features.cols(); ++c)
                feat.push_back(fb.edge_features(static_cast<long>(e), c));
            row["features"] = std::move(feat);
            edges.push_back(std::move(row));
        }
        out += j.dump() + "\n";
    }
    write_output(out_path, out);
    return 0;
}

// ---------------------------------------------------------------- train ---

int cmd_train(const CLI::App* sub, const ConfigOverlay& overlay, const std::string& pairs_path,
              const std::string& checkpoint_out, const std::string& init_checkpoint,
              const std::string& report_path, pgr::TrainConfig tc, pgr::GatConfig gc,
              const std::string& provider, int dim, const std::string& store_path,
              bool fallback, bool quiet) {
    // config-file sections mirror the two config structs; flags already hold
    // either their defaults or explicit values, so only unset ones change
    if (const json* sec = overlay.section("train")) {
        pgr::TrainConfig file_tc = pgr::TrainConfig::from_json(*sec);
        auto keep = [&](const char* flag) {
            const CLI::Option* o = sub->get_option(flag);
            return o->count() > 0;
        };
        if (!keep("--tau")) tc.tau = file_tc.tau;
        if (!keep("--batch")) tc.batch_size = file_tc.batch_size;
        if (!keep("--epochs")) tc.epochs = file_tc.epochs;
        if (!keep("--lr")) tc.lr = file_tc.lr;
        if (!keep("--weight-decay")) tc.weight_decay = file_tc.weight_decay;
        if (!keep("--seed")) tc.seed = file_tc.seed;
        if (!keep("--jobs")) tc.jobs = file_tc.jobs;
    }
    if (const json* sec = overlay.section("gat")) {
        pgr::GatConfig file_gc = pgr::GatConfig::from_json(*sec);
        auto keep = [&](const char* flag) {
            const CLI::Option* o = sub->get_option(flag);
            return o->count() > 0;
        };
        if (!keep("--layers")) gc.num_layers = file_gc.num_layers;
        if (!keep("--heads")) gc.heads = file_gc.heads;
        if (!keep("--hidden")) gc.hidden_dim = file_gc.hidden_dim;
        if (!keep("--output-dim")) gc.output_dim = file_gc.output_dim;
        if (!keep("--slope")) gc.leaky_relu_slope = file_gc.leaky_relu_slope;
        if (!keep("--seed")) gc.seed = file_gc.seed;
    }
    gc.seed = tc.seed;  // one seed drives the whole run

    auto prov = provider_from_flags(provider, dim, store_path, fallback);
    pgr::PairDataset ds = pgr::load_pair_dataset(pairs_path);

    pgr::GatParameters<double> params;
    if (!init_checkpoint.empty()) {
        params = pgr::load_checkpoint(init_checkpoint);
    } else {
        params = pgr::init_params<double>(gc, prov->dim(), prov->dim());
    }
    auto progress = [&](int epoch, double loss) {
        if (!quiet && (epoch % 10 == 0 || epoch == tc.epochs - 1))
            std::fprintf(stderr, "epoch %4d  loss %.6f\n", epoch, loss);
    };
    pgr::TrainReport report = pgr::train(params, ds, *prov, tc, progress);
    pgr::save_checkpoint(params, checkpoint_out);

    if (!report_path.empty()) {
        json j;
        j["epoch_losses"] = report.epoch_losses;
        j["lr_trace"] = report.lr_trace;
        j["total_steps"] = report.total_steps;
        j["train"] = tc.to_json();
        j["gat"] = gc.to_json();
        pgr::write_file_atomic(report_path, j.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------- index ---

int cmd_index(const std::string& manifest_path, const std::string& places_path,
              const std::string& checkpoint, const std::string& out_path,
              const std::string& lexicon_path, double threshold, bool no_intra,
              const std::string& provider, int dim, const std::string& store_path,
              bool fallback, int jobs) {
    pgr::GatParameters<double> params = pgr::load_checkpoint(checkpoint);
    auto prov = provider_from_flags(provider, dim, store_path, fallback);

    std::vector<SeqPlace> places;
    if (!manifest_path.empty()) {
        pgr::MergeConfig mc;
        mc.threshold = threshold;
        mc.allow_intra_frame_merge = !no_intra;
        places = places_from_manifest(pgr::load_manifest(manifest_path),
                                      lexicon_from_flag(lexicon_path), mc);
    } else if (!places_path.empty()) {
        auto lines = pgr::split_lines(pgr::read_file(places_path));
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            json j = json::parse(lines[i], nullptr, false);
            if (j.is_discarded() || !j.contains("place_id") || !j.contains("graph"))
                throw pgr::SchemaError("bad place record at line " + std::to_string(i + 1));
            SeqPlace p;
            p.seq_id = j["place_id"].get<std::string>();
            p.graph = pgr::parse_scene_graph(j["graph"]);
            if (j.contains("lat") && j.contains("lon"))
                p.coord = {j["lat"].get<double>(), j["lon"].get<double>()};
            else
                p.coord = {0.0, 0.0};
            places.push_back(std::move(p));
        }
    } else {
        throw pgr::Error(pgr::ErrorKind::usage, "pass --manifest or --places");
    }
    if (places.empty()) throw pgr::EmptyInput("no places to index");

    pgr::RetrievalIndex idx;
    idx.provider = prov->describe();
    idx.checkpoint_hash = pgr::checkpoint_hash(checkpoint);
    idx.gat = params.config;
    idx.dim = params.config.output_dim;
    idx.records.resize(places.size());
    pgr::parallel_for(places.size(), jobs, [&](std::size_t i) {
        idx.records[i] = pgr::build_record(places[i].seq_id, places[i].graph, params, *prov,
                                           pgr::GeoPoint{places[i].coord});
    });
    pgr::save_index(idx, out_path);
    std::fprintf(stderr, "indexed %zu places -> %s\n", idx.records.size(), out_path.c_str());
    return 0;
}

// ---------------------------------------------------------------- query ---

int cmd_query(const std::string& index_path, const std::string& checkpoint,
              const std::string& text, const std::string& graph_path, int top_k,
              double alpha_flag, bool alpha_given, const std::string& policy_path,
              const std::string& lexicon_path, bool as_json) {
    pgr::RetrievalIndex idx = pgr::load_index(index_path);
    check_index_freshness(idx, checkpoint);
    pgr::GatParameters<double> params = pgr::load_checkpoint(checkpoint);
    auto prov = pgr::make_provider(idx.provider);

    pgr::SceneGraph query_graph;
    if (!text.empty())
        query_graph = pgr::parse_description(text, lexicon_from_flag(lexicon_path));
    else if (!graph_path.empty())
        query_graph = pgr::parse_scene_graph(pgr::read_file(graph_path));
    else
        throw pgr::Error(pgr::ErrorKind::usage, "pass --text or --graph");

    pgr::AlphaPolicy policy = pgr::AlphaPolicy::default_threshold();
    if (!policy_path.empty())
        policy = pgr::AlphaPolicy::from_json(json::parse(pgr::read_file(policy_path)));
    if (alpha_given) policy = pgr::AlphaPolicy::constant(alpha_flag);

    pgr::QueryResult res = pgr::query_index(idx, query_graph, params, *prov, policy, top_k);
    if (as_json)
        std::cout << candidates_to_json(res).dump(2) << "\n";
    else
        std::cout << format_candidates(res);
    return 0;
}

// ----------------------------------------------------------------- eval ---

int cmd_eval(const std::string& index_path, const std::string& checkpoint,
             const std::string& queries_path, const std::string& lexicon_path, double radius,
             const std::vector<int>& ks, double alpha_flag, bool alpha_given,
             const std::string& policy_path, double threshold, bool no_intra,
             const std::string& out_path, bool quiet) {
    pgr::RetrievalIndex idx = pgr::load_index(index_path);
    check_index_freshness(idx, checkpoint);
    pgr::GatParameters<double> params = pgr::load_checkpoint(checkpoint);
    auto prov = pgr::make_provider(idx.provider);

    pgr::MergeConfig mc;
    mc.threshold = threshold;
    mc.allow_intra_frame_merge = !no_intra;
    auto places = places_from_manifest(pgr::load_manifest(queries_path),
                                       lexicon_from_flag(lexicon_path), mc);
    std::vector<pgr::EvalQuery> queries;
    for (auto& p : places) queries.push_back({p.seq_id, std::move(p.graph), p.coord});

    pgr::AlphaPolicy policy = pgr::AlphaPolicy::default_threshold();
    if (!policy_path.empty())
        policy = pgr::AlphaPolicy::from_json(json::parse(pgr::read_file(policy_path)));
    if (alpha_given) policy = pgr::AlphaPolicy::constant(alpha_flag);

    pgr::EvalConfig cfg;
    if (!ks.empty()) cfg.ks = ks;
    cfg.radius_m = radius;
    pgr::RecallReport report = pgr::evaluate_index(idx, queries, params, *prov, policy, cfg);
    if (!quiet) std::cout << report.to_table();
    if (!out_path.empty()) pgr::write_file_atomic(out_path, report.to_json().dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- alpha ---

int cmd_alpha(const std::string& index_path, const std::string& checkpoint,
              const std::string& queries_path, const std::string& lexicon_path,
              const std::string& kind, double radius, double threshold, bool no_intra,
              std::uint64_t seed, const std::string& out_path) {
    pgr::RetrievalIndex idx = pgr::load_index(index_path);
    check_index_freshness(idx, checkpoint);
    pgr::GatParameters<double> params = pgr::load_checkpoint(checkpoint);
    auto prov = pgr::make_provider(idx.provider);

    pgr::MergeConfig mc;
    mc.threshold = threshold;
    mc.allow_intra_frame_merge = !no_intra;
    auto places = places_from_manifest(pgr::load_manifest(queries_path),
                                       lexicon_from_flag(lexicon_path), mc);

    // geometric ground truth: every indexed place within the radius counts
    std::vector<pgr::AlphaQuery> queries;
    for (auto& p : places) {
        pgr::AlphaQuery q;
        q.query_id = p.seq_id;
        q.graph = std::move(p.graph);
        for (const auto& rec : idx.records) {
            if (!rec.coord) throw pgr::MissingCoordinates("index record lacks coordinates");
            if (pgr::haversine_m(p.coord.lat, p.coord.lon, rec.coord->lat, rec.coord->lon) <=
                radius)
                q.positives.insert(rec.place_id);
        }
        queries.push_back(std::move(q));
    }

    pgr::AlphaFitKind fit_kind;
    if (kind == "ridge")
        fit_kind = pgr::AlphaFitKind::ridge;
    else if (kind == "mlp")
        fit_kind = pgr::AlphaFitKind::mlp;
    else
        throw pgr::Error(pgr::ErrorKind::usage, "unknown --kind '" + kind + "'");

    pgr::AlphaFitResult res = pgr::fit_alpha_policy(fit_kind, idx, queries, params, *prov,
                                                    pgr::default_alpha_grid(), seed);
    if (res.degenerate)
        std::fprintf(stderr,
                     "warning: all grid targets equal; emitting a constant policy\n");
    pgr::write_file_atomic(out_path, res.policy.to_json().dump(2) + "\n");

    json samples = json::array();
    for (const auto& s : res.samples)
        samples.push_back({{"query_id", s.query_id}, {"target", s.target}});
    std::fprintf(stderr, "fitted %s policy on %zu queries -> %s\n", kind.c_str(),
                 res.samples.size(), out_path.c_str());
    return 0;
}

// -------------------------------------------------------------- fixture ---

int cmd_fixture(std::uint64_t seed, int n_places, int variants, int frames, double dropout,
                double synonym_prob, const std::string& out_dir) {
    pgr::FixtureConfig cfg;
    cfg.seed = seed;
    cfg.n_places = n_places;
    cfg.variants_per_place = variants;
    cfg.frames_per_place = frames;
    cfg.attribute_dropout = dropout;
    cfg.synonym_prob = synonym_prob;
    pgr::Fixture fx = pgr::generate_synthetic_fixture(cfg);

    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) { return out_dir + "/" + name; };
    pgr::save_pair_dataset(fx.pairs, path("pairs.jsonl"));
    pgr::save_manifest(fx.index_frames, path("index_frames.jsonl"));
    pgr::save_manifest(fx.query_frames, path("query_frames.jsonl"));

    std::string desc;
    for (const auto& p : fx.places) {
        json j;
        j["place_id"] = p.place_id;
        j["description"] = p.description;
        j["lat"] = p.coord.lat;
        j["lon"] = p.coord.lon;
        desc += j.dump() + "\n";
    }
    pgr::write_file_atomic(path("descriptions.jsonl"), desc);

    std::string truth;
    for (const auto& p : fx.places) {
        json j;
        j["place_id"] = p.place_id;
        j["graph"] = pgr::to_json(p.database_graph);
        j["lat"] = p.coord.lat;
        j["lon"] = p.coord.lon;
        truth += j.dump() + "\n";
    }
    pgr::write_file_atomic(path("places.jsonl"), truth);
    std::fprintf(stderr, "fixture with %d places -> %s\n", n_places, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"place-graph construction, training and retrieval pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; explicit flags win")
        ->expected(1);

    // parse
    auto* sub_parse = app.add_subcommand("parse", "description text -> scene-graph JSON");
    std::string p_text, p_in, p_out, p_lex, p_mode = "grammar", p_service_mode = "replay",
                p_model = "default";
    sub_parse->add_option("--text", p_text, "one description on the command line");
    sub_parse->add_option("--in", p_in, "file with one description per line");
    sub_parse->add_option("--out", p_out, "output path (default stdout)");
    sub_parse->add_option("--lexicon", p_lex, "token<TAB>class vocabulary file");
    sub_parse->add_option("--mode", p_mode, "grammar|service (default grammar)");
    sub_parse->add_option("--service-mode", p_service_mode, "replay|record|live");
    sub_parse->add_option("--model", p_model, "service model name");

    // merge
    auto* sub_merge = app.add_subcommand("merge", "fuse frame graphs into one place graph");
    std::vector<std::string> m_inputs;
    std::string m_out;
    double m_threshold = 0.7;
    bool m_no_intra = false, m_map = false;
    sub_merge->add_option("inputs", m_inputs, "frame graph files (line-delimited JSON)")
        ->required();
    sub_merge->add_option("--out", m_out, "output path (default stdout)");
    sub_merge->add_option("--threshold", m_threshold, "TF-IDF similarity cut (default 0.7)");
    sub_merge->add_flag("--no-intra-frame", m_no_intra, "never merge nodes of one frame");
    sub_merge->add_flag("--emit-map", m_map, "append the node mapping as a second line");

    // features
    auto* sub_feat = app.add_subcommand("features", "embed graph phrases into matrices");
    std::string f_in, f_out, f_provider = "hashed", f_store;
    int f_dim = 256;
    bool f_fallback = false;
    sub_feat->add_option("--in", f_in, "graph file (line-delimited JSON)")->required();
    sub_feat->add_option("--out", f_out, "output path (default stdout)");
    sub_feat->add_option("--provider", f_provider, "hashed|store");
    sub_feat->add_option("--dim", f_dim, "hashed embedding width (default 256)");
    sub_feat->add_option("--store", f_store, "embedding store path (provider=store)");
    sub_feat->add_flag("--fallback", f_fallback, "hash phrases missing from the store");

    // train
    auto* sub_train = app.add_subcommand("train", "contrastive training of the graph encoder");
    std::string t_pairs, t_ckpt, t_init, t_report, t_provider = "hashed", t_store;
    int t_dim = 256;
    bool t_fallback = false, t_quiet = false;
    pgr::TrainConfig tc;
    pgr::GatConfig gc;
    sub_train->add_option("--pairs", t_pairs, "anchor/positive pair file")->required();
    sub_train->add_option("--checkpoint", t_ckpt, "output checkpoint path")->required();
    sub_train->add_option("--init-checkpoint", t_init, "resume from this checkpoint");
    sub_train->add_option("--report", t_report, "write loss/lr trace JSON here");
    sub_train->add_option("--tau", tc.tau, "softmax temperature (default 0.07)");
    sub_train->add_option("--batch", tc.batch_size, "pairs per batch (default 128)");
    sub_train->add_option("--epochs", tc.epochs, "training epochs (default 500)");
    sub_train->add_option("--lr", tc.lr, "initial learning rate (default 1e-4)");
    sub_train->add_option("--weight-decay", tc.weight_decay, "decoupled decay (default 1e-5)");
    sub_train->add_option("--seed", tc.seed, "seed for init and shuffling");
    sub_train->add_option("--jobs", tc.jobs, "worker threads (default 1)");
    sub_train->add_option("--layers", gc.num_layers, "attention layers 1-3 (default 2)");
    sub_train->add_option("--heads", gc.heads, "attention heads (default 4)");
    sub_train->add_option("--hidden", gc.hidden_dim, "hidden width (default 256)");
    sub_train->add_option("--output-dim", gc.output_dim, "embedding width (default 1024)");
    sub_train->add_option("--slope", gc.leaky_relu_slope, "LeakyReLU slope (default 0.2)");
    sub_train->add_option("--provider", t_provider, "hashed|store");
    sub_train->add_option("--dim", t_dim, "hashed embedding width (default 256)");
    sub_train->add_option("--store", t_store, "embedding store path");
    sub_train->add_flag("--fallback", t_fallback, "hash phrases missing from the store");
    sub_train->add_flag("--quiet", t_quiet, "suppress progress output");

    // index
    auto* sub_index = app.add_subcommand("index", "build a retrieval index");
    std::string i_manifest, i_places, i_ckpt, i_out, i_lex, i_provider = "hashed", i_store;
    double i_threshold = 0.7;
    bool i_no_intra = false, i_fallback = false;
    int i_dim = 256, i_jobs = 1;
    sub_index->add_option("--manifest", i_manifest, "frame manifest (captions or graph paths)");
    sub_index->add_option("--places", i_places, "pre-merged place records");
    sub_index->add_option("--checkpoint", i_ckpt, "trained encoder checkpoint")->required();
    sub_index->add_option("--out", i_out, "index output path")->required();
    sub_index->add_option("--lexicon", i_lex, "vocabulary for caption parsing");
    sub_index->add_option("--threshold", i_threshold, "merge similarity cut (default 0.7)");
    sub_index->add_flag("--no-intra-frame", i_no_intra, "never merge nodes of one frame");
    sub_index->add_option("--provider", i_provider, "hashed|store");
    sub_index->add_option("--dim", i_dim, "hashed embedding width (default 256)");
    sub_index->add_option("--store", i_store, "embedding store path");
    sub_index->add_flag("--fallback", i_fallback, "hash phrases missing from the store");
    sub_index->add_option("--jobs", i_jobs, "worker threads (default 1)");

    // query
    auto* sub_query = app.add_subcommand("query", "rank indexed places for one query");
    std::string q_index, q_ckpt, q_text, q_graph, q_policy, q_lex;
    int q_k = 5;
    double q_alpha = 0.8;
    bool q_json = false;
    sub_query->add_option("--index", q_index, "index file")->required();
    sub_query->add_option("--checkpoint", q_ckpt, "encoder checkpoint")->required();
    sub_query->add_option("--text", q_text, "query as description text");
    sub_query->add_option("--graph", q_graph, "query as a scene-graph JSON file");
    sub_query->add_option("--k", q_k, "candidates to return (default 5)");
    auto* q_alpha_opt = sub_query->add_option("--alpha", q_alpha, "fixed fusion weight");
    sub_query->add_option("--alpha-policy", q_policy, "fitted policy JSON file");
    sub_query->add_option("--lexicon", q_lex, "vocabulary for --text parsing");
    sub_query->add_flag("--json", q_json, "machine-readable output");

    // eval
    auto* sub_eval = app.add_subcommand("eval", "Recall@K against a query manifest");
    std::string e_index, e_ckpt, e_queries, e_lex, e_policy, e_out;
    double e_radius = 25.0, e_alpha = 0.8, e_threshold = 0.7;
    std::vector<int> e_ks;
    bool e_no_intra = false, e_quiet = false;
    sub_eval->add_option("--index", e_index, "index file")->required();
    sub_eval->add_option("--checkpoint", e_ckpt, "encoder checkpoint")->required();
    sub_eval->add_option("--queries", e_queries, "query frame manifest")->required();
    sub_eval->add_option("--lexicon", e_lex, "vocabulary for caption parsing");
    sub_eval->add_option("--radius", e_radius, "hit radius in meters (default 25)");
    sub_eval->add_option("--k", e_ks, "K values (default 1,5,10,20)")->delimiter(',');
    auto* e_alpha_opt = sub_eval->add_option("--alpha", e_alpha, "fixed fusion weight");
    sub_eval->add_option("--alpha-policy", e_policy, "fitted policy JSON file");
    sub_eval->add_option("--threshold", e_threshold, "merge similarity cut (default 0.7)");
    sub_eval->add_flag("--no-intra-frame", e_no_intra, "never merge nodes of one frame");
    sub_eval->add_option("--out", e_out, "write the report JSON here");
    sub_eval->add_flag("--quiet", e_quiet, "suppress the text table");

    // alpha
    auto* sub_alpha = app.add_subcommand("alpha", "fit a fusion-weight policy");
    std::string a_index, a_ckpt, a_queries, a_lex, a_kind = "ridge", a_out;
    double a_radius = 25.0, a_threshold = 0.7;
    bool a_no_intra = false;
    std::uint64_t a_seed = 0;
    sub_alpha->add_option("--index", a_index, "index file")->required();
    sub_alpha->add_option("--checkpoint", a_ckpt, "encoder checkpoint")->required();
    sub_alpha->add_option("--queries", a_queries, "query frame manifest")->required();
    sub_alpha->add_option("--lexicon", a_lex, "vocabulary for caption parsing");
    sub_alpha->add_option("--kind", a_kind, "ridge|mlp (default ridge)");
    sub_alpha->add_option("--radius", a_radius, "ground-truth radius in meters");
    sub_alpha->add_option("--threshold", a_threshold, "merge similarity cut");
    sub_alpha->add_flag("--no-intra-frame", a_no_intra, "never merge nodes of one frame");
    sub_alpha->add_option("--seed", a_seed, "mlp fit seed");
    sub_alpha->add_option("--out", a_out, "policy output path")->required();

    // fixture
    auto* sub_fix = app.add_subcommand("fixture", "generate a synthetic dataset");
    std::uint64_t x_seed = 0;
    int x_places = 50, x_variants = 2, x_frames = 5;
    double x_dropout = 0.2, x_syn = 0.3;
    std::string x_out;
    sub_fix->add_option("--seed", x_seed, "fixture seed");
    sub_fix->add_option("--places", x_places, "number of places (default 50)");
    sub_fix->add_option("--variants", x_variants, "noisy variants per place (default 2)");
    sub_fix->add_option("--frames", x_frames, "frames per place (default 5)");
    sub_fix->add_option("--attr-dropout", x_dropout, "attribute dropout (default 0.2)");
    sub_fix->add_option("--synonym-prob", x_syn, "synonym substitution (default 0.3)");
    sub_fix->add_option("--out-dir", x_out, "output directory")->required();

    try {
        app.parse(argc, argv);
        ConfigOverlay overlay;
        overlay.load(config_path);

        if (*sub_parse) {
            overlay.apply(sub_parse->get_option("--lexicon"), "lexicon", p_lex);
            overlay.apply(sub_parse->get_option("--mode"), "mode", p_mode);
            return cmd_parse(p_text, p_in, p_out, p_lex, p_mode, p_service_mode, p_model);
        }
        if (*sub_merge) {
            overlay.apply(sub_merge->get_option("--threshold"), "threshold", m_threshold);
            return cmd_merge(m_inputs, m_out, m_threshold, m_no_intra, m_map);
        }
        if (*sub_feat) {
            overlay.apply(sub_feat->get_option("--provider"), "provider", f_provider);
            overlay.apply(sub_feat->get_option("--dim"), "dim", f_dim);
            return cmd_features(f_in, f_out, f_provider, f_dim, f_store, f_fallback);
        }
        if (*sub_train)
            return cmd_train(sub_train, overlay, t_pairs, t_ckpt, t_init, t_report, tc, gc,
                             t_provider, t_dim, t_store, t_fallback, t_quiet);
        if (*sub_index) {
            overlay.apply(sub_index->get_option("--threshold"), "threshold", i_threshold);
            overlay.apply(sub_index->get_option("--provider"), "provider", i_provider);
            overlay.apply(sub_index->get_option("--dim"), "dim", i_dim);
            overlay.apply(sub_index->get_option("--jobs"), "jobs", i_jobs);
            return cmd_index(i_manifest, i_places, i_ckpt, i_out, i_lex, i_threshold,
                             i_no_intra, i_provider, i_dim, i_store, i_fallback, i_jobs);
        }
        if (*sub_query) {
            overlay.apply(sub_query->get_option("--k"), "k", q_k);
            overlay.apply(q_alpha_opt, "alpha", q_alpha);
            return cmd_query(q_index, q_ckpt, q_text, q_graph, q_k, q_alpha,
                             q_alpha_opt->count() > 0 || overlay.doc.contains("alpha"),
                             q_policy, q_lex, q_json);
        }
        if (*sub_eval) {
            overlay.apply(sub_eval->get_option("--radius"), "radius", e_radius);
            overlay.apply(sub_eval->get_option("--threshold"), "threshold", e_threshold);
            overlay.apply(e_alpha_opt, "alpha", e_alpha);
            return cmd_eval(e_index, e_ckpt, e_queries, e_lex, e_radius, e_ks, e_alpha,
                            e_alpha_opt->count() > 0 || overlay.doc.contains("alpha"),
                            e_policy, e_threshold, e_no_intra, e_out, e_quiet);
        }
        if (*sub_alpha) {
            overlay.apply(sub_alpha->get_option("--kind"), "kind", a_kind);
            overlay.apply(sub_alpha->get_option("--radius"), "radius", a_radius);
            return cmd_alpha(a_index, a_ckpt, a_queries, a_lex, a_kind, a_radius, a_threshold,
                             a_no_intra, a_seed, a_out);
        }
        if (*sub_fix) {
            overlay.apply(sub_fix->get_option("--seed"), "seed", x_seed);
            overlay.apply(sub_fix->get_option("--places"), "places", x_places);
            return cmd_fixture(x_seed, x_places, x_variants, x_frames, x_dropout, x_syn,
                               x_out);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit code 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage
    } catch (const pgr::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.kind()) {
            case pgr::ErrorKind::usage: return 1;
            case pgr::ErrorKind::data: return 2;
            case pgr::ErrorKind::numeric: return 3;
        }
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
