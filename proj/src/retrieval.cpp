#include "pgr/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "pgr/error.hpp"
#include "pgr/util.hpp"

namespace pgr {

PlaceRecord build_record(const std::string& place_id, const SceneGraph& graph,
                         const GatParameters<double>& params, const EmbeddingProvider& provider,
                         std::optional<GeoPoint> coord) {
    PlaceRecord rec;
    rec.place_id = place_id;
    rec.graph = canonicalize(graph).first;
    FeatureBundle fb = build_features(rec.graph, provider);
    GraphEmbedding emb = gat_forward(fb, params);
    rec.embedding = emb.vector;
    rec.embedding_norm = emb.norm;
    rec.profile = sp_profile(rec.graph);
    rec.coord = coord;
    return rec;
}

namespace {

nlohmann::json profile_to_json(const SpProfile& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [len, cnt] : p) j[std::to_string(len)] = cnt;
    return j;
}

SpProfile profile_from_json(const nlohmann::json& j) {
    SpProfile p;
    for (auto it = j.begin(); it != j.end(); ++it)
        p[std::stoi(it.key())] = it.value().get<long>();
    return p;
}

}  // namespace

void save_index(const RetrievalIndex& idx, const std::string& path) {
    nlohmann::json header;
    header["format"] = "pgr-index";
    header["version"] = 1;
    header["provider"] = idx.provider;
    header["checkpoint_hash"] = idx.checkpoint_hash;
    header["gat"] = idx.gat.to_json();
    header["dim"] = idx.dim;
    header["records"] = idx.records.size();
    std::string out = header.dump();
    out += '\n';
    for (const auto& rec : idx.records) {
        nlohmann::json j;
        j["place_id"] = rec.place_id;
        j["graph"] = to_json(rec.graph);
        auto& emb = j["embedding"] = nlohmann::json::array();
        for (long k = 0; k < rec.embedding.size(); ++k) emb.push_back(rec.embedding[k]);
        j["embedding_norm"] = rec.embedding_norm;
        j["sp_profile"] = profile_to_json(rec.profile);
        if (rec.coord) {
            j["lat"] = rec.coord->lat;
            j["lon"] = rec.coord->lon;
        }
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

RetrievalIndex load_index(const std::string& path) {
    auto lines = split_lines(read_file(path));
    if (lines.empty()) throw SchemaError("index file is empty: " + path);
    nlohmann::json header = nlohmann::json::parse(lines[0], nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "pgr-index")
        throw SchemaError("not an index file: " + path);
    RetrievalIndex idx;
    idx.provider = header.at("provider");
    idx.checkpoint_hash = header.value("checkpoint_hash", "");
    idx.gat = GatConfig::from_json(header.at("gat"));
    idx.dim = header.at("dim").get<int>();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json j = nlohmann::json::parse(lines[i], nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw SchemaError("bad index record at line " + std::to_string(i + 1));
        PlaceRecord rec;
        rec.place_id = j.at("place_id").get<std::string>();
        rec.graph = parse_scene_graph(j.at("graph"));
        const auto& emb = j.at("embedding");
        if (static_cast<int>(emb.size()) != idx.dim)
            throw DimensionMismatch("index record embedding size " +
                                    std::to_string(emb.size()) + " != header dim " +
                                    std::to_string(idx.dim));
        rec.embedding.resize(idx.dim);
        for (int k = 0; k < idx.dim; ++k) rec.embedding[k] = emb[k].get<double>();
        rec.embedding_norm = j.value("embedding_norm", 0.0);
        rec.profile = profile_from_json(j.at("sp_profile"));
        if (j.contains("lat") && j.contains("lon"))
            rec.coord = GeoPoint{j["lat"].get<double>(), j["lon"].get<double>()};
        idx.records.push_back(std::move(rec));
    }
    return idx;
}

double fuse(double semantic, double structural, double alpha) {
    if (!(semantic >= -1.0 && semantic <= 1.0))
        throw RangeError("semantic similarity must be in [-1,1], got " + std::to_string(semantic));
    if (!(structural >= 0.0 && structural <= 1.0))
        throw RangeError("structural similarity must be in [0,1], got " + std::to_string(structural));
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw RangeError("alpha must be in [0,1], got " + std::to_string(alpha));
    return alpha * semantic + (1.0 - alpha) * structural;
}

std::vector<Candidate> score_all(const RetrievalIndex& idx, const Vector& query_embedding,
                                 const SpProfile& query_profile, double alpha) {
    if (idx.records.empty()) throw EmptyIndex("index has no records");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw RangeError("alpha must be in [0,1], got " + std::to_string(alpha));
    if (static_cast<int>(query_embedding.size()) != idx.dim)
        throw DimensionMismatch("query embedding size " + std::to_string(query_embedding.size()) +
                                " != index dim " + std::to_string(idx.dim));
    std::vector<Candidate> out;
    out.reserve(idx.records.size());
    for (const auto& rec : idx.records) {
        Candidate c;
        c.place_id = rec.place_id;
        // unit-vector dot products can drift a hair past +/-1
        c.semantic = std::clamp(query_embedding.dot(rec.embedding), -1.0, 1.0);
        c.structural = sp_similarity(query_profile, rec.profile);
        c.score = fuse(c.semantic, c.structural, alpha);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.place_id < b.place_id;
    });
    return out;
}

QueryResult query_index(const RetrievalIndex& idx, const SceneGraph& query_graph,
                        const GatParameters<double>& params, const EmbeddingProvider& provider,
                        const AlphaPolicy& policy, int top_k) {
    if (top_k < 1) throw RangeError("top_k must be >= 1");
    FeatureBundle fb = build_features(query_graph, provider);
    GraphEmbedding emb = gat_forward(fb, params);
    QueryResult res;
    res.features = alpha_features(query_graph, emb);
    res.alpha = policy.evaluate(res.features);
    res.ranked = score_all(idx, emb.vector, sp_profile(query_graph), res.alpha);
    if (static_cast<int>(res.ranked.size()) > top_k) res.ranked.resize(top_k);
    return res;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
    return grid;
}

namespace {

// reciprocal rank of the first positive under the given alpha, using the
// cached semantic/structural components
double rr_at_alpha(std::vector<Candidate> cands, const std::set<std::string>& positives,
                   double alpha) {
    for (auto& c : cands) c.score = alpha * c.semantic + (1.0 - alpha) * c.structural;
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.place_id < b.place_id;
    });
    for (std::size_t r = 0; r < cands.size(); ++r)
        if (positives.count(cands[r].place_id)) return 1.0 / static_cast<double>(r + 1);
    return 0.0;
}

}  // namespace

double grid_best_alpha(const std::vector<Candidate>& base, const std::set<std::string>& positives,
                       const std::vector<double>& grid) {
    if (grid.empty()) throw RangeError("alpha grid is empty");
    double best_alpha = grid[0];
    double best_rr = -1.0;
    for (double a : grid) {
        if (!(a >= 0.0 && a <= 1.0)) throw RangeError("grid alpha out of [0,1]");
        double rr = rr_at_alpha(base, positives, a);
        if (rr > best_rr) {  // strict: ties keep the earliest (smallest) alpha
            best_rr = rr;
            best_alpha = a;
        }
    }
    return best_alpha;
}

AlphaFitResult fit_alpha_policy(AlphaFitKind kind, const RetrievalIndex& idx,
                                const std::vector<AlphaQuery>& queries,
                                const GatParameters<double>& params,
                                const EmbeddingProvider& provider,
                                const std::vector<double>& grid, std::uint64_t seed) {
    if (queries.empty()) throw EmptyDataset("alpha fit needs at least one query");
    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());

    AlphaFitResult res;
    std::vector<AlphaFeatures> xs;
    std::vector<double> ys;
    for (const auto& q : queries) {
        FeatureBundle fb = build_features(q.graph, provider);
        GraphEmbedding emb = gat_forward(fb, params);
        auto cands = score_all(idx, emb.vector, sp_profile(q.graph), 0.5);
        double target = grid_best_alpha(cands, q.positives, sorted_grid);
        AlphaFitSample sample;
        sample.query_id = q.query_id;
        sample.features = alpha_features(q.graph, emb);
        sample.target = target;
        xs.push_back(sample.features);
        ys.push_back(target);
        res.samples.push_back(std::move(sample));
    }

    bool all_equal = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; });
    if (all_equal) {
        res.degenerate = true;
        res.policy = AlphaPolicy::constant(ys[0]);
        return res;
    }
    res.policy = (kind == AlphaFitKind::ridge) ? AlphaPolicy::fit_ridge(xs, ys)
                                               : AlphaPolicy::fit_mlp(xs, ys, seed);
    return res;
}

}  // namespace pgr
