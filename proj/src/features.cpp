#include "pgr/features.hpp"

#include <algorithm>
#include <cmath>

#include "pgr/error.hpp"
#include "pgr/rng.hpp"
#include "pgr/util.hpp"

namespace pgr {

std::string node_phrase(const SceneNode& node) {
    std::string out;
    for (const auto& a : node.attributes) {
        out += a;
        out += ' ';
    }
    out += node.label;
    return out;
}

std::string edge_phrase(const SceneEdge& edge) { return edge.relation; }

HashedEmbedder::HashedEmbedder(int dim) : dim_(dim) {
    if (dim <= 0) throw DimensionMismatch("embedding dim must be positive");
}

Vector HashedEmbedder::embed(const std::string& phrase) const {
    Vector v = Vector::Zero(dim_);
    for (const auto& tok : tokenize(phrase)) {
        std::uint64_t h = mix64(fnv1a64(tok));
        int bucket = static_cast<int>(h % static_cast<std::uint64_t>(dim_));
        double sign = (h >> 63) ? -1.0 : 1.0;
        v[bucket] += sign;
    }
    double n = v.norm();
    if (n == 0.0) {
        // all-sign cancellation or empty phrase: emit a stable unit basis
        // vector so downstream norms stay valid
        std::uint64_t h = mix64(fnv1a64(phrase));
        v[static_cast<int>(h % static_cast<std::uint64_t>(dim_))] = 1.0;
        return v;
    }
    return v / n;
}

nlohmann::json HashedEmbedder::describe() const {
    return {{"source", "hashed"}, {"dim", dim_}};
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
    auto lines = split_lines(read_file(path));
    if (lines.empty()) throw SchemaError("embedding store is empty: " + path);
    nlohmann::json header = nlohmann::json::parse(lines[0], nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("dim") ||
        !header["dim"].is_number_integer())
        throw SchemaError("embedding store header must be {\"dim\": N}: " + path);
    EmbeddingStore store(header["dim"].get<int>());
    if (store.dim_ <= 0) throw SchemaError("embedding store dim must be positive");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json rec = nlohmann::json::parse(lines[i], nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("phrase") ||
            !rec.contains("vector") || !rec["vector"].is_array())
            throw SchemaError("bad embedding store record at line " + std::to_string(i + 1));
        Vector v(store.dim_);
        if (static_cast<int>(rec["vector"].size()) != store.dim_)
            throw DimensionMismatch("embedding store vector at line " + std::to_string(i + 1) +
                                    " has size " + std::to_string(rec["vector"].size()) +
                                    ", expected " + std::to_string(store.dim_));
        for (int k = 0; k < store.dim_; ++k) v[k] = rec["vector"][k].get<double>();
        store.put(rec["phrase"].get<std::string>(), v);
    }
    return store;
}

void EmbeddingStore::save(const std::string& path) const {
    std::string out;
    out += nlohmann::json{{"dim", dim_}}.dump();
    out += '\n';
    for (const auto& [phrase, v] : table_) {
        nlohmann::json rec;
        rec["phrase"] = phrase;
        auto& arr = rec["vector"] = nlohmann::json::array();
        for (int k = 0; k < dim_; ++k) arr.push_back(v[k]);
        out += rec.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

void EmbeddingStore::put(const std::string& phrase, const Vector& v) {
    if (static_cast<int>(v.size()) != dim_)
        throw DimensionMismatch("embedding has size " + std::to_string(v.size()) +
                                ", store expects " + std::to_string(dim_));
    table_[phrase] = v;
}

const Vector* EmbeddingStore::find(const std::string& phrase) const {
    auto it = table_.find(phrase);
    return it == table_.end() ? nullptr : &it->second;
}

StoreEmbedder::StoreEmbedder(EmbeddingStore store, bool hashed_fallback, std::string source_path)
    : store_(std::move(store)), hashed_fallback_(hashed_fallback), fallback_(store_.dim()),
      source_path_(std::move(source_path)) {}

Vector StoreEmbedder::embed(const std::string& phrase) const {
    if (const Vector* v = store_.find(phrase)) {
        double n = v->norm();
        if (n == 0.0) throw NormViolation("stored embedding for '" + phrase + "' has zero norm");
        return *v / n;
    }
    if (hashed_fallback_) return fallback_.embed(phrase);
    throw MissingEmbedding("no stored embedding for phrase '" + phrase + "'");
}

nlohmann::json StoreEmbedder::describe() const {
    nlohmann::json cfg = {{"source", "store"}, {"dim", store_.dim()},
                          {"fallback", hashed_fallback_}};
    if (!source_path_.empty()) cfg["path"] = source_path_;
    return cfg;
}

std::shared_ptr<EmbeddingProvider> make_provider(const nlohmann::json& cfg) {
    if (!cfg.is_object() || !cfg.contains("source"))
        throw SchemaError("provider config needs a \"source\" field");
    std::string source = cfg["source"].get<std::string>();
    if (source == "hashed") {
        int dim = cfg.value("dim", 256);
        return std::make_shared<HashedEmbedder>(dim);
    }
    if (source == "store") {
        if (!cfg.contains("path"))
            throw SchemaError("store provider config needs a \"path\" field");
        std::string path = cfg["path"].get<std::string>();
        auto store = EmbeddingStore::load(path);
        return std::make_shared<StoreEmbedder>(std::move(store), cfg.value("fallback", false),
                                               path);
    }
    throw SchemaError("unknown provider source '" + source + "'");
}

FeatureBundle build_features(const SceneGraph& g, const EmbeddingProvider& provider) {
    validate(g);
    FeatureBundle fb;
    const auto order = canonical_node_order(g);
    const int n = static_cast<int>(order.size());
    const int d = provider.dim();

    std::map<std::string, int> row_of;
    fb.node_order.reserve(order.size());
    fb.node_features.resize(n, d);
    for (int r = 0; r < n; ++r) {
        const SceneNode& node = g.nodes[order[r]];
        fb.node_order.push_back(node.id);
        row_of[node.id] = r;
        fb.node_features.row(r) = provider.embed(node_phrase(node)).transpose();
    }

    // edges sorted by (source row, target row, relation) for a stable layout
    std::vector<const SceneEdge*> edges;
    edges.reserve(g.edges.size());
    for (const auto& e : g.edges) edges.push_back(&e);
    std::sort(edges.begin(), edges.end(), [&](const SceneEdge* a, const SceneEdge* b) {
        auto ka = std::tuple(row_of.at(a->source), row_of.at(a->target), a->relation);
        auto kb = std::tuple(row_of.at(b->source), row_of.at(b->target), b->relation);
        return ka < kb;
    });
    const int m = static_cast<int>(edges.size());
    fb.edge_features.resize(m, d);
    fb.edge_index.reserve(edges.size());
    for (int r = 0; r < m; ++r) {
        fb.edge_features.row(r) = provider.embed(edge_phrase(*edges[r])).transpose();
        fb.edge_index.emplace_back(row_of.at(edges[r]->source), row_of.at(edges[r]->target));
    }
    return fb;
}

}  // namespace pgr
