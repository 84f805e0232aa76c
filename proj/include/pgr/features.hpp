#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgr/scene_graph.hpp"
#include "pgr/types.hpp"

namespace pgr {

// Text phrase fed to an embedding provider. Node phrases are the attributes
// in stored order followed by the label; edge phrases are the relation text.
std::string node_phrase(const SceneNode& node);
std::string edge_phrase(const SceneEdge& edge);

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    // Returns a unit-norm vector of size dim().
    virtual Vector embed(const std::string& phrase) const = 0;
    // Configuration echo stored in index headers so a reader can rebuild
    // an identical provider.
    virtual nlohmann::json describe() const = 0;
};

// Deterministic signed bag-of-words hashing embedder. Each token is hashed
// to a bucket with a +/-1 sign, token vectors are summed and the result is
// L2 normalized. Needs no external data and is stable across platforms.
class HashedEmbedder : public EmbeddingProvider {
  public:
    explicit HashedEmbedder(int dim = 256);
    int dim() const override { return dim_; }
    Vector embed(const std::string& phrase) const override;
    nlohmann::json describe() const override;

  private:
    int dim_;
};

// Phrase -> vector table loaded from disk, for precomputed embeddings.
// File format: first line {"dim": D}, then one JSON object per line:
// {"phrase": "...", "vector": [ ... D floats ... ]}.
class EmbeddingStore {
  public:
    static EmbeddingStore load(const std::string& path);
    void save(const std::string& path) const;

    explicit EmbeddingStore(int dim) : dim_(dim) {}
    int dim() const { return dim_; }
    void put(const std::string& phrase, const Vector& v);
    const Vector* find(const std::string& phrase) const;
    std::size_t size() const { return table_.size(); }

  private:
    int dim_ = 0;
    std::map<std::string, Vector> table_;
};

// Provider backed by an EmbeddingStore. Unknown phrases either fall back to
// a HashedEmbedder of the same width or raise MissingEmbedding. source_path
// is echoed by describe() so an index header can name the store file.
class StoreEmbedder : public EmbeddingProvider {
  public:
    StoreEmbedder(EmbeddingStore store, bool hashed_fallback, std::string source_path = "");
    int dim() const override { return store_.dim(); }
    Vector embed(const std::string& phrase) const override;
    nlohmann::json describe() const override;

  private:
    EmbeddingStore store_;
    bool hashed_fallback_;
    HashedEmbedder fallback_;
    std::string source_path_;
};

// Rebuild a provider from its describe() JSON (used when opening an index).
std::shared_ptr<EmbeddingProvider> make_provider(const nlohmann::json& cfg);

// Per-graph numeric features in a fixed canonical row order.
struct FeatureBundle {
    Matrix node_features;                       // n x d, row i = node_order[i]
    Matrix edge_features;                       // m x d
    std::vector<std::pair<int, int>> edge_index;  // (source row, target row)
    std::vector<std::string> node_order;        // node ids in row order
};

FeatureBundle build_features(const SceneGraph& g, const EmbeddingProvider& provider);

}  // namespace pgr
