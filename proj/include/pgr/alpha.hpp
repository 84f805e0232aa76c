#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pgr/gat.hpp"
#include "pgr/scene_graph.hpp"
#include "pgr/types.hpp"

namespace pgr {

// Query-side signals used to pick the semantic/structural fusion weight.
struct AlphaFeatures {
    double node_count = 0;
    double avg_degree = 0;
    double density = 0;
    double avg_shortest_path = 0;
    double mean_embedding_norm = 0;  // pooled norm before L2 normalization

    Vector to_vector() const;
    static constexpr int kDim = 5;
};

AlphaFeatures alpha_features(const SceneGraph& g, const GraphEmbedding& emb);

// node_count <= max_nodes picks this rule's alpha; rules are checked in
// ascending max_nodes order and the fallback covers everything larger.
struct ThresholdRule {
    int max_nodes = 0;
    double alpha = 0.5;
};

// Fusion-weight selector. Four flavors share one serialized form so the CLI
// can load whichever was fitted.
class AlphaPolicy {
  public:
    enum class Kind { constant, threshold, logistic, ridge, mlp };

    AlphaPolicy() = default;  // constant 0.5

    static AlphaPolicy constant(double alpha);
    static AlphaPolicy threshold(std::vector<ThresholdRule> rules, double fallback);
    static AlphaPolicy default_threshold();  // <=8: 0.8, <=14: 0.5, else 0.3
    static AlphaPolicy logistic(double w_nodes, double w_degree, double bias);
    static AlphaPolicy default_logistic();   // w_nodes -0.3, w_degree -0.5, bias 4.0

    Kind kind() const { return kind_; }
    // Result always lies in [0,1]; regressor outputs are clamped.
    double evaluate(const AlphaFeatures& f) const;

    nlohmann::json to_json() const;
    static AlphaPolicy from_json(const nlohmann::json& j);

    // Closed-form ridge fit on standardized features, bias unpenalized.
    static AlphaPolicy fit_ridge(const std::vector<AlphaFeatures>& xs,
                                 const std::vector<double>& ys, double lambda = 1e-8);
    // Small tanh network fit with Adam; deterministic for a fixed seed.
    static AlphaPolicy fit_mlp(const std::vector<AlphaFeatures>& xs,
                               const std::vector<double>& ys, std::uint64_t seed = 0,
                               int hidden = 16, int epochs = 500, double lr = 0.01);

  private:
    Kind kind_ = Kind::constant;
    double constant_ = 0.5;

    std::vector<ThresholdRule> rules_;
    double fallback_ = 0.5;

    double w_nodes_ = 0, w_degree_ = 0, bias_ = 0;

    // shared by ridge and mlp: feature standardization
    Vector mean_, scale_;
    // ridge
    Vector weights_;
    double lin_bias_ = 0;
    // mlp
    Matrix w1_;
    Vector b1_, w2_;
    double b2_ = 0;
};

}  // namespace pgr
