#include "pgr/alpha.hpp"

#include <algorithm>
#include <cmath>

#include "pgr/error.hpp"
#include "pgr/rng.hpp"

namespace pgr {

Vector AlphaFeatures::to_vector() const {
    Vector v(kDim);
    v << node_count, avg_degree, density, avg_shortest_path, mean_embedding_norm;
    return v;
}

AlphaFeatures alpha_features(const SceneGraph& g, const GraphEmbedding& emb) {
    GraphStats st = graph_stats(g);
    AlphaFeatures f;
    f.node_count = st.node_count;
    f.avg_degree = st.avg_degree;
    f.density = st.density;
    f.avg_shortest_path = st.avg_shortest_path;
    f.mean_embedding_norm = emb.norm;
    return f;
}

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_alpha(double a, const char* what) {
    if (!(a >= 0.0 && a <= 1.0))
        throw RangeError(std::string(what) + " must be in [0,1], got " + std::to_string(a));
}

// population standardization; constant columns get scale 1 so they map to 0
void standardize_stats(const Matrix& x, Vector& mean, Vector& scale) {
    mean = x.colwise().mean().transpose();
    scale.resize(x.cols());
    for (long c = 0; c < x.cols(); ++c) {
        double var = (x.col(c).array() - mean[c]).square().mean();
        double sd = std::sqrt(var);
        scale[c] = sd > 0.0 ? sd : 1.0;
    }
}

Matrix feature_matrix(const std::vector<AlphaFeatures>& xs) {
    Matrix x(static_cast<long>(xs.size()), AlphaFeatures::kDim);
    for (std::size_t i = 0; i < xs.size(); ++i) x.row(static_cast<long>(i)) = xs[i].to_vector();
    return x;
}

}  // namespace

AlphaPolicy AlphaPolicy::constant(double alpha) {
    check_alpha(alpha, "constant alpha");
    AlphaPolicy p;
    p.kind_ = Kind::constant;
    p.constant_ = alpha;
    return p;
}

AlphaPolicy AlphaPolicy::threshold(std::vector<ThresholdRule> rules, double fallback) {
    check_alpha(fallback, "fallback alpha");
    for (const auto& r : rules) check_alpha(r.alpha, "rule alpha");
    std::sort(rules.begin(), rules.end(),
              [](const ThresholdRule& a, const ThresholdRule& b) {
                  return a.max_nodes < b.max_nodes;
              });
    AlphaPolicy p;
    p.kind_ = Kind::threshold;
    p.rules_ = std::move(rules);
    p.fallback_ = fallback;
    return p;
}

AlphaPolicy AlphaPolicy::default_threshold() {
    return threshold({{8, 0.8}, {14, 0.5}}, 0.3);
}

AlphaPolicy AlphaPolicy::logistic(double w_nodes, double w_degree, double bias) {
    AlphaPolicy p;
    p.kind_ = Kind::logistic;
    p.w_nodes_ = w_nodes;
    p.w_degree_ = w_degree;
    p.bias_ = bias;
    return p;
}

AlphaPolicy AlphaPolicy::default_logistic() { return logistic(-0.3, -0.5, 4.0); }

double AlphaPolicy::evaluate(const AlphaFeatures& f) const {
    switch (kind_) {
        case Kind::constant:
            return constant_;
        case Kind::threshold: {
            for (const auto& r : rules_)
                if (f.node_count <= r.max_nodes) return r.alpha;
            return fallback_;
        }
        case Kind::logistic:
            return sigmoid(w_nodes_ * f.node_count + w_degree_ * f.avg_degree + bias_);
        case Kind::ridge: {
            if (weights_.size() != AlphaFeatures::kDim)
                throw UntrainedRegressor("ridge policy has no fitted weights");
            Vector z = (f.to_vector() - mean_).cwiseQuotient(scale_);
            return clamp01(weights_.dot(z) + lin_bias_);
        }
        case Kind::mlp: {
            if (w1_.size() == 0)
                throw UntrainedRegressor("mlp policy has no fitted weights");
            Vector z = (f.to_vector() - mean_).cwiseQuotient(scale_);
            Vector h = (w1_ * z + b1_).array().tanh().matrix();
            return clamp01(w2_.dot(h) + b2_);
        }
    }
    throw RangeError("unknown alpha policy kind");
}

nlohmann::json AlphaPolicy::to_json() const {
    nlohmann::json j;
    auto dump_vec = [](const Vector& v) {
        nlohmann::json a = nlohmann::json::array();
        for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
        return a;
    };
    switch (kind_) {
        case Kind::constant:
            j["kind"] = "constant";
            j["alpha"] = constant_;
            break;
        case Kind::threshold: {
            j["kind"] = "threshold";
            auto& rules = j["rules"] = nlohmann::json::array();
            for (const auto& r : rules_)
                rules.push_back({{"max_nodes", r.max_nodes}, {"alpha", r.alpha}});
            j["fallback"] = fallback_;
            break;
        }
        case Kind::logistic:
            j["kind"] = "logistic";
            j["w_nodes"] = w_nodes_;
            j["w_degree"] = w_degree_;
            j["bias"] = bias_;
            break;
        case Kind::ridge:
            j["kind"] = "ridge";
            j["mean"] = dump_vec(mean_);
            j["scale"] = dump_vec(scale_);
            j["weights"] = dump_vec(weights_);
            j["bias"] = lin_bias_;
            break;
        case Kind::mlp: {
            j["kind"] = "mlp";
            j["mean"] = dump_vec(mean_);
            j["scale"] = dump_vec(scale_);
            auto& w1 = j["w1"] = nlohmann::json::array();
            for (long r = 0; r < w1_.rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (long c = 0; c < w1_.cols(); ++c) row.push_back(w1_(r, c));
                w1.push_back(row);
            }
            j["b1"] = dump_vec(b1_);
            j["w2"] = dump_vec(w2_);
            j["b2"] = b2_;
            break;
        }
    }
    return j;
}

AlphaPolicy AlphaPolicy::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw SchemaError("alpha policy JSON needs a \"kind\" field");
    auto load_vec = [](const nlohmann::json& a) {
        Vector v(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<long>(i)] = a[i].get<double>();
        return v;
    };
    std::string kind = j["kind"].get<std::string>();
    if (kind == "constant") return constant(j.at("alpha").get<double>());
    if (kind == "threshold") {
        std::vector<ThresholdRule> rules;
        for (const auto& r : j.at("rules"))
            rules.push_back({r.at("max_nodes").get<int>(), r.at("alpha").get<double>()});
        return threshold(std::move(rules), j.at("fallback").get<double>());
    }
    if (kind == "logistic")
        return logistic(j.at("w_nodes").get<double>(), j.at("w_degree").get<double>(),
                        j.at("bias").get<double>());
    if (kind == "ridge") {
        AlphaPolicy p;
        p.kind_ = Kind::ridge;
        p.mean_ = load_vec(j.at("mean"));
        p.scale_ = load_vec(j.at("scale"));
        p.weights_ = load_vec(j.at("weights"));
        p.lin_bias_ = j.at("bias").get<double>();
        return p;
    }
    if (kind == "mlp") {
        AlphaPolicy p;
        p.kind_ = Kind::mlp;
        p.mean_ = load_vec(j.at("mean"));
        p.scale_ = load_vec(j.at("scale"));
        const auto& w1 = j.at("w1");
        p.w1_.resize(static_cast<long>(w1.size()), w1.empty() ? 0 : static_cast<long>(w1[0].size()));
        for (std::size_t r = 0; r < w1.size(); ++r)
            for (std::size_t c = 0; c < w1[r].size(); ++c)
                p.w1_(static_cast<long>(r), static_cast<long>(c)) = w1[r][c].get<double>();
        p.b1_ = load_vec(j.at("b1"));
        p.w2_ = load_vec(j.at("w2"));
        p.b2_ = j.at("b2").get<double>();
        return p;
    }
    throw SchemaError("unknown alpha policy kind '" + kind + "'");
}

AlphaPolicy AlphaPolicy::fit_ridge(const std::vector<AlphaFeatures>& xs,
                                   const std::vector<double>& ys, double lambda) {
    if (xs.empty() || xs.size() != ys.size())
        throw EmptyDataset("ridge fit needs matching non-empty features and targets");
    if (lambda < 0.0) throw RangeError("ridge lambda must be >= 0");
    const long n = static_cast<long>(xs.size());
    Matrix x = feature_matrix(xs);
    AlphaPolicy p;
    p.kind_ = Kind::ridge;
    standardize_stats(x, p.mean_, p.scale_);
    Matrix z(n, AlphaFeatures::kDim);
    for (long r = 0; r < n; ++r)
        z.row(r) = (x.row(r).transpose() - p.mean_).cwiseQuotient(p.scale_).transpose();
    Vector y(n);
    for (long i = 0; i < n; ++i) y[i] = ys[static_cast<std::size_t>(i)];

    // augmented normal equations; the bias column carries no penalty
    Matrix a(n, AlphaFeatures::kDim + 1);
    a.leftCols(AlphaFeatures::kDim) = z;
    a.col(AlphaFeatures::kDim).setOnes();
    Matrix gram = a.transpose() * a;
    for (int k = 0; k < AlphaFeatures::kDim; ++k) gram(k, k) += lambda;
    Vector beta = gram.ldlt().solve(a.transpose() * y);
    p.weights_ = beta.head(AlphaFeatures::kDim);
    p.lin_bias_ = beta[AlphaFeatures::kDim];
    return p;
}

AlphaPolicy AlphaPolicy::fit_mlp(const std::vector<AlphaFeatures>& xs,
                                 const std::vector<double>& ys, std::uint64_t seed, int hidden,
                                 int epochs, double lr) {
    if (xs.empty() || xs.size() != ys.size())
        throw EmptyDataset("mlp fit needs matching non-empty features and targets");
    if (hidden < 1 || epochs < 1 || !(lr > 0.0)) throw RangeError("bad mlp fit settings");
    const long n = static_cast<long>(xs.size());
    const int d = AlphaFeatures::kDim;
    Matrix x = feature_matrix(xs);
    AlphaPolicy p;
    p.kind_ = Kind::mlp;
    standardize_stats(x, p.mean_, p.scale_);
    Matrix z(n, d);
    for (long r = 0; r < n; ++r)
        z.row(r) = (x.row(r).transpose() - p.mean_).cwiseQuotient(p.scale_).transpose();
    Vector y(n);
    for (long i = 0; i < n; ++i) y[i] = ys[static_cast<std::size_t>(i)];

    Rng rng(seed);
    auto xavier = [&](long rows, long cols) {
        double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Matrix m(rows, cols);
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
        return m;
    };
    Matrix w1 = xavier(hidden, d);
    Vector b1 = Vector::Zero(hidden);
    Vector w2 = xavier(hidden, 1).col(0);
    double b2 = 0.0;

    // flat parameter vector for Adam: [w1, b1, w2, b2]
    const long sz = w1.size() + b1.size() + w2.size() + 1;
    Vector theta(sz), grad(sz);
    auto pack = [&](Vector& out) {
        long off = 0;
        for (long k = 0; k < w1.size(); ++k) out[off++] = w1.data()[k];
        for (long k = 0; k < b1.size(); ++k) out[off++] = b1[k];
        for (long k = 0; k < w2.size(); ++k) out[off++] = w2[k];
        out[off] = b2;
    };
    auto unpack = [&](const Vector& in) {
        long off = 0;
        for (long k = 0; k < w1.size(); ++k) w1.data()[k] = in[off++];
        for (long k = 0; k < b1.size(); ++k) b1[k] = in[off++];
        for (long k = 0; k < w2.size(); ++k) w2[k] = in[off++];
        b2 = in[off];
    };
    pack(theta);

    // plain full-batch Adam on MSE
    Vector m = Vector::Zero(sz), v = Vector::Zero(sz);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= epochs; ++t) {
        unpack(theta);
        Matrix pre = z * w1.transpose();            // n x hidden
        pre.rowwise() += b1.transpose();
        Matrix h = pre.array().tanh().matrix();
        Vector pred = h * w2 + Vector::Constant(n, b2);
        Vector resid = pred - y;                     // d(mse)/d(pred) * n/2
        double inv_n = 2.0 / static_cast<double>(n);

        Vector d_pred = inv_n * resid;
        Vector d_w2 = h.transpose() * d_pred;
        double d_b2 = d_pred.sum();
        Matrix d_h = d_pred * w2.transpose();        // n x hidden
        Matrix d_pre = (d_h.array() * (1.0 - h.array().square())).matrix();
        Matrix d_w1 = d_pre.transpose() * z;
        Vector d_b1 = d_pre.colwise().sum().transpose();

        long off = 0;
        for (long k = 0; k < d_w1.size(); ++k) grad[off++] = d_w1.data()[k];
        for (long k = 0; k < d_b1.size(); ++k) grad[off++] = d_b1[k];
        for (long k = 0; k < d_w2.size(); ++k) grad[off++] = d_w2[k];
        grad[off] = d_b2;

        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        double bc1 = 1.0 - std::pow(beta1, t), bc2 = 1.0 - std::pow(beta2, t);
        theta -= lr * ((m / bc1).array() / ((v / bc2).array().sqrt() + eps)).matrix();
    }
    unpack(theta);
    p.w1_ = w1;
    p.b1_ = b1;
    p.w2_ = w2;
    p.b2_ = b2;
    return p;
}

}  // namespace pgr
