#pragma once

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgr/error.hpp"
#include "pgr/features.hpp"
#include "pgr/rng.hpp"
#include "pgr/types.hpp"
#include "pgr/util.hpp"

namespace pgr {

struct GatConfig {
    int num_layers = 2;      // 1, 2 or 3
    int heads = 4;
    int hidden_dim = 256;    // concatenated across heads; divisible by heads
    int output_dim = 1024;
    double leaky_relu_slope = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_layers < 1 || num_layers > 3)
            throw RangeError("num_layers must be 1, 2 or 3, got " + std::to_string(num_layers));
        if (heads <= 0) throw RangeError("heads must be positive");
        if (hidden_dim <= 0 || output_dim <= 0)
            throw RangeError("hidden_dim and output_dim must be positive");
        if (hidden_dim % heads != 0)
            throw RangeError("hidden_dim " + std::to_string(hidden_dim) +
                             " is not divisible by heads " + std::to_string(heads));
        if (!(leaky_relu_slope > 0.0) || leaky_relu_slope >= 1.0)
            throw RangeError("leaky_relu_slope must be in (0,1)");
    }

    nlohmann::json to_json() const {
        return {{"num_layers", num_layers},   {"heads", heads},
                {"hidden_dim", hidden_dim},   {"output_dim", output_dim},
                {"leaky_relu_slope", leaky_relu_slope}, {"seed", seed}};
    }
    static GatConfig from_json(const nlohmann::json& j) {
        GatConfig c;
        c.num_layers = j.value("num_layers", c.num_layers);
        c.heads = j.value("heads", c.heads);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.output_dim = j.value("output_dim", c.output_dim);
        c.leaky_relu_slope = j.value("leaky_relu_slope", c.leaky_relu_slope);
        c.seed = j.value("seed", c.seed);
        return c;
    }
};

template <class Scalar>
struct GatHeadParams {
    MatX<Scalar> w_node;   // head_dim x in_dim
    MatX<Scalar> w_edge;   // head_dim x edge_dim
    VecX<Scalar> attn;     // 3 * head_dim
};

template <class Scalar>
struct GatParameters {
    GatConfig config;
    int input_dim = 0;
    int edge_dim = 0;
    std::vector<std::vector<GatHeadParams<Scalar>>> layers;  // [layer][head]
    MatX<Scalar> projection;  // output_dim x hidden_dim, no bias

    int head_dim() const { return config.hidden_dim / config.heads; }
};

// Applies fn(name, tensor) to every parameter tensor in a fixed order. The
// same order is used for checkpoints, flattening and the optimizer state.
template <class Params, class Fn>
void visit_tensors(Params& p, Fn&& fn) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t h = 0; h < p.layers[l].size(); ++h) {
            std::string prefix = "layer" + std::to_string(l) + ".head" + std::to_string(h) + ".";
            fn(prefix + "w_node", p.layers[l][h].w_node);
            fn(prefix + "w_edge", p.layers[l][h].w_edge);
            fn(prefix + "attn", p.layers[l][h].attn);
        }
    }
    fn(std::string("projection"), p.projection);
}

template <class Scalar>
int parameter_count(const GatParameters<Scalar>& p) {
    long total = 0;
    visit_tensors(p, [&](const std::string&, const auto& t) { total += t.size(); });
    return static_cast<int>(total);
}

template <class Scalar>
VecX<Scalar> flatten_parameters(const GatParameters<Scalar>& p) {
    VecX<Scalar> flat(parameter_count(p));
    long off = 0;
    visit_tensors(p, [&](const std::string&, const auto& t) {
        for (long k = 0; k < t.size(); ++k) flat[off++] = t.data()[k];
    });
    return flat;
}

template <class Scalar>
void assign_from_flat(GatParameters<Scalar>& p, const VecX<Scalar>& flat) {
    if (flat.size() != parameter_count(p))
        throw DimensionMismatch("flat vector size does not match parameter count");
    long off = 0;
    visit_tensors(p, [&](const std::string&, auto& t) {
        for (long k = 0; k < t.size(); ++k) t.data()[k] = flat[off++];
    });
}

namespace detail {

template <class Scalar>
void xavier_fill(Eigen::Ref<MatX<Scalar>> t, int fan_in, int fan_out, Rng& rng) {
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    // row-major fill so the stream of draws matches the checkpoint layout
    for (long r = 0; r < t.rows(); ++r)
        for (long c = 0; c < t.cols(); ++c)
            t(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
}

}  // namespace detail

template <class Scalar = double>
GatParameters<Scalar> init_params(const GatConfig& cfg, int input_dim, int edge_dim) {
    cfg.validate();
    if (input_dim <= 0 || edge_dim <= 0)
        throw DimensionMismatch("feature dims must be positive");
    GatParameters<Scalar> p;
    p.config = cfg;
    p.input_dim = input_dim;
    p.edge_dim = edge_dim;
    const int hd = p.head_dim();
    Rng rng(cfg.seed);
    p.layers.resize(cfg.num_layers);
    for (int l = 0; l < cfg.num_layers; ++l) {
        const int in_dim = (l == 0) ? input_dim : cfg.hidden_dim;
        p.layers[l].resize(cfg.heads);
        for (int h = 0; h < cfg.heads; ++h) {
            auto& hp = p.layers[l][h];
            hp.w_node.resize(hd, in_dim);
            hp.w_edge.resize(hd, edge_dim);
            hp.attn.resize(3 * hd);
            detail::xavier_fill<Scalar>(hp.w_node, in_dim, hd, rng);
            detail::xavier_fill<Scalar>(hp.w_edge, edge_dim, hd, rng);
            MatX<Scalar> a_view(3 * hd, 1);
            detail::xavier_fill<Scalar>(a_view, 3 * hd, 1, rng);
            hp.attn = a_view.col(0);
        }
    }
    p.projection.resize(cfg.output_dim, cfg.hidden_dim);
    detail::xavier_fill<Scalar>(p.projection, cfg.hidden_dim, cfg.output_dim, rng);
    return p;
}

template <class To, class From>
GatParameters<To> cast_parameters(const GatParameters<From>& p) {
    GatParameters<To> out;
    out.config = p.config;
    out.input_dim = p.input_dim;
    out.edge_dim = p.edge_dim;
    out.layers.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        out.layers[l].resize(p.layers[l].size());
        for (std::size_t h = 0; h < p.layers[l].size(); ++h) {
            out.layers[l][h].w_node = p.layers[l][h].w_node.template cast<To>();
            out.layers[l][h].w_edge = p.layers[l][h].w_edge.template cast<To>();
            out.layers[l][h].attn = p.layers[l][h].attn.template cast<To>();
        }
    }
    out.projection = p.projection.template cast<To>();
    return out;
}

template <class Scalar>
GatParameters<Scalar> zero_like(const GatParameters<Scalar>& p) {
    GatParameters<Scalar> z = p;
    visit_tensors(z, [](const std::string&, auto& t) { t.setZero(); });
    return z;
}

template <class Scalar>
struct GraphEmbeddingT {
    VecX<Scalar> vector;  // unit norm, size output_dim
    Scalar norm = 0;      // norm of the pooled vector before normalization
};
using GraphEmbedding = GraphEmbeddingT<double>;

// Everything the backward pass needs, captured during forward.
template <class Scalar>
struct GatCache {
    int n = 0, m = 0;
    // per node: (neighbor row, edge row) pairs; the self-loop is entry 0
    // with edge row -1 and carries a zero edge feature
    std::vector<std::vector<std::pair<int, int>>> in_nbrs;
    MatX<Scalar> edge_feats;                       // m x edge_dim
    std::vector<MatX<Scalar>> layer_inputs;        // [L+1], n x d_l
    struct HeadCache {
        MatX<Scalar> p;   // n x head_dim, rows W h_i
        MatX<Scalar> q;   // m x head_dim, rows W_e f_e
        std::vector<std::vector<Scalar>> logits;   // raw pre-LeakyReLU scores
        std::vector<std::vector<Scalar>> alphas;   // attention weights
        MatX<Scalar> pre_act;                      // n x head_dim, pre-ELU sums
    };
    std::vector<std::vector<HeadCache>> heads;     // [layer][head]
    MatX<Scalar> projected;                        // n x output_dim
    VecX<Scalar> pooled;                           // output_dim, before normalize
    Scalar pooled_norm = 0;
};

namespace detail {

template <class Scalar>
Scalar elu(Scalar x) {
    return x > Scalar(0) ? x : std::expm1(x);
}
template <class Scalar>
Scalar elu_grad(Scalar x) {
    return x > Scalar(0) ? Scalar(1) : std::exp(x);
}
template <class Scalar>
Scalar leaky_relu(Scalar x, Scalar slope) {
    return x > Scalar(0) ? x : slope * x;
}
template <class Scalar>
Scalar leaky_relu_grad(Scalar x, Scalar slope) {
    return x > Scalar(0) ? Scalar(1) : slope;
}

}  // namespace detail

template <class Scalar>
GraphEmbeddingT<Scalar> gat_forward(const FeatureBundle& fb, const GatParameters<Scalar>& params,
                                    GatCache<Scalar>* cache = nullptr) {
    const GatConfig& cfg = params.config;
    const int n = static_cast<int>(fb.node_features.rows());
    const int m = static_cast<int>(fb.edge_features.rows());
    if (n == 0) throw EmptyInput("cannot encode a graph with no nodes");
    if (static_cast<int>(fb.node_features.cols()) != params.input_dim)
        throw DimensionMismatch("node features have width " +
                                std::to_string(fb.node_features.cols()) + ", model expects " +
                                std::to_string(params.input_dim));
    if (m > 0 && static_cast<int>(fb.edge_features.cols()) != params.edge_dim)
        throw DimensionMismatch("edge features have width " +
                                std::to_string(fb.edge_features.cols()) + ", model expects " +
                                std::to_string(params.edge_dim));
    const int hd = params.head_dim();
    const Scalar slope = static_cast<Scalar>(cfg.leaky_relu_slope);

    GatCache<Scalar> local;
    GatCache<Scalar>& cc = cache ? *cache : local;
    cc = GatCache<Scalar>{};
    cc.n = n;
    cc.m = m;
    cc.edge_feats = fb.edge_features.template cast<Scalar>();

    // in-neighborhood with self-loop first, then edges in row order
    cc.in_nbrs.assign(n, {});
    for (int i = 0; i < n; ++i) cc.in_nbrs[i].push_back({i, -1});
    for (int e = 0; e < m; ++e) {
        auto [src, tgt] = fb.edge_index[e];
        if (src < 0 || src >= n || tgt < 0 || tgt >= n)
            throw DimensionMismatch("edge index out of range");
        cc.in_nbrs[tgt].push_back({src, e});
    }

    cc.layer_inputs.resize(cfg.num_layers + 1);
    cc.layer_inputs[0] = fb.node_features.template cast<Scalar>();
    cc.heads.resize(cfg.num_layers);

    for (int l = 0; l < cfg.num_layers; ++l) {
        const MatX<Scalar>& H = cc.layer_inputs[l];
        MatX<Scalar> out(n, cfg.hidden_dim);
        cc.heads[l].resize(cfg.heads);
        for (int h = 0; h < cfg.heads; ++h) {
            const auto& hp = params.layers[l][h];
            auto& hc = cc.heads[l][h];
            hc.p.noalias() = H * hp.w_node.transpose();                 // n x hd
            hc.q.resize(m, hd);
            if (m > 0) hc.q.noalias() = cc.edge_feats * hp.w_edge.transpose();
            hc.logits.assign(n, {});
            hc.alphas.assign(n, {});
            hc.pre_act.resize(n, hd);

            const auto a_self = hp.attn.head(hd);
            const auto a_nbr = hp.attn.segment(hd, hd);
            const auto a_edge = hp.attn.tail(hd);
            VecX<Scalar> self_score = hc.p * a_self;   // a_self . p_i per node
            VecX<Scalar> nbr_score = hc.p * a_nbr;     // a_nbr  . p_j per node
            VecX<Scalar> edge_score;
            if (m > 0) edge_score = hc.q * a_edge;     // a_edge . q_e per edge

            for (int i = 0; i < n; ++i) {
                const auto& nbrs = cc.in_nbrs[i];
                auto& lg = hc.logits[i];
                auto& al = hc.alphas[i];
                lg.resize(nbrs.size());
                al.resize(nbrs.size());
                Scalar max_act = -std::numeric_limits<Scalar>::infinity();
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    auto [j, e] = nbrs[k];
                    Scalar t = self_score[i] + nbr_score[j];
                    if (e >= 0) t += edge_score[e];
                    lg[k] = t;
                    max_act = std::max(max_act, detail::leaky_relu(t, slope));
                }
                Scalar denom = 0;
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    al[k] = std::exp(detail::leaky_relu(lg[k], slope) - max_act);
                    denom += al[k];
                }
                VecX<Scalar> acc = VecX<Scalar>::Zero(hd);
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    al[k] /= denom;
                    auto [j, e] = nbrs[k];
                    if (e >= 0)
                        acc += al[k] * (hc.p.row(j) + hc.q.row(e)).transpose();
                    else
                        acc += al[k] * hc.p.row(j).transpose();
                }
                hc.pre_act.row(i) = acc.transpose();
                for (int c = 0; c < hd; ++c) out(i, h * hd + c) = detail::elu(acc[c]);
            }
        }
        cc.layer_inputs[l + 1] = std::move(out);
    }

    cc.projected.noalias() = cc.layer_inputs[cfg.num_layers] * params.projection.transpose();
    cc.pooled = cc.projected.colwise().mean().transpose();
    cc.pooled_norm = cc.pooled.norm();
    GraphEmbeddingT<Scalar> emb;
    emb.norm = cc.pooled_norm;
    if (cc.pooled_norm == Scalar(0))
        throw NormViolation("pooled graph embedding has zero norm");
    emb.vector = cc.pooled / cc.pooled_norm;
    return emb;
}

// Exact gradients of a scalar loss with respect to every parameter, given
// the gradient with respect to the normalized output embedding.
template <class Scalar>
GatParameters<Scalar> gat_backward(const VecX<Scalar>& grad_embedding,
                                   const GatParameters<Scalar>& params,
                                   const GatCache<Scalar>& cc) {
    const GatConfig& cfg = params.config;
    const int n = cc.n;
    const int m = cc.m;
    const int hd = params.head_dim();
    const Scalar slope = static_cast<Scalar>(cfg.leaky_relu_slope);
    if (cc.layer_inputs.size() != static_cast<std::size_t>(cfg.num_layers) + 1 ||
        static_cast<int>(grad_embedding.size()) != cfg.output_dim ||
        static_cast<int>(cc.layer_inputs.front().cols()) != params.input_dim ||
        static_cast<int>(cc.layer_inputs.back().cols()) != cfg.hidden_dim ||
        static_cast<int>(cc.projected.cols()) != cfg.output_dim)
        throw StaleCache("forward cache does not match model configuration");

    GatParameters<Scalar> grads = zero_like(params);

    // normalize: z = u / r  =>  du = (g - (g.z) z) / r
    VecX<Scalar> z = cc.pooled / cc.pooled_norm;
    VecX<Scalar> g_pooled = (grad_embedding - z.dot(grad_embedding) * z) / cc.pooled_norm;

    // mean pool over rows, then the shared projection
    MatX<Scalar> g_proj_rows(n, cfg.output_dim);
    for (int i = 0; i < n; ++i) g_proj_rows.row(i) = g_pooled.transpose() / Scalar(n);
    grads.projection.noalias() = g_proj_rows.transpose() * cc.layer_inputs[cfg.num_layers];
    MatX<Scalar> g_h = g_proj_rows * params.projection;  // n x hidden

    for (int l = cfg.num_layers - 1; l >= 0; --l) {
        const MatX<Scalar>& H = cc.layer_inputs[l];
        MatX<Scalar> g_h_prev = MatX<Scalar>::Zero(H.rows(), H.cols());
        for (int h = 0; h < cfg.heads; ++h) {
            const auto& hp = params.layers[l][h];
            const auto& hc = cc.heads[l][h];
            auto& hg = grads.layers[l][h];
            const auto a_self = hp.attn.head(hd);
            const auto a_nbr = hp.attn.segment(hd, hd);
            const auto a_edge = hp.attn.tail(hd);
            auto da_self = hg.attn.head(hd);
            auto da_nbr = hg.attn.segment(hd, hd);
            auto da_edge = hg.attn.tail(hd);

            MatX<Scalar> dP = MatX<Scalar>::Zero(n, hd);
            MatX<Scalar> dQ = MatX<Scalar>::Zero(m, hd);

            for (int i = 0; i < n; ++i) {
                const auto& nbrs = cc.in_nbrs[i];
                const auto& lg = hc.logits[i];
                const auto& al = hc.alphas[i];
                // through ELU into the weighted sum s_i
                VecX<Scalar> ds(hd);
                for (int c = 0; c < hd; ++c)
                    ds[c] = g_h(i, h * hd + c) * detail::elu_grad(hc.pre_act(i, c));

                // message values m_k = p_j (+ q_e); d alpha_k = ds . m_k
                std::vector<Scalar> dal(nbrs.size());
                Scalar dot = 0;
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    auto [j, e] = nbrs[k];
                    Scalar g = ds.dot(hc.p.row(j));
                    if (e >= 0) g += ds.dot(hc.q.row(e));
                    dal[k] = g;
                    dot += al[k] * dal[k];
                    dP.row(j) += al[k] * ds.transpose();
                    if (e >= 0) dQ.row(e) += al[k] * ds.transpose();
                }
                // softmax then LeakyReLU back to the raw logits
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    auto [j, e] = nbrs[k];
                    Scalar de = al[k] * (dal[k] - dot);
                    Scalar dt = de * detail::leaky_relu_grad(lg[k], slope);
                    if (dt == Scalar(0)) continue;
                    da_self += dt * hc.p.row(i).transpose();
                    da_nbr += dt * hc.p.row(j).transpose();
                    dP.row(i) += dt * a_self.transpose();
                    dP.row(j) += dt * a_nbr.transpose();
                    if (e >= 0) {
                        da_edge += dt * hc.q.row(e).transpose();
                        dQ.row(e) += dt * a_edge.transpose();
                    }
                }
            }

            hg.w_node.noalias() += dP.transpose() * H;
            g_h_prev.noalias() += dP * hp.w_node;
            if (m > 0) hg.w_edge.noalias() += dQ.transpose() * cc.edge_feats;
        }
        g_h = std::move(g_h_prev);
    }
    return grads;
}

// --- checkpoint I/O ------------------------------------------------------
// Format: one JSON header line describing config, dims and tensor shapes,
// followed by the tensors as raw little-endian float64 in declared order.

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <class Scalar>
void save_checkpoint(const GatParameters<Scalar>& params, const std::string& path) {
    nlohmann::json header;
    header["format"] = "pgr-gat-checkpoint";
    header["version"] = 1;
    header["config"] = params.config.to_json();
    header["input_dim"] = params.input_dim;
    header["edge_dim"] = params.edge_dim;
    auto& tensors = header["tensors"] = nlohmann::json::array();
    visit_tensors(params, [&](const std::string& name, const auto& t) {
        tensors.push_back({{"name", name},
                           {"rows", static_cast<long>(t.rows())},
                           {"cols", static_cast<long>(t.cols())}});
    });
    std::string out = header.dump();
    out += '\n';
    visit_tensors(params, [&](const std::string&, const auto& t) {
        for (long r = 0; r < t.rows(); ++r)
            for (long c = 0; c < t.cols(); ++c) {
                double v = static_cast<double>(t(r, c));
                char buf[sizeof(double)];
                std::memcpy(buf, &v, sizeof(double));
                out.append(buf, sizeof(double));
            }
    });
    write_file_atomic(path, out);
}

inline GatParameters<double> load_checkpoint(const std::string& path) {
    std::string blob = read_file(path);
    auto nl = blob.find('\n');
    if (nl == std::string::npos) throw SchemaError("checkpoint has no header line: " + path);
    nlohmann::json header = nlohmann::json::parse(blob.substr(0, nl), nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "pgr-gat-checkpoint")
        throw SchemaError("not a gat checkpoint: " + path);
    GatParameters<double> p;
    p.config = GatConfig::from_json(header.at("config"));
    p.config.validate();
    p.input_dim = header.at("input_dim").get<int>();
    p.edge_dim = header.at("edge_dim").get<int>();
    const int hd = p.config.hidden_dim / p.config.heads;
    p.layers.resize(p.config.num_layers);
    for (int l = 0; l < p.config.num_layers; ++l) {
        const int in_dim = (l == 0) ? p.input_dim : p.config.hidden_dim;
        p.layers[l].resize(p.config.heads);
        for (int h = 0; h < p.config.heads; ++h) {
            p.layers[l][h].w_node.resize(hd, in_dim);
            p.layers[l][h].w_edge.resize(hd, p.edge_dim);
            p.layers[l][h].attn.resize(3 * hd);
        }
    }
    p.projection.resize(p.config.output_dim, p.config.hidden_dim);

    std::size_t off = nl + 1;
    std::size_t t_idx = 0;
    const auto& tensors = header.at("tensors");
    visit_tensors(p, [&](const std::string& name, auto& t) {
        if (t_idx >= tensors.size()) throw SchemaError("checkpoint header lists too few tensors");
        const auto& decl = tensors[t_idx++];
        if (decl.at("name").get<std::string>() != name ||
            decl.at("rows").get<long>() != t.rows() || decl.at("cols").get<long>() != t.cols())
            throw SchemaError("checkpoint tensor " + name + " does not match the config shapes");
        std::size_t bytes = static_cast<std::size_t>(t.size()) * sizeof(double);
        if (off + bytes > blob.size()) throw SchemaError("checkpoint is truncated: " + path);
        for (long r = 0; r < t.rows(); ++r)
            for (long c = 0; c < t.cols(); ++c) {
                double v;
                std::memcpy(&v, blob.data() + off, sizeof(double));
                off += sizeof(double);
                t(r, c) = v;
            }
    });
    if (off != blob.size()) throw SchemaError("checkpoint has trailing bytes: " + path);
    return p;
}

// Content hash of a checkpoint file, stored in index headers so stale
// indexes can be detected when the model changes.
inline std::string checkpoint_hash(const std::string& path) {
    std::string blob = read_file(path);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(blob)));
    return std::string(buf);
}

}  // namespace pgr
