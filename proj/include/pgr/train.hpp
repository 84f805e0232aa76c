#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgr/error.hpp"
#include "pgr/features.hpp"
#include "pgr/gat.hpp"
#include "pgr/scene_graph.hpp"
#include "pgr/types.hpp"

namespace pgr {

struct TrainConfig {
    double tau = 0.07;
    int batch_size = 128;        // pairs per batch
    int epochs = 500;
    double lr = 1e-4;
    double weight_decay = 1e-5;  // decoupled
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const {
        if (!(tau > 0.0)) throw RangeError("tau must be positive");
        if (batch_size < 1) throw RangeError("batch_size must be >= 1");
        if (epochs < 1) throw RangeError("epochs must be >= 1");
        if (!(lr > 0.0)) throw RangeError("lr must be positive");
        if (weight_decay < 0.0) throw RangeError("weight_decay must be >= 0");
    }

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

// Cosine annealing from lr0 at step 0 to exactly 0 at step total.
inline double cosine_lr(double lr0, long step, long total) {
    if (total <= 0) throw RangeError("total steps must be positive");
    if (step < 0) step = 0;
    if (step > total) step = total;
    return lr0 * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) /
                                       static_cast<double>(total)));
}

// Decoupled-weight-decay Adam over a flat parameter vector.
template <class Scalar>
class AdamW {
  public:
    AdamW(long size, Scalar beta1 = Scalar(0.9), Scalar beta2 = Scalar(0.999),
          Scalar eps = Scalar(1e-8))
        : beta1_(beta1), beta2_(beta2), eps_(eps),
          m_(VecX<Scalar>::Zero(size)), v_(VecX<Scalar>::Zero(size)) {}

    void step(VecX<Scalar>& theta, const VecX<Scalar>& grad, Scalar lr, Scalar weight_decay) {
        if (theta.size() != m_.size() || grad.size() != m_.size())
            throw DimensionMismatch("optimizer state does not match parameter size");
        ++t_;
        m_ = beta1_ * m_ + (Scalar(1) - beta1_) * grad;
        v_ = beta2_ * v_ + (Scalar(1) - beta2_) * grad.cwiseProduct(grad);
        const Scalar bc1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
        const Scalar bc2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
        VecX<Scalar> mhat = m_ / bc1;
        VecX<Scalar> vhat = v_ / bc2;
        theta -= lr * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
        if (weight_decay > Scalar(0)) theta -= lr * weight_decay * theta;
    }

    long steps_taken() const { return t_; }

  private:
    Scalar beta1_, beta2_, eps_;
    long t_ = 0;
    VecX<Scalar> m_, v_;
};

struct PairExample {
    std::string place_id;
    SceneGraph anchor;
    SceneGraph positive;
};
using PairDataset = std::vector<PairExample>;

PairDataset load_pair_dataset(const std::string& path);
void save_pair_dataset(const PairDataset& ds, const std::string& path);

struct TrainReport {
    std::vector<double> epoch_losses;  // mean batch loss per epoch
    std::vector<double> lr_trace;      // lr used at each optimizer step
    long total_steps = 0;
};

// Trains params in place with in-batch contrastive pairs. Deterministic for
// a fixed (params seed, cfg.seed, dataset) triple, independent of cfg.jobs.
TrainReport train(GatParameters<double>& params, const PairDataset& dataset,
                  const EmbeddingProvider& provider, const TrainConfig& cfg,
                  const std::function<void(int epoch, double loss)>& progress = {});

}  // namespace pgr
