#include "pgr/train.hpp"

#include <algorithm>
#include <cmath>

#include "pgr/infonce.hpp"
#include "pgr/rng.hpp"
#include "pgr/util.hpp"

namespace pgr {

nlohmann::json TrainConfig::to_json() const {
    return {{"tau", tau},
            {"batch_size", batch_size},
            {"epochs", epochs},
            {"lr", lr},
            {"weight_decay", weight_decay},
            {"seed", seed},
            {"jobs", jobs}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.tau = j.value("tau", c.tau);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    return c;
}

PairDataset load_pair_dataset(const std::string& path) {
    PairDataset ds;
    auto lines = split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json j = nlohmann::json::parse(lines[i], nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("place_id") ||
            !j.contains("anchor") || !j.contains("positive"))
            throw SchemaError("bad pair record at line " + std::to_string(i + 1) + " of " + path);
        PairExample ex;
        ex.place_id = j["place_id"].get<std::string>();
        ex.anchor = parse_scene_graph(j["anchor"]);
        ex.positive = parse_scene_graph(j["positive"]);
        ds.push_back(std::move(ex));
    }
    return ds;
}

void save_pair_dataset(const PairDataset& ds, const std::string& path) {
    std::string out;
    for (const auto& ex : ds) {
        nlohmann::json j;
        j["place_id"] = ex.place_id;
        j["anchor"] = to_json(ex.anchor);
        j["positive"] = to_json(ex.positive);
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

TrainReport train(GatParameters<double>& params, const PairDataset& dataset,
                  const EmbeddingProvider& provider, const TrainConfig& cfg,
                  const std::function<void(int, double)>& progress) {
    cfg.validate();
    if (dataset.empty()) throw EmptyDataset("training dataset has no pairs");

    // features are static; encode every graph once
    std::vector<FeatureBundle> bundles(dataset.size() * 2);
    parallel_for(dataset.size(), cfg.jobs, [&](std::size_t k) {
        bundles[2 * k] = build_features(dataset[k].anchor, provider);
        bundles[2 * k + 1] = build_features(dataset[k].positive, provider);
    });

    const long n_pairs = static_cast<long>(dataset.size());
    const long batches_per_epoch = (n_pairs + cfg.batch_size - 1) / cfg.batch_size;
    const long total_steps = static_cast<long>(cfg.epochs) * batches_per_epoch;

    AdamW<double> opt(parameter_count(params));
    VecX<double> theta = flatten_parameters(params);
    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    TrainReport report;
    report.lr_trace.reserve(total_steps);
    std::vector<long> order(n_pairs);
    for (long i = 0; i < n_pairs; ++i) order[i] = i;

    const int slots = std::max(1, cfg.jobs);
    std::vector<GatCache<double>> caches(2 * std::min<long>(n_pairs, cfg.batch_size));
    std::vector<VecX<double>> grad_slots(slots);

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the run's own generator
        for (long i = n_pairs - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.next_below(static_cast<std::uint64_t>(i + 1))]);

        double epoch_loss = 0.0;
        long epoch_batches = 0;
        for (long b0 = 0; b0 < n_pairs; b0 += cfg.batch_size) {
            const long b = std::min<long>(cfg.batch_size, n_pairs - b0);
            const long rows = 2 * b;
            MatX<double> z(rows, params.config.output_dim);
            parallel_for(rows, cfg.jobs, [&](std::size_t r) {
                long pair = order[b0 + static_cast<long>(r) / 2];
                const FeatureBundle& fb = bundles[2 * pair + (r % 2)];
                auto emb = gat_forward(fb, params, &caches[r]);
                z.row(r) = emb.vector.transpose();
            });

            MatX<double> grad_z(rows, params.config.output_dim);
            double loss = info_nce_loss_and_grad(z, cfg.tau, grad_z);
            if (!std::isfinite(loss))
                throw NonFiniteLoss("loss is not finite at step " + std::to_string(step));

            // backward in chunks: compute grads in parallel, fold serially in
            // row order so results do not depend on cfg.jobs
            VecX<double> grad_flat = VecX<double>::Zero(theta.size());
            for (long c0 = 0; c0 < rows; c0 += slots) {
                const long c = std::min<long>(slots, rows - c0);
                parallel_for(c, cfg.jobs, [&](std::size_t k) {
                    VecX<double> g = grad_z.row(c0 + static_cast<long>(k)).transpose();
                    grad_slots[k] = flatten_parameters(
                        gat_backward(g, params, caches[c0 + static_cast<long>(k)]));
                });
                for (long k = 0; k < c; ++k) grad_flat += grad_slots[k];
            }
            double lr_now = cosine_lr(cfg.lr, step, total_steps);
            report.lr_trace.push_back(lr_now);
            opt.step(theta, grad_flat, lr_now, cfg.weight_decay);
            assign_from_flat(params, theta);
            ++step;
            epoch_loss += loss;
            ++epoch_batches;
        }
        double mean_loss = epoch_loss / static_cast<double>(epoch_batches);
        report.epoch_losses.push_back(mean_loss);
        if (progress) progress(epoch, mean_loss);
    }
    report.total_steps = step;
    return report;
}

}  // namespace pgr
