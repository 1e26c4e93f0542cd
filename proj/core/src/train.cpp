#include <algorithm>
#include <cmath>

#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/model.hpp"

namespace fastgcrnn {

namespace {

DrawPlan make_train_plan(SamplerChoice choice, const SamplerDist* dist, std::size_t d_in,
                         std::size_t d_out, double tf_ratio, Rng& rng) {
    switch (choice) {
        case SamplerChoice::dense:
        case SamplerChoice::exhaustive: {
            DrawPlan p = choice == SamplerChoice::dense ? dense_plan() : exhaustive_plan();
            if (d_out > 1 && tf_ratio > 0.0) {
                p.teacher.resize(d_out - 1);
                for (std::size_t t = 0; t + 1 < d_out; ++t) {
                    p.teacher[t] = rng.uniform() < tf_ratio;
                }
            }
            return p;
        }
        case SamplerChoice::uniform:
        case SamplerChoice::importance:
            if (!dist) throw UsageError("sampled training requires a SamplerDist");
            return sampled_plan(*dist, d_in, d_out, tf_ratio, rng);
    }
    throw UsageError("unknown sampler choice");
}

}  // namespace

TrainResult train(FastGcrnnModel& m, const NormAdj& a_hat,
                  const std::vector<ForecastWindow>& train_windows,
                  const std::vector<ForecastWindow>& val_windows, const FlowScaler& scaler,
                  const TrainConfig& cfg) {
    if (train_windows.empty()) throw InputError("train: dataset is empty");
    if (cfg.epochs < 1) throw InputError("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw InputError("train: batch size must be >= 1");
    if (cfg.tf_ratio < 0.0 || cfg.tf_ratio > 1.0) {
        throw InputError("train: teacher forcing ratio must be in [0, 1]");
    }

    Rng rng(cfg.seed);
    SamplerDist dist;
    const SamplerDist* dist_ptr = nullptr;
    if (cfg.sampler == SamplerChoice::uniform) {
        dist = uniform_distribution(a_hat.n, cfg.t_per_layer);
        dist_ptr = &dist;
    } else if (cfg.sampler == SamplerChoice::importance) {
        dist = importance_distribution(a_hat, cfg.t_per_layer);
        dist_ptr = &dist;
    }

    auto params = m.params();
    AdamOptimizer opt(params, cfg.lr);
    const DrawPlan eval_plan = exhaustive_plan();

    TrainResult result;
    std::vector<std::size_t> order(train_windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the run RNG keeps epochs reproducible.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        }
        double epoch_loss = 0.0;
        std::size_t step = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            zero_grads(params);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const ForecastWindow& w = train_windows[order[k]];
                const DrawPlan plan = make_train_plan(cfg.sampler, dist_ptr, m.cfg.d_in,
                                                      m.cfg.d_out, cfg.tf_ratio, rng);
                ForwardCache cache;
                const double loss = forward_loss(m, a_hat, w, plan, &cache);
                if (!std::isfinite(loss)) {
                    throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                       ", step " + std::to_string(step + 1));
                }
                batch_loss += loss;
                backward(m, a_hat, w, cache, inv_batch);
            }
            clip_global_grad_norm(params, cfg.clip_norm);
            opt.step();
            epoch_loss += batch_loss * inv_batch;
        }
        EpochStats stats;
        stats.train_mse = epoch_loss / static_cast<double>(step);
        if (!val_windows.empty()) {
            stats.val_rmse = evaluate_rmse(m, a_hat, val_windows, scaler, eval_plan);
        }
        result.history.push_back(stats);
    }
    return result;
}

}  // namespace fastgcrnn
