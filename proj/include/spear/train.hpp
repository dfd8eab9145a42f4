#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "spear/errors.hpp"
#include "spear/metrics.hpp"
#include "spear/model.hpp"
#include "spear/rng.hpp"

namespace spear {

enum class TrainableSet { PromptsOnly, PromptsAndHead };

const char* to_string(TrainableSet set);
TrainableSet trainable_set_from_string(const std::string& name);

enum class LossMode { WindowScore, PerPosition };

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

struct TrainConfig {
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    TrainableSet trainable = TrainableSet::PromptsAndHead;
    bool train_embedding = false;  // experimental: lets gradients reach E
    LossMode loss_mode = LossMode::WindowScore;
    std::uint64_t seed = 0;
    int n_threads = 1;

    void validate() const;
};

/// Per-epoch record for the line-delimited JSON training log.
struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double lr = 0.0;
    MetricsReport val_metrics;
    bool has_val = false;
    std::uint32_t frozen_checksum = 0;

    std::string to_json_line() const;
};

/// Clamped binary cross-entropy on one score.
template <typename S>
S bce_loss(S score, int label) {
    constexpr double eps = 1e-7;
    const S p = std::clamp(score, static_cast<S>(eps), static_cast<S>(1.0 - eps));
    return label == 1 ? -std::log(p) : -std::log(S(1) - p);
}

/// d bce / d score, zero where the clamp is active.
template <typename S>
S bce_loss_grad(S score, int label) {
    constexpr double eps = 1e-7;
    if (score < static_cast<S>(eps) || score > static_cast<S>(1.0 - eps)) return S(0);
    return label == 1 ? -S(1) / score : S(1) / (S(1) - score);
}

/// base_lr * (1 - step/total_steps), floored at zero.
double linear_lr(long step, long total_steps, double base_lr);

/// Decoupled-weight-decay Adam with bias correction. Weight decay applies to
/// the prompt matrix and head weight W, never to the bias b.
template <typename S>
struct AdamState {
    long step = 0;
    Mat<S> m_prompts, v_prompts;
    Vec<S> m_head_w, v_head_w;
    S m_head_b = S(0), v_head_b = S(0);
    Mat<S> m_embedding, v_embedding;

    void init(const ModelConfig& config, bool with_embedding) {
        step = 0;
        m_prompts = Mat<S>::Zero(config.prompt_len, config.d_model);
        v_prompts = Mat<S>::Zero(config.prompt_len, config.d_model);
        m_head_w = Vec<S>::Zero(config.d_model);
        v_head_w = Vec<S>::Zero(config.d_model);
        m_head_b = S(0);
        v_head_b = S(0);
        if (with_embedding) {
            m_embedding = Mat<S>::Zero(config.n_bins, config.d_model);
            v_embedding = Mat<S>::Zero(config.n_bins, config.d_model);
        }
    }
};

namespace detail {

// Decay is decoupled and applied to the pre-step parameter, matching the
// reference AdamW formulation.
template <typename S, typename Param, typename Grad>
void adamw_update(Param& param, const Grad& grad, Param& m, Param& v, double lr, double beta1,
                  double beta2, double eps, double weight_decay, long step) {
    const S b1 = static_cast<S>(beta1);
    const S b2 = static_cast<S>(beta2);
    if (weight_decay > 0.0) param *= (S(1) - static_cast<S>(lr * weight_decay));
    m = b1 * m + (S(1) - b1) * grad;
    v = (b2 * v.array() + (S(1) - b2) * grad.array().square()).matrix();
    const S bias1 = S(1) - static_cast<S>(std::pow(beta1, static_cast<double>(step)));
    const S bias2 = S(1) - static_cast<S>(std::pow(beta2, static_cast<double>(step)));
    param -= (static_cast<S>(lr) * (m.array() / bias1) /
              ((v.array() / bias2).sqrt() + static_cast<S>(eps)))
                 .matrix();
}

template <typename S>
void adamw_update_scalar(S& param, S grad, S& m, S& v, double lr, double beta1, double beta2,
                         double eps, double weight_decay, long step) {
    const S b1 = static_cast<S>(beta1);
    const S b2 = static_cast<S>(beta2);
    if (weight_decay > 0.0) param *= (S(1) - static_cast<S>(lr * weight_decay));
    m = b1 * m + (S(1) - b1) * grad;
    v = b2 * v + (S(1) - b2) * grad * grad;
    const S m_hat = m / (S(1) - static_cast<S>(std::pow(beta1, static_cast<double>(step))));
    const S v_hat = v / (S(1) - static_cast<S>(std::pow(beta2, static_cast<double>(step))));
    param -= static_cast<S>(lr) * m_hat / (std::sqrt(v_hat) + static_cast<S>(eps));
}

}  // namespace detail

/// One optimizer step over the trainable set.
template <typename S>
void adamw_step(Model<S>& model, const Gradients<S>& grads, AdamState<S>& state,
                const TrainConfig& config, double lr) {
    ++state.step;
    detail::adamw_update<S>(model.prompts, grads.prompts, state.m_prompts, state.v_prompts, lr,
                            config.beta1, config.beta2, config.adam_eps, config.weight_decay,
                            state.step);
    if (config.trainable == TrainableSet::PromptsAndHead) {
        detail::adamw_update<S>(model.head_w, grads.head_w, state.m_head_w, state.v_head_w, lr,
                                config.beta1, config.beta2, config.adam_eps, config.weight_decay,
                                state.step);
        detail::adamw_update_scalar<S>(model.head_b, grads.head_b, state.m_head_b, state.v_head_b,
                                       lr, config.beta1, config.beta2, config.adam_eps,
                                       /*weight_decay=*/0.0, state.step);
    }
    if (config.train_embedding) {
        detail::adamw_update<S>(model.embedding, grads.embedding, state.m_embedding,
                                state.v_embedding, lr, config.beta1, config.beta2, config.adam_eps,
                                config.weight_decay, state.step);
    }
}

/// Loss and dL/dscore for one example under the configured loss mode. For
/// per-position loss the per-position gradient is pushed through backward()
/// by treating each position as its own scalar output.
template <typename S>
S example_loss(const ForwardCache<S>& cache, int label, LossMode mode) {
    if (mode == LossMode::WindowScore) return bce_loss(cache.score, label);
    S total = S(0);
    for (S p : cache.probs) total += bce_loss(p, label);
    return total / static_cast<S>(cache.probs.size());
}

/// Forward + backward for one example; returns gradients of the example loss.
template <typename S>
Gradients<S> example_backward(const Model<S>& model, const QuantizedWindow& window, int label,
                              const TrainConfig& config, S* loss_out) {
    ForwardCache<S> cache = forward(model, window);
    const bool head_grads = config.trainable == TrainableSet::PromptsAndHead;
    const S loss = example_loss(cache, label, config.loss_mode);
    if (!std::isfinite(static_cast<double>(loss)))
        throw NumericError("train: non-finite loss on window '" + window.source_id + "'");
    if (loss_out != nullptr) *loss_out = loss;

    std::vector<S> dprobs;
    if (config.loss_mode == LossMode::WindowScore) {
        dprobs = score_grad_to_prob_grads(cache, model.config.aggregation,
                                          bce_loss_grad(cache.score, label));
    } else {
        const S n = static_cast<S>(cache.probs.size());
        dprobs.resize(cache.probs.size());
        for (std::size_t i = 0; i < cache.probs.size(); ++i)
            dprobs[i] = bce_loss_grad(cache.probs[i], label) / n;
    }
    return backward(model, cache, dprobs, head_grads, config.train_embedding);
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Deterministic Fisher-Yates shuffle driven by the trainer RNG.
void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng);

/// Full training loop: per-epoch shuffle, batches of forward/backward with a
/// fixed-order gradient reduction (thread-count independent), AdamW with the
/// linear schedule, per-epoch validation metrics, and a frozen-parameter
/// checksum assertion every epoch.
template <typename S>
std::vector<EpochRecord> train(Model<S>& model, const std::vector<QuantizedWindow>& train_set,
                               const std::vector<QuantizedWindow>& val_set,
                               const TrainConfig& config, const EpochCallback& on_epoch = nullptr) {
    config.validate();
    if (train_set.empty()) throw DataError("train: empty training set");

    // E leaves the frozen set when embedding training is switched on.
    auto frozen_now = [&config](const Model<S>& mdl) {
        return config.train_embedding ? encoder_checksum(mdl) : frozen_checksum(mdl);
    };
    const std::uint32_t frozen0 = frozen_now(model);
    AdamState<S> state;
    state.init(model.config, config.train_embedding);

    const long steps_per_epoch =
        (static_cast<long>(train_set.size()) + config.batch_size - 1) / config.batch_size;
    const long total_steps = steps_per_epoch * config.epochs;

    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<EpochRecord> history;
    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        double epoch_loss_sum = 0.0;
        double last_lr = 0.0;

        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, order.size());
            const std::size_t batch_n = end - begin;

            std::vector<Gradients<S>> grads(batch_n);
            std::vector<S> losses(batch_n);
            const int workers =
                std::max(1, std::min<int>(config.n_threads, static_cast<int>(batch_n)));
            if (workers == 1) {
                for (std::size_t i = 0; i < batch_n; ++i) {
                    const QuantizedWindow& w = train_set[order[begin + i]];
                    grads[i] = example_backward(model, w, w.label, config, &losses[i]);
                }
            } else {
                std::vector<std::thread> pool;
                pool.reserve(workers);
                std::exception_ptr error;
                std::mutex error_mutex;
                for (int t = 0; t < workers; ++t) {
                    pool.emplace_back([&, t] {
                        try {
                            for (std::size_t i = t; i < batch_n; i += workers) {
                                const QuantizedWindow& w = train_set[order[begin + i]];
                                grads[i] = example_backward(model, w, w.label, config, &losses[i]);
                            }
                        } catch (...) {
                            std::lock_guard<std::mutex> lock(error_mutex);
                            if (!error) error = std::current_exception();
                        }
                    });
                }
                for (auto& th : pool) th.join();
                if (error) std::rethrow_exception(error);
            }

            // Mean over the batch, reduced in example order.
            Gradients<S> batch_grads;
            batch_grads.init_zero(model.config, config.train_embedding);
            for (std::size_t i = 0; i < batch_n; ++i) {
                batch_grads.accumulate(grads[i]);
                epoch_loss_sum += static_cast<double>(losses[i]);
            }
            batch_grads.scale(S(1) / static_cast<S>(batch_n));

            last_lr = linear_lr(step, total_steps, config.learning_rate);
            adamw_step(model, batch_grads, state, config, last_lr);
            ++step;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss_sum / static_cast<double>(train_set.size());
        record.lr = last_lr;
        record.frozen_checksum = frozen_checksum(model);
        if (record.frozen_checksum != frozen0)
            throw NumericError("train: frozen parameters changed during epoch " +
                               std::to_string(epoch));
        if (!val_set.empty()) {
            std::vector<double> scores(val_set.size());
            std::vector<int> labels(val_set.size());
            for (std::size_t i = 0; i < val_set.size(); ++i) {
                scores[i] = static_cast<double>(predict_window(model, val_set[i]).first);
                labels[i] = val_set[i].label;
            }
            record.val_metrics = evaluate_scores(scores, labels);
            record.has_val = true;
        }
        history.push_back(record);
        if (on_epoch) on_epoch(record);
    }
    return history;
}

}  // namespace spear
