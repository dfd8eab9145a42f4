#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spear/crc32.hpp"
#include "spear/errors.hpp"
#include "spear/rng.hpp"
#include "spear/series.hpp"

namespace spear {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Aggregation { Mean, Max };

const char* to_string(Aggregation agg);
Aggregation aggregation_from_string(const std::string& name);

struct ModelConfig {
    int d_model = 32;
    int n_layers = 2;
    int n_heads = 4;
    int d_ff = 64;
    int n_bins = 100;      // token vocabulary
    int prompt_len = 20;
    int max_seq_len = 128;
    std::uint64_t seed = 0;
    Aggregation aggregation = Aggregation::Mean;

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

/// One pre-norm encoder layer. Attention and feed-forward weights are frozen
/// after init; only the soft prompts (and optionally the head) train.
template <typename S>
struct EncoderLayer {
    Mat<S> wq, wk, wv, wo;  // d x d, applied as X * W
    Vec<S> bq, bk, bv, bo;
    Mat<S> w1;  // d x d_ff
    Vec<S> b1;
    Mat<S> w2;  // d_ff x d
    Vec<S> b2;
    Vec<S> ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

template <typename S>
struct Model {
    ModelConfig config;
    Mat<S> embedding;   // n_bins x d, frozen by default
    Mat<S> positional;  // max_seq_len x d, deterministic sinusoidal (not a parameter)
    std::vector<EncoderLayer<S>> layers;
    Mat<S> prompts;     // prompt_len x d, trainable
    Vec<S> head_w;      // d, trainable
    S head_b = S(0);    // trainable
};

namespace detail {

constexpr double kLayerNormEps = 1e-6;

inline double sinusoidal_pe(int pos, int i, int d_model) {
    const double angle = pos / std::pow(10000.0, (2.0 * (i / 2)) / d_model);
    return i % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

template <typename S>
std::uint32_t crc_of(std::uint32_t crc, const Mat<S>& m) {
    return crc32_update(crc, m.data(), sizeof(S) * static_cast<std::size_t>(m.size()));
}
template <typename S>
std::uint32_t crc_of(std::uint32_t crc, const Vec<S>& v) {
    return crc32_update(crc, v.data(), sizeof(S) * static_cast<std::size_t>(v.size()));
}

}  // namespace detail

/// All parameters ~ N(0, 0.02^2) from the config seed, except layer-norm
/// (gain 1, bias 0) and the head bias (0). Same seed, same parameters.
template <typename S>
Model<S> init_model(const ModelConfig& config) {
    config.validate();
    Model<S> model;
    model.config = config;
    Rng rng(derive_seed(config.seed, "init"));
    auto gauss_mat = [&rng](int rows, int cols) {
        Mat<S> m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = static_cast<S>(rng.gaussian(0.0, 0.02));
        return m;
    };
    auto gauss_vec = [&rng](int n) {
        Vec<S> v(n);
        for (int i = 0; i < n; ++i) v(i) = static_cast<S>(rng.gaussian(0.0, 0.02));
        return v;
    };

    const int d = config.d_model;
    model.embedding = gauss_mat(config.n_bins, d);
    model.layers.resize(config.n_layers);
    for (auto& layer : model.layers) {
        layer.wq = gauss_mat(d, d);
        layer.bq = gauss_vec(d);
        layer.wk = gauss_mat(d, d);
        layer.bk = gauss_vec(d);
        layer.wv = gauss_mat(d, d);
        layer.bv = gauss_vec(d);
        layer.wo = gauss_mat(d, d);
        layer.bo = gauss_vec(d);
        layer.w1 = gauss_mat(d, config.d_ff);
        layer.b1 = gauss_vec(config.d_ff);
        layer.w2 = gauss_mat(config.d_ff, d);
        layer.b2 = gauss_vec(d);
        layer.ln1_gain = Vec<S>::Ones(d);
        layer.ln1_bias = Vec<S>::Zero(d);
        layer.ln2_gain = Vec<S>::Ones(d);
        layer.ln2_bias = Vec<S>::Zero(d);
    }
    model.prompts = gauss_mat(config.prompt_len, d);
    model.head_w = gauss_vec(d);
    model.head_b = S(0);

    model.positional.resize(config.max_seq_len, d);
    for (int pos = 0; pos < config.max_seq_len; ++pos)
        for (int i = 0; i < d; ++i)
            model.positional(pos, i) = static_cast<S>(detail::sinusoidal_pe(pos, i, d));
    return model;
}

template <typename S>
std::uint32_t embedding_checksum(const Model<S>& model) {
    return detail::crc_of(0u, model.embedding);
}

/// CRC32 over every encoder tensor in declaration order, continuing from an
/// optional running checksum.
template <typename S>
std::uint32_t encoder_checksum(const Model<S>& model, std::uint32_t crc = 0u) {
    for (const auto& layer : model.layers) {
        crc = detail::crc_of(crc, layer.wq);
        crc = detail::crc_of(crc, layer.bq);
        crc = detail::crc_of(crc, layer.wk);
        crc = detail::crc_of(crc, layer.bk);
        crc = detail::crc_of(crc, layer.wv);
        crc = detail::crc_of(crc, layer.bv);
        crc = detail::crc_of(crc, layer.wo);
        crc = detail::crc_of(crc, layer.bo);
        crc = detail::crc_of(crc, layer.w1);
        crc = detail::crc_of(crc, layer.b1);
        crc = detail::crc_of(crc, layer.w2);
        crc = detail::crc_of(crc, layer.b2);
        crc = detail::crc_of(crc, layer.ln1_gain);
        crc = detail::crc_of(crc, layer.ln1_bias);
        crc = detail::crc_of(crc, layer.ln2_gain);
        crc = detail::crc_of(crc, layer.ln2_bias);
    }
    return crc;
}

/// Checksum of everything frozen by default: E plus the encoder stack.
template <typename S>
std::uint32_t frozen_checksum(const Model<S>& model) {
    return encoder_checksum(model, embedding_checksum(model));
}

template <typename S>
std::uint32_t trainable_checksum(const Model<S>& model) {
    std::uint32_t crc = detail::crc_of(0u, model.prompts);
    crc = detail::crc_of(crc, model.head_w);
    return crc32_update(crc, &model.head_b, sizeof(S));
}

/// Token lookup plus the sinusoidal position term for the slot the token will
/// occupy after the prompt block (position prompt_len + t).
template <typename S>
Mat<S> embed(const QuantizedWindow& window, const Model<S>& model) {
    const int n = static_cast<int>(window.tokens.size());
    const int m = model.config.prompt_len;
    Mat<S> e(n, model.config.d_model);
    for (int t = 0; t < n; ++t) {
        const int token = window.tokens[t];
        if (token < 0 || token >= model.config.n_bins)
            throw DataError("embed: token " + std::to_string(token) + " outside vocabulary [0, " +
                            std::to_string(model.config.n_bins) + ")");
        if (m + t >= model.config.max_seq_len)
            throw ConfigError("embed: position " + std::to_string(m + t) +
                              " exceeds max_seq_len " + std::to_string(model.config.max_seq_len));
        e.row(t) = model.embedding.row(token) + model.positional.row(m + t);
    }
    return e;
}

/// S = [p_1..p_m, e_1..e_T]; prompt positions are always unmasked.
template <typename S>
std::pair<Mat<S>, std::vector<bool>> assemble_input(const Model<S>& model, const Mat<S>& embeddings,
                                                    const std::vector<bool>& mask) {
    const int m = model.config.prompt_len;
    const int n = static_cast<int>(embeddings.rows());
    if (static_cast<int>(mask.size()) != n)
        throw DataError("assemble_input: mask/embedding length mismatch");
    if (m + n > model.config.max_seq_len)
        throw ConfigError("assemble_input: sequence length " + std::to_string(m + n) +
                          " exceeds max_seq_len " + std::to_string(model.config.max_seq_len));
    Mat<S> seq(m + n, model.config.d_model);
    seq.topRows(m) = model.prompts;
    seq.bottomRows(n) = embeddings;
    std::vector<bool> ext_mask(m + n, true);
    for (int t = 0; t < n; ++t) ext_mask[m + t] = mask[t];
    return {std::move(seq), std::move(ext_mask)};
}

template <typename S>
struct LayerCache {
    Mat<S> x_in;                   // layer input
    Mat<S> ln1_xhat, ln1_out;
    Vec<S> ln1_inv_sigma;
    Mat<S> q, k, v;
    std::vector<Mat<S>> attn;      // per-head softmax rows
    Mat<S> attn_concat;
    Mat<S> y;                      // x + attention block
    Mat<S> ln2_xhat, ln2_out;
    Vec<S> ln2_inv_sigma;
    Mat<S> ff_pre, ff_act;
};

template <typename S>
struct ForwardCache {
    Mat<S> seq;
    std::vector<bool> ext_mask;
    std::vector<LayerCache<S>> layers;
    Mat<S> hidden;
    std::vector<int> real_positions;  // window positions with mask true
    std::vector<S> logits;            // one per real position
    std::vector<S> probs;
    S score = S(0);
    QuantizedWindow window;           // tokens kept for embedding gradients
};

namespace detail {

/// Normalize each row to zero mean / unit variance (population), then apply
/// gain and bias. Caches what the backward pass needs.
template <typename S>
void layer_norm_forward(const Mat<S>& x, const Vec<S>& gain, const Vec<S>& bias, Mat<S>& xhat,
                        Vec<S>& inv_sigma, Mat<S>& out) {
    const int rows = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    xhat.resize(rows, d);
    out.resize(rows, d);
    inv_sigma.resize(rows);
    for (int r = 0; r < rows; ++r) {
        const S mu = x.row(r).mean();
        const S var = (x.row(r).array() - mu).square().sum() / static_cast<S>(d);
        const S is = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
        inv_sigma(r) = is;
        xhat.row(r) = (x.row(r).array() - mu) * is;
        out.row(r) = xhat.row(r).cwiseProduct(gain.transpose()) + bias.transpose();
    }
}

template <typename S>
Mat<S> layer_norm_backward(const Mat<S>& dout, const Mat<S>& xhat, const Vec<S>& inv_sigma,
                           const Vec<S>& gain) {
    const int rows = static_cast<int>(dout.rows());
    const int d = static_cast<int>(dout.cols());
    Mat<S> dx(rows, d);
    for (int r = 0; r < rows; ++r) {
        Eigen::Array<S, 1, Eigen::Dynamic> dxhat =
            dout.row(r).array() * gain.transpose().array();
        const S mean_dxhat = dxhat.mean();
        const S mean_dxhat_xhat = (dxhat * xhat.row(r).array()).mean();
        dx.row(r) = ((dxhat - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat) * inv_sigma(r))
                        .matrix();
    }
    return dx;
}

template <typename S>
S gelu(S x) {
    return S(0.5) * x * (S(1) + std::erf(x * S(0.70710678118654752440)));
}

template <typename S>
S gelu_grad(S x) {
    const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.70710678118654752440)));
    const S pdf = std::exp(S(-0.5) * x * x) * S(0.39894228040143267794);  // 1/sqrt(2*pi)
    return cdf + x * pdf;
}

/// Row softmax with masked keys forced to exactly zero weight.
template <typename S>
void masked_softmax_rows(Mat<S>& scores, const std::vector<bool>& key_mask) {
    const S neg_inf = -std::numeric_limits<S>::infinity();
    for (int j = 0; j < scores.cols(); ++j) {
        if (!key_mask[static_cast<std::size_t>(j)]) scores.col(j).setConstant(neg_inf);
    }
    for (int r = 0; r < scores.rows(); ++r) {
        S row_max = neg_inf;
        for (int j = 0; j < scores.cols(); ++j) row_max = std::max(row_max, scores(r, j));
        S denom = S(0);
        for (int j = 0; j < scores.cols(); ++j) {
            const S e = scores(r, j) == neg_inf ? S(0) : std::exp(scores(r, j) - row_max);
            scores(r, j) = e;
            denom += e;
        }
        scores.row(r) /= denom;
    }
}

}  // namespace detail

/// Pre-norm encoder stack. Masked positions are excluded as attention keys;
/// a zero-layer config returns the input unchanged.
template <typename S>
Mat<S> encoder_forward(const Model<S>& model, const Mat<S>& seq, const std::vector<bool>& ext_mask,
                       ForwardCache<S>* cache) {
    const int d = model.config.d_model;
    const int n_heads = model.config.n_heads;
    const int d_head = d / n_heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(d_head));

    Mat<S> x = seq;
    if (cache != nullptr) cache->layers.resize(model.layers.size());

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const auto& layer = model.layers[li];
        LayerCache<S> local;
        LayerCache<S>& lc = cache != nullptr ? cache->layers[li] : local;
        lc.x_in = x;

        detail::layer_norm_forward(x, layer.ln1_gain, layer.ln1_bias, lc.ln1_xhat, lc.ln1_inv_sigma,
                                   lc.ln1_out);
        lc.q = (lc.ln1_out * layer.wq).rowwise() + layer.bq.transpose();
        lc.k = (lc.ln1_out * layer.wk).rowwise() + layer.bk.transpose();
        lc.v = (lc.ln1_out * layer.wv).rowwise() + layer.bv.transpose();

        lc.attn.resize(n_heads);
        lc.attn_concat.resize(x.rows(), d);
        for (int h = 0; h < n_heads; ++h) {
            const auto qh = lc.q.middleCols(h * d_head, d_head);
            const auto kh = lc.k.middleCols(h * d_head, d_head);
            const auto vh = lc.v.middleCols(h * d_head, d_head);
            Mat<S> scores = qh * kh.transpose() * scale;
            detail::masked_softmax_rows(scores, ext_mask);
            lc.attn[h] = std::move(scores);
            lc.attn_concat.middleCols(h * d_head, d_head) = lc.attn[h] * vh;
        }
        Mat<S> attn_out = (lc.attn_concat * layer.wo).rowwise() + layer.bo.transpose();
        lc.y = x + attn_out;

        detail::layer_norm_forward(lc.y, layer.ln2_gain, layer.ln2_bias, lc.ln2_xhat,
                                   lc.ln2_inv_sigma, lc.ln2_out);
        lc.ff_pre = (lc.ln2_out * layer.w1).rowwise() + layer.b1.transpose();
        lc.ff_act = lc.ff_pre.unaryExpr([](S v) { return detail::gelu(v); });
        x = lc.y + ((lc.ff_act * layer.w2).rowwise() + layer.b2.transpose());

        if (!x.allFinite())
            throw NumericError("encoder_forward: non-finite activation in layer " +
                               std::to_string(li));
    }
    if (cache != nullptr) cache->hidden = x;
    return x;
}

/// Per-position logits z_t = W . h_{m+t} + b over unmasked data positions,
/// sigmoid probabilities, and the aggregated window score.
template <typename S>
void classify(const Model<S>& model, const Mat<S>& hidden, const std::vector<bool>& window_mask,
              std::vector<int>& real_positions, std::vector<S>& logits, std::vector<S>& probs,
              S& score) {
    const int m = model.config.prompt_len;
    real_positions.clear();
    logits.clear();
    probs.clear();
    for (std::size_t t = 0; t < window_mask.size(); ++t) {
        if (window_mask[t]) real_positions.push_back(static_cast<int>(t));
    }
    if (real_positions.empty()) throw DataError("classify: window has no real positions");
    for (int t : real_positions) {
        const S z = model.head_w.dot(hidden.row(m + t)) + model.head_b;
        logits.push_back(z);
        probs.push_back(S(1) / (S(1) + std::exp(-z)));
    }
    if (model.config.aggregation == Aggregation::Mean) {
        S sum = S(0);
        for (S p : probs) sum += p;
        score = sum / static_cast<S>(probs.size());
    } else {
        score = *std::max_element(probs.begin(), probs.end());
    }
}

/// Full forward pass with cache (for training).
template <typename S>
ForwardCache<S> forward(const Model<S>& model, const QuantizedWindow& window) {
    ForwardCache<S> cache;
    cache.window = window;
    Mat<S> embeddings = embed(window, model);
    auto [seq, ext_mask] = assemble_input(model, embeddings, window.mask);
    cache.seq = std::move(seq);
    cache.ext_mask = std::move(ext_mask);
    encoder_forward(model, cache.seq, cache.ext_mask, &cache);
    classify(model, cache.hidden, window.mask, cache.real_positions, cache.logits, cache.probs,
             cache.score);
    return cache;
}

/// Inference-only composition: (aggregated score, per-position probabilities).
template <typename S>
std::pair<S, std::vector<S>> predict_window(const Model<S>& model, const QuantizedWindow& window) {
    ForwardCache<S> cache = forward(model, window);
    return {cache.score, cache.probs};
}

template <typename S>
struct Gradients {
    Mat<S> prompts;
    Vec<S> head_w;
    S head_b = S(0);
    Mat<S> embedding;  // allocated only when embedding training is on

    void init_zero(const ModelConfig& config, bool with_embedding) {
        prompts = Mat<S>::Zero(config.prompt_len, config.d_model);
        head_w = Vec<S>::Zero(config.d_model);
        head_b = S(0);
        if (with_embedding) embedding = Mat<S>::Zero(config.n_bins, config.d_model);
        else embedding.resize(0, 0);
    }

    void accumulate(const Gradients& other) {
        prompts += other.prompts;
        head_w += other.head_w;
        head_b += other.head_b;
        if (embedding.size() > 0) embedding += other.embedding;
    }

    void scale(S factor) {
        prompts *= factor;
        head_w *= factor;
        head_b *= factor;
        if (embedding.size() > 0) embedding *= factor;
    }
};

/// Distribute dL/dscore onto the per-position probabilities according to the
/// aggregation (mean spreads uniformly; max routes to the first argmax).
template <typename S>
std::vector<S> score_grad_to_prob_grads(const ForwardCache<S>& cache, Aggregation aggregation,
                                        S dscore) {
    const std::size_t n_real = cache.real_positions.size();
    std::vector<S> dprobs(n_real, S(0));
    if (aggregation == Aggregation::Mean) {
        const S share = dscore / static_cast<S>(n_real);
        for (std::size_t i = 0; i < n_real; ++i) dprobs[i] = share;
    } else {
        std::size_t arg_max = 0;
        for (std::size_t i = 1; i < n_real; ++i) {
            if (cache.probs[i] > cache.probs[arg_max]) arg_max = i;
        }
        dprobs[arg_max] = dscore;
    }
    return dprobs;
}

/// Reverse-mode gradients of a scalar loss with respect to the trainable
/// parameters, given dL/dp_t for every real position. Frozen-parameter
/// gradients are never formed; only activation gradients flow through the
/// encoder.
template <typename S>
Gradients<S> backward(const Model<S>& model, const ForwardCache<S>& cache,
                      const std::vector<S>& dprobs, bool head_grads, bool embedding_grads) {
    const int d = model.config.d_model;
    const int m = model.config.prompt_len;
    const int n_heads = model.config.n_heads;
    const int d_head = d / n_heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(d_head));
    const std::size_t n_real = cache.real_positions.size();
    if (dprobs.size() != n_real) throw NumericError("backward: dprobs size mismatch");

    Gradients<S> grads;
    grads.init_zero(model.config, embedding_grads);

    // probabilities -> hidden states (and head parameters)
    Mat<S> dx = Mat<S>::Zero(cache.hidden.rows(), d);
    for (std::size_t i = 0; i < n_real; ++i) {
        const S p = cache.probs[i];
        const S dz = dprobs[i] * p * (S(1) - p);
        const int row = m + cache.real_positions[i];
        dx.row(row) += dz * model.head_w.transpose();
        if (head_grads) {
            grads.head_w += dz * cache.hidden.row(row).transpose();
            grads.head_b += dz;
        }
    }

    // encoder stack in reverse
    for (std::size_t li = model.layers.size(); li-- > 0;) {
        const auto& layer = model.layers[li];
        const auto& lc = cache.layers[li];

        // x_out = y + gelu(ln2(y) W1 + b1) W2 + b2
        Mat<S> dff_act = dx * layer.w2.transpose();
        Mat<S> dff_pre =
            dff_act.cwiseProduct(lc.ff_pre.unaryExpr([](S v) { return detail::gelu_grad(v); }));
        Mat<S> dln2_out = dff_pre * layer.w1.transpose();
        Mat<S> dy =
            dx + detail::layer_norm_backward(dln2_out, lc.ln2_xhat, lc.ln2_inv_sigma, layer.ln2_gain);

        // y = x + (concat heads) Wo + bo
        Mat<S> dattn_concat = dy * layer.wo.transpose();
        Mat<S> dq(dx.rows(), d), dk(dx.rows(), d), dv(dx.rows(), d);
        for (int h = 0; h < n_heads; ++h) {
            const auto qh = lc.q.middleCols(h * d_head, d_head);
            const auto kh = lc.k.middleCols(h * d_head, d_head);
            const auto vh = lc.v.middleCols(h * d_head, d_head);
            const Mat<S>& attn = lc.attn[h];
            const auto doh = dattn_concat.middleCols(h * d_head, d_head);

            Mat<S> dattn = doh * vh.transpose();
            // softmax backward; masked keys have zero attention weight, so
            // their score gradients vanish with no special casing.
            Vec<S> row_dots = (dattn.cwiseProduct(attn)).rowwise().sum();
            Mat<S> dscores = attn.cwiseProduct(dattn.colwise() - row_dots);

            dq.middleCols(h * d_head, d_head) = dscores * kh * scale;
            dk.middleCols(h * d_head, d_head) = dscores.transpose() * qh * scale;
            dv.middleCols(h * d_head, d_head) = attn.transpose() * doh;
        }
        Mat<S> dln1_out = dq * layer.wq.transpose() + dk * layer.wk.transpose() +
                          dv * layer.wv.transpose();
        dx = dy + detail::layer_norm_backward(dln1_out, lc.ln1_xhat, lc.ln1_inv_sigma, layer.ln1_gain);
    }

    if (!dx.allFinite()) throw NumericError("backward: non-finite gradient");

    grads.prompts = dx.topRows(m);
    if (embedding_grads) {
        for (std::size_t t = 0; t < cache.window.tokens.size(); ++t) {
            grads.embedding.row(cache.window.tokens[t]) += dx.row(m + static_cast<int>(t));
        }
    }
    return grads;
}

/// Convenience overload taking dL/dscore.
template <typename S>
Gradients<S> backward(const Model<S>& model, const ForwardCache<S>& cache, S dscore,
                      bool head_grads, bool embedding_grads) {
    return backward(model, cache,
                    score_grad_to_prob_grads(cache, model.config.aggregation, dscore), head_grads,
                    embedding_grads);
}

}  // namespace spear
