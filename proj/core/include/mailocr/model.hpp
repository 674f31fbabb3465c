#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mailocr/autodiff.hpp"
#include "mailocr/image.hpp"
#include "mailocr/tensor.hpp"

namespace mailocr {

// Encoder: 4 conv layers (3x3, stride 1, zero padding) with batchnorm
// between layers 1-2, 2-3 and 3-4, ReLU activations, and a 2x2 max-pool
// after conv2 and conv4. The [C4, H/4, W/4] map is read column by column
// and projected to attn_dim. Decoder: learned position queries refined by
// two cross-attention layers over the columns, then a shared output
// projection to alphabet logits.
struct ModelConfig {
    std::array<int, 4> conv_channels{16, 32, 48, 64};
    int attn_dim = 128;
    int attn_layers = 2;
    int max_len = 8;
    int alphabet_size = 37;
    int canvas_w = 160;
    int canvas_h = 32;

    void validate() const;

    int sequence_len() const { return canvas_w / 4; }
    int column_dim() const { return conv_channels[3] * (canvas_h / 4); }
    std::int64_t parameter_count() const;
};

template <class S>
struct ConvParamT {
    TensorT<S> kernel;  // [Co, Ci, 3, 3]
    TensorT<S> bias;    // [Co]
};

template <class S>
struct BnParamT {
    TensorT<S> gamma;
    TensorT<S> beta;
    BnRunning<S> running;
};

template <class S>
struct LinearParamT {
    TensorT<S> weight;  // [D, M]
    TensorT<S> bias;    // [M]
};

template <class S>
struct AttnLayerParamT {
    LinearParamT<S> query, key, value, out;
};

template <class S>
struct ModelParamsT {
    ModelConfig config;
    std::array<ConvParamT<S>, 4> conv;
    std::array<BnParamT<S>, 3> bn;
    LinearParamT<S> column_proj;
    std::vector<AttnLayerParamT<S>> attn;
    TensorT<S> pos_queries;  // [max_len, attn_dim]
    LinearParamT<S> out_proj;

    // Checkpoint order: conv1..4 kernel+bias, bn1..3 gamma/beta/running
    // mean/running var, column projection, attention layers (q,k,v,out,
    // weight then bias each), position queries, output projection.
    template <class F>
    void for_each_tensor(F&& f) {
        for (auto& c : conv) {
            f(c.kernel);
            f(c.bias);
        }
        for (auto& b : bn) {
            f(b.gamma);
            f(b.beta);
            f(b.running.mean);
            f(b.running.var);
        }
        f(column_proj.weight);
        f(column_proj.bias);
        for (auto& a : attn) {
            f(a.query.weight);
            f(a.query.bias);
            f(a.key.weight);
            f(a.key.bias);
            f(a.value.weight);
            f(a.value.bias);
            f(a.out.weight);
            f(a.out.bias);
        }
        f(pos_queries);
        f(out_proj.weight);
        f(out_proj.bias);
    }

    template <class F>
    void for_each_tensor(F&& f) const {
        const_cast<ModelParamsT*>(this)->for_each_tensor(
            [&f](TensorT<S>& t) { f(static_cast<const TensorT<S>&>(t)); });
    }

    // Learnable tensors (running statistics excluded), checkpoint order.
    // `encoder` is true for tensors frozen under the encoder-frozen policy:
    // conv, batchnorm and the column projection.
    template <class F>
    void for_each_learnable(F&& f) {
        for (auto& c : conv) {
            f(c.kernel, true);
            f(c.bias, true);
        }
        for (auto& b : bn) {
            f(b.gamma, true);
            f(b.beta, true);
        }
        f(column_proj.weight, true);
        f(column_proj.bias, true);
        for (auto& a : attn) {
            f(a.query.weight, false);
            f(a.query.bias, false);
            f(a.key.weight, false);
            f(a.key.bias, false);
            f(a.value.weight, false);
            f(a.value.bias, false);
            f(a.out.weight, false);
            f(a.out.bias, false);
        }
        f(pos_queries, false);
        f(out_proj.weight, false);
        f(out_proj.bias, false);
    }

    template <class T>
    ModelParamsT<T> cast() const {
        ModelParamsT<T> out;
        out.config = config;
        out.attn.resize(attn.size());
        auto src = collect_const();
        std::size_t i = 0;
        out.for_each_tensor([&](TensorT<T>& dst) { dst = src[i++]->template cast<T>(); });
        return out;
    }

private:
    std::vector<const TensorT<S>*> collect_const() const {
        std::vector<const TensorT<S>*> v;
        for_each_tensor([&](const TensorT<S>& t) { v.push_back(&t); });
        return v;
    }

    template <class>
    friend struct ModelParamsT;
};

using ModelParams = ModelParamsT<float>;

// Shapes allocated from config, values unset.
template <class S>
ModelParamsT<S> make_param_shapes(const ModelConfig& cfg);

// Fan-in scaled uniform weights via SplitMix64(seed); zero biases;
// batchnorm gamma 1, beta 0, running mean 0, running var 1.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

template <class S>
struct ForwardGraph {
    using NodeId = typename TapeT<S>::NodeId;
    NodeId features = -1;  // [B, S, attn_dim]
    NodeId logits = -1;    // [B, max_len, alphabet_size]
    std::vector<NodeId> attn_weights;  // per layer, [B, max_len, S]
    std::vector<NodeId> learnable;     // leaves, for_each_learnable order
};

// Builds the full differentiable forward pass for a batch. In train mode
// with update_running set, the batch statistics are folded into
// params.bn[*].running. freeze_encoder detaches the feature sequence so no
// gradient flows into (or gets computed for) the encoder.
template <class S>
ForwardGraph<S> forward_graph(TapeT<S>& tape, ModelParamsT<S>& params,
                              TensorT<S> images, BnMode mode,
                              bool update_running = false,
                              bool freeze_encoder = false);

// Stacks grayscale images into an [N,1,H,W] tensor.
Tensor batch_images(const std::vector<const GrayImage*>& images, const ModelConfig& cfg);

// Single-image surfaces.
Tensor encode(const GrayImage& image, ModelParams& params, BnMode mode);
Tensor decode(const Tensor& features, ModelParams& params,
              std::vector<Tensor>* attn_weights = nullptr);

struct Prediction {
    std::string text;
    std::vector<double> confidences;  // per kept position, in (0,1]
};

Prediction predict(const GrayImage& image, ModelParams& params);
std::vector<Prediction> predict_batch(const std::vector<const GrayImage*>& images,
                                      ModelParams& params);

// Checkpoint file: "MLCK", u32 version, u32 config length, canonical JSON
// config, float32 payload in for_each_tensor order. All integers and
// floats little-endian.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

std::string canonical_model_config_json(const ModelConfig& cfg);
ModelConfig model_config_from_json_text(const std::string& text);

inline constexpr float kBnEps = 1e-5f;
inline constexpr float kBnMomentum = 0.9f;

// ---- graph construction ----------------------------------------------

template <class S>
struct ModelLeaves {
    using Id = typename TapeT<S>::NodeId;
    std::array<std::pair<Id, Id>, 4> conv;            // kernel, bias
    std::array<std::pair<Id, Id>, 3> bn;              // gamma, beta
    std::pair<Id, Id> column_proj;
    std::vector<std::array<std::pair<Id, Id>, 4>> attn;  // q,k,v,out per layer
    Id pos_queries = -1;
    std::pair<Id, Id> out_proj;
    std::vector<Id> learnable;  // for_each_learnable order
};

template <class S>
ModelLeaves<S> make_leaves(TapeT<S>& tape, ModelParamsT<S>& params) {
    ModelLeaves<S> lv;
    auto push = [&](TensorT<S>& t) {
        auto id = tape.leaf(t);
        lv.learnable.push_back(id);
        return id;
    };
    for (int i = 0; i < 4; ++i) {
        lv.conv[static_cast<std::size_t>(i)] = {push(params.conv[static_cast<std::size_t>(i)].kernel),
                                                push(params.conv[static_cast<std::size_t>(i)].bias)};
    }
    for (int i = 0; i < 3; ++i) {
        lv.bn[static_cast<std::size_t>(i)] = {push(params.bn[static_cast<std::size_t>(i)].gamma),
                                              push(params.bn[static_cast<std::size_t>(i)].beta)};
    }
    lv.column_proj = {push(params.column_proj.weight), push(params.column_proj.bias)};
    lv.attn.resize(params.attn.size());
    for (std::size_t l = 0; l < params.attn.size(); ++l) {
        lv.attn[l] = {{{push(params.attn[l].query.weight), push(params.attn[l].query.bias)},
                       {push(params.attn[l].key.weight), push(params.attn[l].key.bias)},
                       {push(params.attn[l].value.weight), push(params.attn[l].value.bias)},
                       {push(params.attn[l].out.weight), push(params.attn[l].out.bias)}}};
    }
    lv.pos_queries = push(params.pos_queries);
    lv.out_proj = {push(params.out_proj.weight), push(params.out_proj.bias)};
    return lv;
}

template <class S>
typename TapeT<S>::NodeId encoder_graph(TapeT<S>& tape, const ModelLeaves<S>& lv,
                                        ModelParamsT<S>& params, TensorT<S> images,
                                        BnMode mode, bool update_running) {
    const ModelConfig& cfg = params.config;
    if (images.rank() != 4 || images.dim(1) != 1 || images.dim(2) != cfg.canvas_h ||
        images.dim(3) != cfg.canvas_w) {
        throw ShapeError("encoder: images must be [N,1,canvas_h,canvas_w]");
    }
    const int B = images.dim(0);
    const S eps = static_cast<S>(kBnEps);
    const S mom = static_cast<S>(kBnMomentum);

    auto h = tape.leaf(std::move(images));
    h = tape.conv2d(h, lv.conv[0].first, lv.conv[0].second);
    h = tape.batchnorm2d(h, lv.bn[0].first, lv.bn[0].second, eps, mode,
                         params.bn[0].running, mom, update_running);
    h = tape.relu(h);
    h = tape.conv2d(h, lv.conv[1].first, lv.conv[1].second);
    h = tape.batchnorm2d(h, lv.bn[1].first, lv.bn[1].second, eps, mode,
                         params.bn[1].running, mom, update_running);
    h = tape.relu(h);
    h = tape.maxpool2x2(h);
    h = tape.conv2d(h, lv.conv[2].first, lv.conv[2].second);
    h = tape.batchnorm2d(h, lv.bn[2].first, lv.bn[2].second, eps, mode,
                         params.bn[2].running, mom, update_running);
    h = tape.relu(h);
    h = tape.conv2d(h, lv.conv[3].first, lv.conv[3].second);
    h = tape.relu(h);
    h = tape.maxpool2x2(h);

    auto cols = tape.columns(h);  // [B, S, column_dim]
    const int seq = cfg.sequence_len();
    auto flat = tape.reshape(cols, {B * seq, cfg.column_dim()});
    auto proj = tape.linear(flat, lv.column_proj.first, lv.column_proj.second);
    return tape.reshape(proj, {B, seq, cfg.attn_dim});
}

template <class S>
void decoder_graph(TapeT<S>& tape, const ModelLeaves<S>& lv, const ModelConfig& cfg,
                   typename TapeT<S>::NodeId features, ForwardGraph<S>& out) {
    const int B = tape.value(features).dim(0);
    const int seq = tape.value(features).dim(1);
    const int d = cfg.attn_dim;
    const int T = cfg.max_len;

    auto lin3 = [&](typename TapeT<S>::NodeId x, const std::pair<int, int>& wb, int rows) {
        auto flat = tape.reshape(x, {B * rows, d});
        auto y = tape.linear(flat, wb.first, wb.second);
        return tape.reshape(y, {B, rows, d});
    };

    auto state = tape.broadcast_batch(lv.pos_queries, B);  // [B, T, d]
    for (std::size_t l = 0; l < lv.attn.size(); ++l) {
        auto q = lin3(state, lv.attn[l][0], T);
        auto k = lin3(features, lv.attn[l][1], seq);
        auto v = lin3(features, lv.attn[l][2], seq);
        auto scores = tape.attn_scores(q, k);
        auto weights = tape.softmax(scores, 2);
        out.attn_weights.push_back(weights);
        auto ctx = tape.attn_mix(weights, v);
        auto proj = lin3(ctx, lv.attn[l][3], T);
        state = tape.relu(tape.add(state, proj));
    }
    auto flat = tape.reshape(state, {B * T, d});
    auto logits = tape.linear(flat, lv.out_proj.first, lv.out_proj.second);
    out.logits = tape.reshape(logits, {B, T, cfg.alphabet_size});
}

template <class S>
ForwardGraph<S> forward_graph(TapeT<S>& tape, ModelParamsT<S>& params, TensorT<S> images,
                              BnMode mode, bool update_running, bool freeze_encoder) {
    params.config.validate();
    ForwardGraph<S> g;
    ModelLeaves<S> lv = make_leaves(tape, params);
    g.learnable = lv.learnable;
    auto features = encoder_graph(tape, lv, params, std::move(images), mode, update_running);
    if (freeze_encoder) features = tape.stop_gradient(features);
    g.features = features;
    decoder_graph(tape, lv, params.config, features, g);
    return g;
}

}  // namespace mailocr
