#include "mailocr/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mailocr/errors.hpp"
#include "mailocr/font.hpp"
#include "mailocr/rng.hpp"

namespace mailocr {

using nlohmann::json;

void ModelConfig::validate() const {
    if (attn_dim != 128 || attn_layers != 2) {
        throw ConfigError("model requires attn_dim 128 and attn_layers 2");
    }
    if (alphabet_size != kAlphabetSize) {
        throw ConfigError("alphabet size must be " + std::to_string(kAlphabetSize));
    }
    if (max_len < 1) throw ConfigError("max_len must be >= 1");
    for (int c : conv_channels) {
        if (c < 1) throw ConfigError("conv channels must be positive");
    }
    if (canvas_w < 4 || canvas_h < 4 || canvas_w % 4 != 0 || canvas_h % 4 != 0) {
        throw ConfigError("canvas extents must be positive multiples of 4");
    }
}

std::int64_t ModelConfig::parameter_count() const {
    std::int64_t n = 0;
    int ci = 1;
    for (int i = 0; i < 4; ++i) {
        const int co = conv_channels[static_cast<std::size_t>(i)];
        n += static_cast<std::int64_t>(co) * ci * 9 + co;
        ci = co;
    }
    for (int i = 0; i < 3; ++i) {
        n += 4 * static_cast<std::int64_t>(conv_channels[static_cast<std::size_t>(i)]);
    }
    n += static_cast<std::int64_t>(column_dim()) * attn_dim + attn_dim;
    n += static_cast<std::int64_t>(attn_layers) * 4 *
         (static_cast<std::int64_t>(attn_dim) * attn_dim + attn_dim);
    n += static_cast<std::int64_t>(max_len) * attn_dim;
    n += static_cast<std::int64_t>(attn_dim) * alphabet_size + alphabet_size;
    return n;
}

template <class S>
ModelParamsT<S> make_param_shapes(const ModelConfig& cfg) {
    ModelParamsT<S> p;
    p.config = cfg;
    int ci = 1;
    for (int i = 0; i < 4; ++i) {
        const int co = cfg.conv_channels[static_cast<std::size_t>(i)];
        p.conv[static_cast<std::size_t>(i)].kernel = TensorT<S>({co, ci, 3, 3});
        p.conv[static_cast<std::size_t>(i)].bias = TensorT<S>({co});
        ci = co;
    }
    for (int i = 0; i < 3; ++i) {
        const int c = cfg.conv_channels[static_cast<std::size_t>(i)];
        auto& bn = p.bn[static_cast<std::size_t>(i)];
        bn.gamma = TensorT<S>({c});
        bn.beta = TensorT<S>({c});
        bn.running.mean = TensorT<S>({c});
        bn.running.var = TensorT<S>({c});
    }
    p.column_proj.weight = TensorT<S>({cfg.column_dim(), cfg.attn_dim});
    p.column_proj.bias = TensorT<S>({cfg.attn_dim});
    p.attn.resize(static_cast<std::size_t>(cfg.attn_layers));
    for (auto& layer : p.attn) {
        for (auto* lin : {&layer.query, &layer.key, &layer.value, &layer.out}) {
            lin->weight = TensorT<S>({cfg.attn_dim, cfg.attn_dim});
            lin->bias = TensorT<S>({cfg.attn_dim});
        }
    }
    p.pos_queries = TensorT<S>({cfg.max_len, cfg.attn_dim});
    p.out_proj.weight = TensorT<S>({cfg.attn_dim, cfg.alphabet_size});
    p.out_proj.bias = TensorT<S>({cfg.alphabet_size});
    return p;
}

template ModelParamsT<float> make_param_shapes<float>(const ModelConfig&);
template ModelParamsT<double> make_param_shapes<double>(const ModelConfig&);

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelParams p = make_param_shapes<float>(cfg);
    Rng rng(seed);
    auto fan_in_uniform = [&rng](Tensor& t, int fan_in) {
        const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (auto& v : t.data) v = static_cast<float>((rng.uniform() * 2.0 - 1.0) * a);
    };
    int ci = 1;
    for (int i = 0; i < 4; ++i) {
        fan_in_uniform(p.conv[static_cast<std::size_t>(i)].kernel, ci * 9);
        ci = cfg.conv_channels[static_cast<std::size_t>(i)];
    }
    for (auto& bn : p.bn) {
        std::fill(bn.gamma.data.begin(), bn.gamma.data.end(), 1.0f);
        std::fill(bn.running.var.data.begin(), bn.running.var.data.end(), 1.0f);
    }
    fan_in_uniform(p.column_proj.weight, cfg.column_dim());
    for (auto& layer : p.attn) {
        for (auto* lin : {&layer.query, &layer.key, &layer.value, &layer.out}) {
            fan_in_uniform(lin->weight, cfg.attn_dim);
        }
    }
    fan_in_uniform(p.pos_queries, cfg.attn_dim);
    fan_in_uniform(p.out_proj.weight, cfg.attn_dim);
    return p;
}

Tensor batch_images(const std::vector<const GrayImage*>& images, const ModelConfig& cfg) {
    const int B = static_cast<int>(images.size());
    Tensor x({B, 1, cfg.canvas_h, cfg.canvas_w});
    for (int b = 0; b < B; ++b) {
        const GrayImage& img = *images[static_cast<std::size_t>(b)];
        if (img.width != cfg.canvas_w || img.height != cfg.canvas_h) {
            throw ShapeError("image does not match the model canvas");
        }
        std::copy(img.pixels.begin(), img.pixels.end(),
                  x.data.begin() + static_cast<std::ptrdiff_t>(b) * img.pixels.size());
    }
    return x;
}

Tensor encode(const GrayImage& image, ModelParams& params, BnMode mode) {
    params.config.validate();
    Tape tape;
    auto lv = make_leaves(tape, params);
    auto features =
        encoder_graph(tape, lv, params, batch_images({&image}, params.config), mode, false);
    const Tensor& f = tape.value(features);
    Tensor out({f.dim(1), f.dim(2)});
    out.data = f.data;
    return out;
}

Tensor decode(const Tensor& features, ModelParams& params, std::vector<Tensor>* attn_weights) {
    params.config.validate();
    if (features.rank() != 2 || features.dim(1) != params.config.attn_dim) {
        throw ShapeError("decode: expected features [S, attn_dim]");
    }
    Tape tape;
    auto lv = make_leaves(tape, params);
    Tensor f3({1, features.dim(0), features.dim(1)});
    f3.data = features.data;
    ForwardGraph<float> g;
    decoder_graph(tape, lv, params.config, tape.leaf(std::move(f3)), g);
    if (attn_weights) {
        for (auto id : g.attn_weights) {
            const Tensor& w = tape.value(id);
            Tensor w2({w.dim(1), w.dim(2)});
            w2.data = w.data;
            attn_weights->push_back(std::move(w2));
        }
    }
    const Tensor& l = tape.value(g.logits);
    Tensor out({l.dim(1), l.dim(2)});
    out.data = l.data;
    return out;
}

namespace {

Prediction decode_logits_row(const float* row, int max_len, int alphabet) {
    Prediction pred;
    for (int t = 0; t < max_len; ++t) {
        const float* l = row + static_cast<std::ptrdiff_t>(t) * alphabet;
        int best = 0;
        for (int a = 1; a < alphabet; ++a) {
            if (l[a] > l[best]) best = a;  // strict: ties keep the lowest index
        }
        if (best == kPadIndex) continue;
        double mx = l[best];
        double z = 0;
        for (int a = 0; a < alphabet; ++a) z += std::exp(static_cast<double>(l[a]) - mx);
        pred.text.push_back(index_to_char(best));
        pred.confidences.push_back(1.0 / z);
    }
    return pred;
}

}  // namespace

std::vector<Prediction> predict_batch(const std::vector<const GrayImage*>& images,
                                      ModelParams& params) {
    if (images.empty()) return {};
    Tape tape;
    auto g = forward_graph(tape, params, batch_images(images, params.config), BnMode::Infer,
                           false, false);
    const Tensor& logits = tape.value(g.logits);
    const int T = params.config.max_len, A = params.config.alphabet_size;
    std::vector<Prediction> out;
    out.reserve(images.size());
    for (int b = 0; b < static_cast<int>(images.size()); ++b) {
        out.push_back(decode_logits_row(
            logits.ptr() + static_cast<std::ptrdiff_t>(b) * T * A, T, A));
    }
    return out;
}

Prediction predict(const GrayImage& image, ModelParams& params) {
    return predict_batch({&image}, params)[0];
}

// ---- checkpoint ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'L', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) {
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw FormatError("checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)]))
             << (8 * i);
    }
    pos += 4;
    return v;
}

}  // namespace

std::string canonical_model_config_json(const ModelConfig& cfg) {
    return json{{"conv_channels", cfg.conv_channels},
                {"attn_dim", cfg.attn_dim},
                {"attn_layers", cfg.attn_layers},
                {"max_len", cfg.max_len},
                {"alphabet_size", cfg.alphabet_size},
                {"canvas", {cfg.canvas_w, cfg.canvas_h}}}
        .dump();
}

ModelConfig model_config_from_json_text(const std::string& text) {
    ModelConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad model config JSON: ") + e.what());
    }
    try {
        if (j.contains("conv_channels")) {
            auto v = j.at("conv_channels").get<std::vector<int>>();
            if (v.size() != 4) throw FormatError("conv_channels must have 4 entries");
            std::copy(v.begin(), v.end(), cfg.conv_channels.begin());
        }
        cfg.attn_dim = j.value("attn_dim", cfg.attn_dim);
        cfg.attn_layers = j.value("attn_layers", cfg.attn_layers);
        cfg.max_len = j.value("max_len", cfg.max_len);
        cfg.alphabet_size = j.value("alphabet_size", cfg.alphabet_size);
        if (j.contains("canvas")) {
            cfg.canvas_w = j.at("canvas").at(0).get<int>();
            cfg.canvas_h = j.at("canvas").at(1).get<int>();
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad model config: ") + e.what());
    }
    return cfg;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    params.config.validate();
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    const std::string cfg = canonical_model_config_json(params.config);
    put_u32(buf, static_cast<std::uint32_t>(cfg.size()));
    buf += cfg;
    params.for_each_tensor([&](const Tensor& t) {
        for (float v : t.data) put_f32(buf, v);
    });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw StorageError("write failed: " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open for reading: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw FormatError("not a checkpoint file: " + path.string());
    }
    std::size_t pos = 4;
    const std::uint32_t version = get_u32(buf, pos);
    if (version != kVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint32_t cfg_len = get_u32(buf, pos);
    if (pos + cfg_len > buf.size()) throw FormatError("checkpoint truncated");
    const ModelConfig cfg = model_config_from_json_text(buf.substr(pos, cfg_len));
    cfg.validate();
    pos += cfg_len;
    const std::int64_t expected = cfg.parameter_count();
    if (buf.size() - pos != static_cast<std::size_t>(expected) * 4) {
        throw FormatError("checkpoint payload length does not match the config");
    }
    ModelParams params = make_param_shapes<float>(cfg);
    params.for_each_tensor([&](Tensor& t) {
        for (auto& v : t.data) v = std::bit_cast<float>(get_u32(buf, pos));
    });
    return params;
}

}  // namespace mailocr
