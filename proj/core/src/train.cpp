#include "mailocr/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "mailocr/errors.hpp"
#include "mailocr/font.hpp"
#include "mailocr/lexicon.hpp"
#include "mailocr/rng.hpp"

namespace mailocr {

void TrainConfig::validate() const {
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double learning_rate, const AdamConfig& cfg) {
    if (params.size() != grads.size()) throw ShapeError("adam_step: list sizes differ");
    if (state.m.empty() && state.v.empty()) {
        for (const Tensor* p : params) {
            state.m.emplace_back(p->shape);
            state.v.emplace_back(p->shape);
        }
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam_step: state does not match parameter list");
    }
    state.t += 1;
    const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        if (!p.same_shape(g) || !p.same_shape(m)) {
            throw ShapeError("adam_step: tensor shape mismatch");
        }
        for (std::int64_t j = 0; j < p.numel(); ++j) {
            const double gj = g[j];
            const double mj = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
            const double vj = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
            m[j] = static_cast<float>(mj);
            v[j] = static_cast<float>(vj);
            const double mhat = mj / corr1;
            const double vhat = vj / corr2;
            p[j] = static_cast<float>(p[j] - learning_rate * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "iteration,loss,char_acc\n";
    for (const auto& r : rows) out << r.iteration << "," << r.loss << "," << r.char_acc << "\n";
    if (!out) throw StorageError("write failed: " + path.string());
}

TrainData train_data_from_dir(const std::filesystem::path& dir, const ModelConfig& cfg) {
    TrainData data;
    for (auto& s : load_dataset(dir)) {
        if (s.image.width != cfg.canvas_w || s.image.height != cfg.canvas_h) {
            throw DataError("sample " + std::to_string(s.id) + " does not match the canvas");
        }
        label_targets(s.label, cfg);  // validates length and characters
        auto& bucket = s.split == Split::Train ? data.train : data.holdout;
        bucket.push_back(TrainSample{std::move(s.image), std::move(s.label)});
    }
    return data;
}

std::vector<int> label_targets(const std::string& label, const ModelConfig& cfg) {
    if (static_cast<int>(label.size()) > cfg.max_len) {
        throw DataError("label '" + label + "' exceeds max_len");
    }
    std::vector<int> t(static_cast<std::size_t>(cfg.max_len), kPadIndex);
    for (std::size_t i = 0; i < label.size(); ++i) t[i] = char_to_index(label[i]);
    return t;
}

namespace {

double char_similarity(const std::string& pred, const std::string& truth) {
    if (truth.empty()) return pred.empty() ? 1.0 : 0.0;
    const std::size_t longest = std::max(pred.size(), truth.size());
    return 1.0 - static_cast<double>(edit_distance(pred, truth)) / static_cast<double>(longest);
}

}  // namespace

double evaluate_char_accuracy(ModelParams& params, const std::vector<TrainSample>& samples) {
    if (samples.empty()) return 0.0;
    constexpr std::size_t kChunk = 64;
    double acc = 0;
    for (std::size_t i = 0; i < samples.size(); i += kChunk) {
        const std::size_t end = std::min(samples.size(), i + kChunk);
        std::vector<const GrayImage*> images;
        images.reserve(end - i);
        for (std::size_t j = i; j < end; ++j) images.push_back(&samples[j].image);
        const auto preds = predict_batch(images, params);
        for (std::size_t j = i; j < end; ++j) {
            acc += char_similarity(preds[j - i].text, samples[j].label);
        }
    }
    return acc / static_cast<double>(samples.size());
}

TrainResult train_loop(const TrainData& data, const TrainConfig& cfg, ModelParams start) {
    cfg.validate();
    start.config.validate();
    if (data.train.empty()) throw DataError("training split is empty");

    const ModelConfig& mc = start.config;
    const std::size_t n = data.train.size();
    const int batch = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n));
    const bool frozen = cfg.freeze == FreezePolicy::EncoderFrozen;

    std::vector<std::vector<int>> targets;
    targets.reserve(n);
    for (const auto& s : data.train) targets.push_back(label_targets(s.label, mc));

    Rng shuffle_rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = n;  // forces a shuffle before the first batch

    AdamState state;
    TrainResult result{std::move(start), {}};
    TrainLog& log = result.log;

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        if (cursor + static_cast<std::size_t>(batch) > n) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = shuffle_rng.index(i + 1);
                std::swap(order[i], order[j]);
            }
            cursor = 0;
        }
        std::vector<const GrayImage*> images;
        std::vector<int> batch_targets;
        images.reserve(static_cast<std::size_t>(batch));
        batch_targets.reserve(static_cast<std::size_t>(batch) * mc.max_len);
        for (int b = 0; b < batch; ++b) {
            const std::size_t idx = order[cursor++];
            images.push_back(&data.train[idx].image);
            const auto& t = targets[idx];
            batch_targets.insert(batch_targets.end(), t.begin(), t.end());
        }

        Tape tape;
        auto g = forward_graph(tape, result.params, batch_images(images, mc),
                               frozen ? BnMode::Infer : BnMode::Train,
                               /*update_running=*/!frozen, /*freeze_encoder=*/frozen);
        const auto loss = tape.cross_entropy(g.logits, batch_targets);
        tape.backward(loss);

        std::vector<Tensor*> upd;
        std::vector<const Tensor*> upd_grads;
        std::size_t li = 0;
        result.params.for_each_learnable([&](Tensor& t, bool encoder) {
            if (!(frozen && encoder)) {
                upd.push_back(&t);
                upd_grads.push_back(&tape.grad(g.learnable[li]));
            }
            ++li;
        });
        adam_step(upd, upd_grads, state, cfg.learning_rate, cfg.adam);

        if (iter == 1 || iter == cfg.iterations || iter % cfg.eval_every == 0) {
            TrainLogRow row;
            row.iteration = iter;
            row.loss = tape.value(loss)[0];
            row.char_acc = evaluate_char_accuracy(
                result.params, data.holdout.empty() ? data.train : data.holdout);
            if (log.rows.empty() || log.rows.back().iteration != iter) {
                log.rows.push_back(row);
            }
        }
    }
    return result;
}

double gradient_check(const ModelConfig& cfg, std::uint64_t seed, int n_probes) {
    if (n_probes < 1) throw ContractError("gradient_check: n_probes must be >= 1");
    cfg.validate();
    ModelParamsT<double> params = init_params(cfg, derive_seed(seed, 1)).cast<double>();

    Rng data_rng(derive_seed(seed, 2));
    TensorT<double> images({2, 1, cfg.canvas_h, cfg.canvas_w});
    for (auto& v : images.data) v = data_rng.uniform();
    std::vector<int> targets(static_cast<std::size_t>(2) * cfg.max_len);
    for (auto& t : targets) t = static_cast<int>(data_rng.index(cfg.alphabet_size));

    const auto loss_of = [&](ModelParamsT<double>& p) {
        TapeT<double> tape;
        auto g = forward_graph(tape, p, images, BnMode::Train, false, false);
        return tape.value(tape.cross_entropy(g.logits, targets))[0];
    };

    TapeT<double> tape;
    auto g = forward_graph(tape, params, images, BnMode::Train, false, false);
    const auto loss = tape.cross_entropy(g.logits, targets);
    tape.backward(loss);

    std::vector<TensorT<double>*> tensors;
    params.for_each_learnable([&](TensorT<double>& t, bool) { tensors.push_back(&t); });
    std::vector<const TensorT<double>*> grads;
    for (auto id : g.learnable) grads.push_back(&tape.grad(id));

    std::int64_t total = 0;
    for (auto* t : tensors) total += t->numel();

    Rng probe_rng(derive_seed(seed, 3));
    const double h = 1e-3;
    double worst = 0;
    for (int probe = 0; probe < n_probes; ++probe) {
        std::int64_t flat = static_cast<std::int64_t>(
            probe_rng.next() % static_cast<std::uint64_t>(total));
        std::size_t ti = 0;
        while (flat >= tensors[ti]->numel()) {
            flat -= tensors[ti]->numel();
            ++ti;
        }
        const double analytic = (*grads[ti])[flat];
        double& coord = (*tensors[ti])[flat];
        const double orig = coord;
        coord = orig + h;
        const double lp = loss_of(params);
        coord = orig - h;
        const double lm = loss_of(params);
        coord = orig;
        const double fd = (lp - lm) / (2 * h);
        const double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-6});
        worst = std::max(worst, std::fabs(fd - analytic) / denom);
    }
    return worst;
}

}  // namespace mailocr
