#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mailocr/dataset.hpp"
#include "mailocr/model.hpp"

namespace mailocr {

enum class FreezePolicy { None, EncoderFrozen };

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int iterations = 3000;  // paper-scale runs use ~40000
    std::uint64_t seed = 0;
    FreezePolicy freeze = FreezePolicy::None;
    AdamConfig adam;
    int eval_every = 200;

    void validate() const;
};

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t t = 0;
};

// Standard bias-corrected Adam update, applied in place. Moment tensors are
// allocated on first use and must keep matching shapes afterwards.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double learning_rate, const AdamConfig& cfg);

struct TrainLogRow {
    int iteration = 0;
    double loss = 0;
    double char_acc = 0;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
    void write_csv(const std::filesystem::path& path) const;
};

struct TrainSample {
    GrayImage image;
    std::string label;
};

struct TrainData {
    std::vector<TrainSample> train;
    std::vector<TrainSample> holdout;
};

// Loads a generated dataset directory: train-split records feed the
// optimizer, eval-split records become the held-out monitor.
TrainData train_data_from_dir(const std::filesystem::path& dir, const ModelConfig& cfg);

// Label indices padded with PAD up to max_len. Throws DataError when the
// label is too long for the decoder.
std::vector<int> label_targets(const std::string& label, const ModelConfig& cfg);

// Mean per-sample character accuracy of greedy predictions over `samples`.
double evaluate_char_accuracy(ModelParams& params, const std::vector<TrainSample>& samples);

struct TrainResult {
    ModelParams params;
    TrainLog log;
};

// SplitMix64-shuffled epochs, cross-entropy loss, Adam. Under
// FreezePolicy::EncoderFrozen the encoder runs in inference mode and every
// conv / batchnorm / column-projection tensor stays bit-identical; only
// decoder parameters move. Bit-reproducible for identical inputs.
TrainResult train_loop(const TrainData& data, const TrainConfig& cfg, ModelParams start);

// Central-difference probe of the full analytic gradient at n_probes
// uniformly chosen parameter coordinates (h = 1e-3, everything computed in
// double). Returns the worst relative error.
double gradient_check(const ModelConfig& cfg, std::uint64_t seed, int n_probes);

}  // namespace mailocr
