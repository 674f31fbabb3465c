#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mailocr/countermeasure.hpp"
#include "mailocr/dataset.hpp"
#include "mailocr/font.hpp"
#include "mailocr/lexicon.hpp"
#include "mailocr/model.hpp"
#include "mailocr/train.hpp"

namespace mailocr {

// 1 - edit_distance / max(len). Truth must be non-empty.
double char_accuracy(const std::string& pred, const std::string& truth);

// Fraction of exact matches over a non-empty list of (pred, truth) pairs.
double word_accuracy(const std::vector<std::pair<std::string, std::string>>& pairs);

// Dataset vocabulary: the attacker's "known labels". Uppercase words and a
// few digit strings, all of which fit the default canvas.
const std::vector<std::string>& default_labels();

// Broad frequency-weighted dictionary backing the general spell check.
const std::vector<std::pair<std::string, double>>& general_words();

// The three stand-in security patterns: 1 diagonal hatch, 2 crosshatch,
// 3 tiled glyph.
PatternSpec canonical_pattern(int id);

enum class Correction { None, General, Domain };
const char* to_string(Correction c);
Correction correction_from_string(const std::string& s);

enum class SplitFilter { All, TrainOnly, EvalOnly };

struct EvalOptions {
    Correction correction = Correction::None;
    CorrectionConfig correction_cfg;
    const Lexicon* lexicon = nullptr;  // needed for general/domain correction
    SplitFilter filter = SplitFilter::All;
};

struct EvalResult {
    double char_acc = 0;
    double word_acc = 0;
    int n = 0;
    // position-wise counts over PAD-padded strings, [truth][pred]
    std::array<std::array<std::int64_t, kAlphabetSize>, kAlphabetSize> confusion{};
};

EvalResult evaluate_dataset(ModelParams& params, const std::filesystem::path& dir,
                            const EvalOptions& opts);

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int n_pretrain = 2000;
    int n_finetune = 1200;  // ~1000 train / ~200 held-out at the 5/6 split
    int n_eval = 200;
    int train_pattern = 1;
    std::vector<int> test_patterns{1, 2, 3};
    std::vector<Correction> corrections{Correction::None, Correction::General,
                                        Correction::Domain};
    bool countermeasure = false;
    std::vector<int> jitter_sweep;  // countermeasure misalignment evals

    ModelConfig model;
    TrainConfig pretrain;
    TrainConfig finetune;
    ComposeParams compose{0.6, 0.7, 0.02};
    double pretrain_split = 0.95;
    double finetune_split = 5.0 / 6.0;
    CorrectionConfig correction_cfg;
    ShaderParams shader;
    std::vector<std::string> wordlist;  // empty = default_labels()

    ExperimentConfig();  // desk-scale training defaults

    void validate() const;
};

std::string experiment_config_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json_text(const std::string& text);

struct EvalCell {
    int train_pattern = 0;
    int test_pattern = 0;
    Correction correction = Correction::None;
    bool countermeasure = false;
    double char_acc = 0;
    double word_acc = 0;
    int n = 0;
    std::uint64_t seed = 0;
};

struct EvalReport {
    std::vector<EvalCell> rows;
    std::array<std::array<std::int64_t, kAlphabetSize>, kAlphabetSize> confusion{};
};

// generate -> pretrain -> fine-tune -> evaluate every configured cell.
// All randomness derives from cfg.seed; two runs with the same config give
// byte-identical artifact trees. Leaves datasets, checkpoints, training
// logs, lexicons, report.csv, confusion.csv and chart.svg under out_dir.
EvalReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

void emit_report(const EvalReport& report, const std::filesystem::path& out_dir);

EvalReport read_report_csv(const std::filesystem::path& path);

}  // namespace mailocr
