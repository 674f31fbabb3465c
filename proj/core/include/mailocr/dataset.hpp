#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mailocr/image.hpp"
#include "mailocr/imagegen.hpp"

namespace mailocr {

enum class Split { Train, Eval };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct SampleRecord {
    std::int64_t id = 0;
    std::string label;
    int pattern_id = -1;  // index into the config's pattern list, -1 = none
    Split split = Split::Train;
    std::string image_path;  // relative to the dataset directory
};

struct DatasetConfig {
    std::vector<std::string> wordlist;
    int n_samples = 100;
    double split_fraction = 0.8;
    int canvas_w = 160;
    int canvas_h = 32;
    std::vector<PatternSpec> patterns;  // empty = clean text
    ComposeParams compose;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Manifest {
    std::uint64_t config_hash = 0;
    int schema_version = 1;
    std::vector<SampleRecord> records;
};

// Everything sample i needs besides the config; the draws come from
// Rng(derive_seed(config.seed, i)) in a fixed order so that regenerating a
// single sample is possible without generating the rest.
struct SamplePlan {
    std::string label;
    int pattern_index = -1;
    Split split = Split::Train;
    std::uint64_t compose_seed = 0;
};

SamplePlan plan_sample(const DatasetConfig& cfg, std::int64_t i);

// Renders the text layer and the pattern layer for a plan (pattern layer is
// all white when the plan carries no pattern).
GrayImage plan_text_image(const DatasetConfig& cfg, const SamplePlan& plan);
GrayImage plan_pattern_image(const DatasetConfig& cfg, const SamplePlan& plan);

// Writes images/NNNNNN.pgm, manifest.jsonl and config.json under out_dir.
// Byte-identical across runs for identical configs.
Manifest generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);

Manifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const Manifest& m, const std::filesystem::path& manifest_path);

// Canonical JSON (sorted keys, compact) and its FNV-1a 64-bit hash; the hash
// is what manifest headers record.
std::string canonical_dataset_config_json(const DatasetConfig& cfg);
DatasetConfig dataset_config_from_json_text(const std::string& text);
void write_dataset_config(const DatasetConfig& cfg, const std::filesystem::path& path);
DatasetConfig read_dataset_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

struct LoadedSample {
    std::int64_t id = 0;
    std::string label;
    int pattern_id = -1;
    Split split = Split::Train;
    GrayImage image;
};

std::vector<LoadedSample> load_dataset(const std::filesystem::path& dir);

}  // namespace mailocr
