#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mailocr/dataset.hpp"
#include "mailocr/image.hpp"
#include "mailocr/imagegen.hpp"

namespace mailocr {

// Simulated content-aware shader: ink is detected and dilated into a
// protection mask, then the remaining blank space is filled with black
// blocks until its ink density matches the strokes.
struct ShaderParams {
    double ink_threshold = 0.5;   // luminance below this counts as ink
    int dilation_radius = 2;      // square structuring element radius
    int block = 4;                // block edge length in pixels
    double target_density = -1;  // negative = measure from the text layer
    int jitter_dx = 0;            // page misalignment inside the envelope
    int jitter_dy = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool test(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y) { bits[static_cast<std::size_t>(y) * width + x] = 1; }
    std::int64_t count() const;
};

// Ink pixels (luminance < ink_threshold) dilated by a square element of
// the given radius.
BinaryMask content_mask(const GrayImage& text, const ShaderParams& p);

// Fraction of raw ink pixels within the mask region; the default target
// density of the shader.
double measured_ink_density(const GrayImage& text, const BinaryMask& mask,
                            double ink_threshold);

// Fills p.target_density from the text layer when it is negative.
ShaderParams resolve_density(const GrayImage& text, ShaderParams p);

// Block lattice over the blank region. Cells are seeded by a Bernoulli
// draw, then a correction pass adds or removes random blocks until the
// stamped ink count is within half a block of the target, so the emitted
// density tracks target_density on every sample, not just in expectation.
// Blocks never intersect the (unjittered) mask; the finished layer is
// translated by the jitter offsets.
GrayImage generate_shader(const BinaryMask& mask, const ShaderParams& p);

// Darkest-wins merge of text and shader, then the usual envelope stack.
GrayImage apply_countermeasure(const GrayImage& text, const GrayImage& pattern,
                               const GrayImage& shader, const ComposeParams& p,
                               std::uint64_t seed);

// Mirrors a generated dataset with the shader applied to every sample;
// same records, same per-sample compose seeds, images regenerated.
// Per-sample shader seeds derive from (p.seed, record id).
Manifest augment_dataset(const std::filesystem::path& in_dir,
                         const std::filesystem::path& out_dir, const ShaderParams& p);

std::string shader_params_json(const ShaderParams& p);
ShaderParams shader_params_from_json_text(const std::string& text);

}  // namespace mailocr
