#pragma once

#include <cstdint>
#include <string>

#include "mailocr/image.hpp"

namespace mailocr {

enum class PatternKind { DiagonalHatch, Crosshatch, TiledGlyph };

const char* to_string(PatternKind k);
PatternKind pattern_kind_from_string(const std::string& s);

// Parametric security pattern. `ink` is the pattern darkness: pattern
// pixels carry luminance 1-ink, the rest stay white.
struct PatternSpec {
    PatternKind kind = PatternKind::DiagonalHatch;
    int period = 8;     // pixels per repeat
    int stroke = 2;     // ink width in pixels (glyph scale for TiledGlyph)
    double ink = 0.5;   // darkness in [0,1]
    int phase_dx = 0;
    int phase_dy = 0;
    std::uint64_t seed = 0;  // used only by TiledGlyph

    void validate() const;  // 0 < stroke < period, ink in [0,1]
};

// Envelope stacking: alpha is the pattern opacity, beta the transparency /
// contrast factor of the through-envelope photograph, sigma the camera
// noise level.
struct ComposeParams {
    double alpha = 0.6;
    double beta = 0.7;
    double sigma = 0.02;

    void validate() const;  // alpha in [0,1], beta in (0,1], sigma >= 0
};

// Draws `label` left-aligned in the embedded 5x7 font at integer scale
// max(1, canvas_h/8), vertically centered. Deterministic.
// Throws AlphabetError / CapacityError.
GrayImage render_text(const std::string& label, int canvas_w, int canvas_h);

// Scale used by render_text for a given canvas height.
int render_scale(int canvas_h);

// Scaled ink extent of a label: (len*advance - gap) * scale, 0 when empty.
int rendered_width(const std::string& label, int canvas_h);

GrayImage synth_pattern(const PatternSpec& spec, int w, int h);

// Per pixel: stacked = min(text, 1 - alpha*(1 - pattern));
// out = clamp(0.5 + beta*(stacked - 0.5) + sigma*g, 0, 1) with g a standard
// Gaussian drawn from Rng(seed) in row-major order.
GrayImage compose_sample(const GrayImage& text, const GrayImage& pattern,
                         const ComposeParams& p, std::uint64_t seed);

}  // namespace mailocr
