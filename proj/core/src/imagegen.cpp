#include "mailocr/imagegen.hpp"

#include <algorithm>
#include <cmath>

#include "mailocr/errors.hpp"
#include "mailocr/font.hpp"
#include "mailocr/rng.hpp"

namespace mailocr {

const char* to_string(PatternKind k) {
    switch (k) {
        case PatternKind::DiagonalHatch: return "diagonal-hatch";
        case PatternKind::Crosshatch: return "crosshatch";
        case PatternKind::TiledGlyph: return "tiled-glyph";
    }
    return "?";
}

PatternKind pattern_kind_from_string(const std::string& s) {
    if (s == "diagonal-hatch") return PatternKind::DiagonalHatch;
    if (s == "crosshatch") return PatternKind::Crosshatch;
    if (s == "tiled-glyph") return PatternKind::TiledGlyph;
    throw ConfigError("unknown pattern kind: " + s);
}

void PatternSpec::validate() const {
    if (!(stroke > 0 && stroke < period)) {
        throw ConfigError("pattern requires 0 < stroke < period");
    }
    if (!(ink >= 0.0 && ink <= 1.0)) {
        throw ConfigError("pattern ink must be in [0,1]");
    }
}

void ComposeParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must be in (0,1]");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
}

int render_scale(int canvas_h) { return std::max(1, canvas_h / (kGlyphHeight + 1)); }

int rendered_width(const std::string& label, int canvas_h) {
    if (label.empty()) return 0;
    const int n = static_cast<int>(label.size());
    return (n * kGlyphAdvance - kGlyphGap) * render_scale(canvas_h);
}

GrayImage render_text(const std::string& label, int canvas_w, int canvas_h) {
    validate_label(label);
    const int scale = render_scale(canvas_h);
    if (rendered_width(label, canvas_h) > canvas_w) {
        throw CapacityError("label '" + label + "' does not fit a " +
                            std::to_string(canvas_w) + "px canvas");
    }
    GrayImage img(canvas_w, canvas_h, 1.0f);
    const int y0 = (canvas_h - kGlyphHeight * scale) / 2;
    int x0 = 0;
    for (char c : label) {
        const auto& cols = glyph_columns(c);
        for (int gc = 0; gc < kGlyphWidth; ++gc) {
            for (int gr = 0; gr < kGlyphHeight; ++gr) {
                if (!(cols[gc] >> gr & 1)) continue;
                for (int sy = 0; sy < scale; ++sy) {
                    for (int sx = 0; sx < scale; ++sx) {
                        img.at(x0 + gc * scale + sx, y0 + gr * scale + sy) = 0.0f;
                    }
                }
            }
        }
        x0 += kGlyphAdvance * scale;
    }
    return img;
}

namespace {

inline int posmod(int a, int m) {
    const int r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

GrayImage synth_pattern(const PatternSpec& spec, int w, int h) {
    spec.validate();
    GrayImage img(w, h, 1.0f);
    const float ink_lum = static_cast<float>(1.0 - spec.ink);
    const int p = spec.period;

    if (spec.kind == PatternKind::TiledGlyph) {
        const char glyph = index_to_char(static_cast<int>(Rng(spec.seed).index(36)));
        const auto& cols = glyph_columns(glyph);
        const int scale = spec.stroke;
        for (int y = 0; y < h; ++y) {
            const int v = posmod(y + spec.phase_dy, p);
            const int gr = v / scale;
            for (int x = 0; x < w; ++x) {
                const int u = posmod(x + spec.phase_dx, p);
                const int gc = u / scale;
                if (gc < kGlyphWidth && gr < kGlyphHeight && (cols[gc] >> gr & 1)) {
                    img.at(x, y) = ink_lum;
                }
            }
        }
        return img;
    }

    const bool cross = spec.kind == PatternKind::Crosshatch;
    for (int y = 0; y < h; ++y) {
        const int yy = y + spec.phase_dy;
        for (int x = 0; x < w; ++x) {
            const int xx = x + spec.phase_dx;
            bool on = posmod(xx + yy, p) < spec.stroke;
            if (!on && cross) on = posmod(xx - yy, p) < spec.stroke;
            if (on) img.at(x, y) = ink_lum;
        }
    }
    return img;
}

GrayImage compose_sample(const GrayImage& text, const GrayImage& pattern,
                         const ComposeParams& p, std::uint64_t seed) {
    if (text.width != pattern.width || text.height != pattern.height) {
        throw ShapeError("text and pattern dimensions differ");
    }
    p.validate();
    GrayImage out(text.width, text.height);
    Rng rng(seed);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const double g = rng.gaussian();
        const double t = text.pixels[i];
        const double stacked = std::min(t, 1.0 - p.alpha * (1.0 - pattern.pixels[i]));
        const double v = 0.5 + p.beta * (stacked - 0.5) + p.sigma * g;
        out.pixels[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

}  // namespace mailocr
