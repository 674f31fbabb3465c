#include "mailocr/countermeasure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mailocr/errors.hpp"
#include "mailocr/rng.hpp"

namespace mailocr {

using nlohmann::json;

void ShaderParams::validate() const {
    if (block < 1) throw ConfigError("shader block must be >= 1");
    if (dilation_radius < 0) throw ConfigError("dilation_radius must be >= 0");
    if (!(ink_threshold > 0.0 && ink_threshold <= 1.0)) {
        throw ConfigError("ink_threshold must be in (0,1]");
    }
    if (target_density >= 0 && target_density > 1.0) {
        throw ConfigError("target_density must be in [0,1]");
    }
}

std::int64_t BinaryMask::count() const {
    std::int64_t n = 0;
    for (auto b : bits) n += b;
    return n;
}

BinaryMask content_mask(const GrayImage& text, const ShaderParams& p) {
    p.validate();
    const int w = text.width, h = text.height, r = p.dilation_radius;
    BinaryMask raw(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (text.at(x, y) < p.ink_threshold) raw.set(x, y);
        }
    }
    if (r == 0) return raw;
    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!raw.test(x, y)) continue;
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) mask.set(xx, yy);
            }
        }
    }
    return mask;
}

double measured_ink_density(const GrayImage& text, const BinaryMask& mask,
                            double ink_threshold) {
    if (text.width != mask.width || text.height != mask.height) {
        throw ShapeError("mask does not match the image");
    }
    std::int64_t ink = 0, area = 0;
    for (int y = 0; y < text.height; ++y) {
        for (int x = 0; x < text.width; ++x) {
            if (!mask.test(x, y)) continue;
            ++area;
            if (text.at(x, y) < ink_threshold) ++ink;
        }
    }
    return area == 0 ? 0.0 : static_cast<double>(ink) / static_cast<double>(area);
}

ShaderParams resolve_density(const GrayImage& text, ShaderParams p) {
    if (p.target_density < 0) {
        p.target_density = measured_ink_density(text, content_mask(text, p), p.ink_threshold);
    }
    return p;
}

namespace {

struct Cell {
    int x0, y0;           // block origin, unjittered
    std::int64_t pixels;  // in-canvas block pixels
};

}  // namespace

GrayImage generate_shader(const BinaryMask& mask, const ShaderParams& p) {
    p.validate();
    if (p.target_density < 0) {
        throw ConfigError("generate_shader needs a resolved target_density");
    }
    const int w = mask.width, h = mask.height, b = p.block;
    GrayImage shader(w, h, 1.0f);
    const double rho = p.target_density;
    if (rho == 0.0) return shader;

    // Pitch sized for a base Bernoulli rate of 1/2, then the exact rate
    // recomputed so the expected cell coverage equals the target density.
    const int pitch = std::max(
        b, static_cast<int>(std::lround(b * std::sqrt(0.5 / std::min(1.0, rho)))));
    const double q =
        std::clamp(rho * pitch * pitch / (static_cast<double>(b) * b), 0.0, 1.0);

    std::vector<Cell> candidates;
    for (int cy = 0; cy * pitch < h; ++cy) {
        for (int cx = 0; cx * pitch < w; ++cx) {
            const int x0 = cx * pitch, y0 = cy * pitch;
            const int x1 = std::min(w, x0 + b), y1 = std::min(h, y0 + b);
            bool clear = true;
            for (int y = y0; y < y1 && clear; ++y) {
                for (int x = x0; x < x1; ++x) {
                    if (mask.test(x, y)) {
                        clear = false;
                        break;
                    }
                }
            }
            if (clear) {
                candidates.push_back(
                    {x0, y0, static_cast<std::int64_t>(x1 - x0) * (y1 - y0)});
            }
        }
    }

    Rng rng(p.seed);
    std::vector<std::size_t> selected, spare;
    std::int64_t stamped = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (rng.bernoulli(q)) {
            selected.push_back(i);
            stamped += candidates[i].pixels;
        } else {
            spare.push_back(i);
        }
    }

    // density correction: land within half a block of the target
    std::int64_t blank = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) blank += mask.test(x, y) ? 0 : 1;
    }
    const std::int64_t target = static_cast<std::int64_t>(std::llround(rho * blank));
    const std::int64_t half_block = static_cast<std::int64_t>(b) * b / 2;
    while (target - stamped > half_block && !spare.empty()) {
        const std::size_t pick = rng.index(spare.size());
        selected.push_back(spare[pick]);
        stamped += candidates[spare[pick]].pixels;
        spare[pick] = spare.back();
        spare.pop_back();
    }
    while (stamped - target > half_block && !selected.empty()) {
        const std::size_t pick = rng.index(selected.size());
        stamped -= candidates[selected[pick]].pixels;
        selected[pick] = selected.back();
        selected.pop_back();
    }

    for (const std::size_t i : selected) {
        const Cell& c = candidates[i];
        const int x0 = c.x0 + p.jitter_dx, y0 = c.y0 + p.jitter_dy;
        const int x1 = std::min(w, x0 + b), y1 = std::min(h, y0 + b);
        for (int y = std::max(0, y0); y < y1; ++y) {
            for (int x = std::max(0, x0); x < x1; ++x) shader.at(x, y) = 0.0f;
        }
    }
    return shader;
}

GrayImage apply_countermeasure(const GrayImage& text, const GrayImage& pattern,
                               const GrayImage& shader, const ComposeParams& p,
                               std::uint64_t seed) {
    if (text.width != shader.width || text.height != shader.height) {
        throw ShapeError("text and shader dimensions differ");
    }
    GrayImage merged(text.width, text.height);
    for (std::size_t i = 0; i < merged.size(); ++i) {
        merged.pixels[i] = std::min(text.pixels[i], shader.pixels[i]);
    }
    return compose_sample(merged, pattern, p, seed);
}

Manifest augment_dataset(const std::filesystem::path& in_dir,
                         const std::filesystem::path& out_dir, const ShaderParams& p) {
    p.validate();
    const DatasetConfig cfg = read_dataset_config(in_dir / "config.json");
    const Manifest in_manifest = read_manifest(in_dir / "manifest.jsonl");
    const std::uint64_t expect = fnv1a64(canonical_dataset_config_json(cfg));
    if (in_manifest.config_hash != expect) {
        throw FormatError("dataset config.json does not match the manifest hash");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "images", ec);
    if (ec) throw StorageError("cannot create " + (out_dir / "images").string());

    Manifest out = in_manifest;
    const std::string combined =
        canonical_dataset_config_json(cfg) + shader_params_json(p);
    out.config_hash = fnv1a64(combined);

    for (const auto& rec : out.records) {
        const SamplePlan plan = plan_sample(cfg, rec.id);
        const GrayImage text = plan_text_image(cfg, plan);
        ShaderParams sp = resolve_density(text, p);
        sp.seed = derive_seed(p.seed, static_cast<std::uint64_t>(rec.id));
        const GrayImage shader = generate_shader(content_mask(text, sp), sp);
        const GrayImage sample = apply_countermeasure(
            text, plan_pattern_image(cfg, plan), shader, cfg.compose, plan.compose_seed);
        write_pgm(sample, out_dir / rec.image_path);
    }
    write_manifest(out, out_dir / "manifest.jsonl");

    std::ofstream cfg_out(out_dir / "config.json", std::ios::binary);
    if (!cfg_out) throw StorageError("cannot write mirror config");
    cfg_out << json{{"dataset", json::parse(canonical_dataset_config_json(cfg))},
                    {"shader", json::parse(shader_params_json(p))}}
                   .dump()
            << "\n";
    return out;
}

std::string shader_params_json(const ShaderParams& p) {
    return json{{"ink_threshold", p.ink_threshold},
                {"dilation_radius", p.dilation_radius},
                {"block", p.block},
                {"target_density", p.target_density},
                {"jitter", {p.jitter_dx, p.jitter_dy}},
                {"seed", p.seed}}
        .dump();
}

ShaderParams shader_params_from_json_text(const std::string& text) {
    ShaderParams p;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad shader params JSON: ") + e.what());
    }
    try {
        p.ink_threshold = j.value("ink_threshold", p.ink_threshold);
        p.dilation_radius = j.value("dilation_radius", p.dilation_radius);
        p.block = j.value("block", p.block);
        p.target_density = j.value("target_density", p.target_density);
        if (j.contains("jitter")) {
            p.jitter_dx = j.at("jitter").at(0).get<int>();
            p.jitter_dy = j.at("jitter").at(1).get<int>();
        }
        p.seed = j.value("seed", p.seed);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad shader params: ") + e.what());
    }
    return p;
}

}  // namespace mailocr
