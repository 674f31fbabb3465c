#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mailocr {

// Grayscale raster, row-major, luminance in [0,1].
// 0 is full ink, 1 is white paper.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 1.0f)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    std::size_t size() const { return pixels.size(); }
};

// Throws ShapeError / ContractError when the type invariants are violated.
void validate(const GrayImage& img);

inline std::uint8_t quantize8(float v) {
    const int q = static_cast<int>(std::lround(v * 255.0f));
    return static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
}

// Binary PGM ("P5"), maxval 255, one byte per pixel = round(luminance*255).
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace mailocr
