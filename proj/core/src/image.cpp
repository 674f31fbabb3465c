#include "mailocr/image.hpp"

#include <cctype>
#include <fstream>

#include "mailocr/errors.hpp"

namespace mailocr {

void validate(const GrayImage& img) {
    if (img.width < 0 || img.height < 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
        throw ShapeError("pixel buffer does not match width*height");
    }
    for (float v : img.pixels) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw ContractError("pixel outside [0,1]");
        }
    }
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> bytes(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = quantize8(img.pixels[i]);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageError("write failed: " + path.string());
}

namespace {

int read_pnm_int(std::istream& in) {
    // skips whitespace and '#' comment lines, as the PNM family allows
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw FormatError("malformed PGM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        if (value > 1 << 30) throw FormatError("PGM header value out of range");
        c = in.get();
    }
    if (c != EOF && !std::isspace(c)) throw FormatError("malformed PGM header");
    return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open for reading: " + path.string());
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw FormatError("not a binary PGM: " + path.string());
    const int w = read_pnm_int(in);
    const int h = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (maxval != 255) throw FormatError("unsupported PGM maxval");
    GrayImage img(w, h);
    std::vector<std::uint8_t> bytes(img.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw FormatError("truncated PGM payload: " + path.string());
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        img.pixels[i] = static_cast<float>(bytes[i]) / 255.0f;
    }
    return img;
}

}  // namespace mailocr
