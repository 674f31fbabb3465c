#include "mailocr/font.hpp"

#include <bit>

#include "mailocr/errors.hpp"

namespace mailocr {

namespace {

// Column bytes for '0'..'9' then 'A'..'Z', the classic 5x7 dot-matrix
// shapes. Bit 0 is the top row, bit 6 the bottom.
constexpr std::array<std::array<std::uint8_t, 5>, 36> kGlyphs = {{
    {0x3e, 0x51, 0x49, 0x45, 0x3e},  // 0
    {0x00, 0x42, 0x7f, 0x40, 0x00},  // 1
    {0x42, 0x61, 0x51, 0x49, 0x46},  // 2
    {0x21, 0x41, 0x45, 0x4b, 0x31},  // 3
    {0x18, 0x14, 0x12, 0x7f, 0x10},  // 4
    {0x27, 0x45, 0x45, 0x45, 0x39},  // 5
    {0x3c, 0x4a, 0x49, 0x49, 0x30},  // 6
    {0x01, 0x71, 0x09, 0x05, 0x03},  // 7
    {0x36, 0x49, 0x49, 0x49, 0x36},  // 8
    {0x06, 0x49, 0x49, 0x29, 0x1e},  // 9
    {0x7e, 0x11, 0x11, 0x11, 0x7e},  // A
    {0x7f, 0x49, 0x49, 0x49, 0x36},  // B
    {0x3e, 0x41, 0x41, 0x41, 0x22},  // C
    {0x7f, 0x41, 0x41, 0x22, 0x1c},  // D
    {0x7f, 0x49, 0x49, 0x49, 0x41},  // E
    {0x7f, 0x09, 0x09, 0x09, 0x01},  // F
    {0x3e, 0x41, 0x49, 0x49, 0x3a},  // G
    {0x7f, 0x08, 0x08, 0x08, 0x7f},  // H
    {0x00, 0x41, 0x7f, 0x41, 0x00},  // I
    {0x20, 0x40, 0x41, 0x3f, 0x01},  // J
    {0x7f, 0x08, 0x14, 0x22, 0x41},  // K
    {0x7f, 0x40, 0x40, 0x40, 0x40},  // L
    {0x7f, 0x02, 0x0c, 0x02, 0x7f},  // M
    {0x7f, 0x04, 0x08, 0x10, 0x7f},  // N
    {0x3e, 0x41, 0x41, 0x41, 0x3e},  // O
    {0x7f, 0x09, 0x09, 0x09, 0x06},  // P
    {0x3e, 0x41, 0x51, 0x21, 0x5e},  // Q
    {0x7f, 0x09, 0x19, 0x29, 0x46},  // R
    {0x46, 0x49, 0x49, 0x49, 0x31},  // S
    {0x01, 0x01, 0x7f, 0x01, 0x01},  // T
    {0x3f, 0x40, 0x40, 0x40, 0x3f},  // U
    {0x1f, 0x20, 0x40, 0x20, 0x1f},  // V
    {0x3f, 0x40, 0x38, 0x40, 0x3f},  // W
    {0x63, 0x14, 0x08, 0x14, 0x63},  // X
    {0x07, 0x08, 0x70, 0x08, 0x07},  // Y
    {0x61, 0x51, 0x49, 0x45, 0x43},  // Z
}};

}  // namespace

bool in_alphabet(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

int char_to_index(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= '0' && c <= '9') return 26 + (c - '0');
    throw AlphabetError(std::string("character not in alphabet: '") + c + "'");
}

char index_to_char(int idx) {
    if (idx >= 0 && idx < 26) return static_cast<char>('A' + idx);
    if (idx >= 26 && idx < 36) return static_cast<char>('0' + (idx - 26));
    if (idx == kPadIndex) return kPadDisplayChar;
    throw AlphabetError("alphabet index out of range: " + std::to_string(idx));
}

void validate_label(const std::string& label) {
    for (char c : label) {
        if (!in_alphabet(c)) {
            throw AlphabetError(std::string("label character not in alphabet: '") + c + "'");
        }
    }
}

const std::array<std::uint8_t, 5>& glyph_columns(char c) {
    const int idx = char_to_index(c);
    // glyph table stores digits first
    return kGlyphs[idx < 26 ? static_cast<std::size_t>(idx + 10)
                            : static_cast<std::size_t>(idx - 26)];
}

int glyph_ink_cells(char c) {
    int n = 0;
    for (std::uint8_t col : glyph_columns(c)) n += std::popcount(col);
    return n;
}

}  // namespace mailocr
