#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace mailocr {

// 37-symbol alphabet: 'A'..'Z' (0..25), '0'..'9' (26..35), PAD (36).
// PAD absorbs decoder positions beyond the label length; it never occurs
// in labels or lexicon entries.
inline constexpr int kAlphabetSize = 37;
inline constexpr int kPadIndex = 36;
inline constexpr char kPadDisplayChar = '_';  // reports only

bool in_alphabet(char c);
int char_to_index(char c);    // throws AlphabetError for non-alphabet chars
char index_to_char(int idx);  // PAD maps to kPadDisplayChar

// Throws AlphabetError unless every character of `label` is in the alphabet.
void validate_label(const std::string& label);

// Classic 5x7 dot-matrix font, column-encoded: 5 bytes per glyph, bit i of
// byte c set = ink at column c, row i (row 0 is the top).
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphGap = 1;  // blank columns between glyphs
inline constexpr int kGlyphAdvance = kGlyphWidth + kGlyphGap;

const std::array<std::uint8_t, 5>& glyph_columns(char c);
int glyph_ink_cells(char c);

}  // namespace mailocr
